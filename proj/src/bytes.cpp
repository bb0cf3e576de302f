#include "prgkit/bytes.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "prgkit/error.hpp"

namespace prgkit {

std::string hex(std::uint32_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << v;
    return os.str();
}

std::string hex8(std::uint32_t v) {
    std::string out(8, '0');
    for (int i = 7; i >= 0; --i) {
        out[i] = "0123456789abcdef"[v & 0xF];
        v >>= 4;
    }
    return out;
}

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Io, "cannot open " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::Io, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) fail(Errc::Io, "short write to " + path);
}

std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (!EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr))
        fail(Errc::Io, "sha256 digest failed");
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out += "0123456789abcdef"[digest[i] >> 4];
        out += "0123456789abcdef"[digest[i] & 0xF];
    }
    return out;
}

std::string sha256_hex(const Bytes& data) { return sha256_hex(data.data(), data.size()); }
std::string sha256_hex(const std::string& data) { return sha256_hex(data.data(), data.size()); }

}  // namespace prgkit
