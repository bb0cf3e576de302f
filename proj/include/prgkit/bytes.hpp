#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

namespace prgkit {

using Bytes = std::vector<std::uint8_t>;

inline std::uint16_t rd_u16(const Bytes& b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline std::uint32_t rd_u32(const Bytes& b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) |
           (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline void wr_u16(Bytes& b, std::size_t off, std::uint16_t v) {
    b[off] = static_cast<std::uint8_t>(v);
    b[off + 1] = static_cast<std::uint8_t>(v >> 8);
}

inline void wr_u32(Bytes& b, std::size_t off, std::uint32_t v) {
    b[off] = static_cast<std::uint8_t>(v);
    b[off + 1] = static_cast<std::uint8_t>(v >> 8);
    b[off + 2] = static_cast<std::uint8_t>(v >> 16);
    b[off + 3] = static_cast<std::uint8_t>(v >> 24);
}

inline void put_u16(Bytes& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(Bytes& b, std::uint32_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v >> 16));
    b.push_back(static_cast<std::uint8_t>(v >> 24));
}

/// "0x1a2b" style rendering used for all offsets in user-facing output.
std::string hex(std::uint32_t v);
/// Fixed-width zero-padded hex without the 0x prefix (listing columns).
std::string hex8(std::uint32_t v);

Bytes read_file(const std::string& path);
void write_file(const std::string& path, const Bytes& data);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const Bytes& data);
std::string sha256_hex(const std::string& data);

}  // namespace prgkit
