#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prgkit/binfmt.hpp"
#include "prgkit/bytes.hpp"

namespace prgkit {

// Changing how mnemonics are joined or spelled invalidates every stored
// digest, so the canonicalization carries a version that is checked on load.
constexpr int kFingerprintCanonVersion = 1;
constexpr char kMnemonicSeparator = ',';

enum class ParamType : std::uint8_t { Real32, Dword, Word, Bool, Time };

const char* param_type_name(ParamType t);
ParamType param_type_from_name(const std::string& name);
unsigned param_type_width(ParamType t);

struct ParamDesc {
    std::string name;
    ParamType type = ParamType::Dword;
    std::uint32_t byte_offset = 0;
};

// Call-argument layout for a known function: parameters live at fixed offsets
// from the instance base, which the caller passes in r0 at dispatch time.
struct ParamLayout {
    std::string function;
    std::vector<ParamDesc> params;

    const ParamDesc* find(const std::string& name) const;
    void validate() const;  // offsets strictly increasing, no overlap
};

struct Fingerprint {
    std::string sha256;
    std::string name;
    std::string library;
    std::uint32_t mnemonic_count = 0;
    std::optional<ParamLayout> param_layout;
};

class FingerprintDb {
public:
    void add(Fingerprint fp);  // throws CollisionDetected on digest reuse across names
    const Fingerprint* lookup(const std::string& sha256) const;
    bool ambiguous(const std::string& sha256) const;
    std::vector<std::string> names_for(const std::string& sha256) const;
    std::size_t size() const { return entries_.size(); }
    const std::vector<Fingerprint>& entries() const { return entries_; }
    void attach_layout(const std::string& name, ParamLayout layout);

    std::string to_json() const;
    static FingerprintDb from_json(const std::string& text);

private:
    std::vector<Fingerprint> entries_;
    std::multimap<std::string, std::size_t> by_digest_;
};

/// Comma-joined lowercase mnemonic stream of a decoded subroutine (condition
/// suffixes included, operands and undecodable words excluded).
std::string mnemonic_stream(const Subroutine& sub);

/// SHA-256 hex digest of the mnemonic stream. Throws EmptyBody when the
/// subroutine has no decodable instruction.
std::string fingerprint(const Subroutine& sub);

struct DbCorpusEntry {
    Bytes prg;
    std::string name;
    std::string library;
};

/// Fingerprint the single main/INIT pair of each corpus binary, recording
/// <name> and <name>_INIT. Digest collisions across distinct names abort.
FingerprintDb build_db(const std::vector<DbCorpusEntry>& corpus);

struct IoRange {
    std::uint32_t start = 0;
    std::uint32_t end = 0;  // inclusive

    bool contains(std::uint32_t addr) const { return addr >= start && addr <= end; }
};

struct IoMap {
    std::string model;
    std::vector<IoRange> input_ranges;
    std::vector<IoRange> output_ranges;

    bool is_input(std::uint32_t addr) const;
    bool is_output(std::uint32_t addr) const;
    void validate() const;  // sorted, non-overlapping, inputs/outputs disjoint
};

/// The I/O map reverse engineered from the WAGO 750-881 target description.
IoMap wago_750_881();

/// Canonical argument layout for the PID function-block family used by the
/// generator and the extraction tests.
ParamLayout pid_param_layout();

struct TrgKey {
    static constexpr std::size_t kSize = 256;  // 2048-bit repeating block
    Bytes key;

    static TrgKey from_bytes(Bytes b);
};

/// Repeating-key XOR over 2048-bit blocks; decode and encode are the same
/// transform.
Bytes trg_decode(const Bytes& cipher, const TrgKey& key);
inline Bytes trg_encode(const Bytes& plain, const TrgKey& key) { return trg_decode(plain, key); }

/// Known-plaintext key recovery: needs at least one full 256-byte block
/// aligned at offset 0.
TrgKey trg_recover_key(const Bytes& cipher, const Bytes& known_plain);

/// Parse the line-oriented decoded TRG layout (model= / input= / output=).
IoMap parse_iomap(const Bytes& decoded_trg);
IoMap parse_iomap_text(const std::string& text);
std::string render_iomap(const IoMap& map);

/// Load an I/O map from a file holding either the text layout or the JSON
/// document form.
IoMap load_iomap(const std::string& path);

}  // namespace prgkit
