#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prgkit/analysis.hpp"
#include "prgkit/bytes.hpp"

namespace prgkit {

struct PatchOp {
    std::uint32_t offset = 0;
    Bytes old_bytes;
    Bytes new_bytes;  // same length as old_bytes
    std::string reason;
};

/// Byte sum of the whole binary modulo 2^32 — the CHK companion value.
std::uint32_t compute_chk(const Bytes& bytes);

/// Little-endian CHK companion file contents.
Bytes chk_file_bytes(std::uint32_t chk);

struct ApplyResult {
    Bytes patched;
    std::uint32_t chk = 0;
    Bytes chk_file;
};

/// Apply equal-length overwrites. Every op's old bytes must match the current
/// contents, ops must not overlap or run past the end; the input is never
/// modified.
ApplyResult apply(const Bytes& binary, const std::vector<PatchOp>& ops);

/// Rewrite the literal word a parameter's value was traced to. Only values
/// with recorded provenance (a literal-pool word or a Global INIT stored
/// constant) are patchable.
std::vector<PatchOp> patch_argument(const Bytes& binary, const ExtractedArgs& args,
                                    const std::string& param, double new_value);

std::string patch_ops_to_json(const std::vector<PatchOp>& ops);
std::vector<PatchOp> patch_ops_from_json(const std::string& text);

}  // namespace prgkit
