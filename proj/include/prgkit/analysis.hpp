#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prgkit/binfmt.hpp"
#include "prgkit/emulator.hpp"
#include "prgkit/knowledge.hpp"

namespace prgkit {

// One matched indirect-call dispatch sequence.
struct CallSite {
    int caller = -1;                  // subroutine index
    std::uint32_t dispatch_pc = 0;    // address of the mov pc, rI word
    std::uint32_t sub_offset = 0;     // literal routed through the call table / jump offset
    std::uint32_t literal_offset = 0; // file offset of the SUB_OFFSET literal word
    std::uint8_t reg = 0;             // the Ri of the sequence
};

enum class EdgeKind : std::uint8_t { Static, Dynamic, Unresolved };

struct Edge {
    int caller = -1;       // subroutine index
    int callee_sub = -1;   // subroutine index for static edges
    int callee_sym = -1;   // symbol index for dynamic edges
    std::uint32_t count = 0;
    EdgeKind kind = EdgeKind::Static;
};

struct IoAccess {
    std::uint32_t pc = 0;
    std::uint32_t addr = 0;
    AccessKind kind = AccessKind::Read;

    bool operator<(const IoAccess& o) const {
        return std::tie(pc, addr, kind) < std::tie(o.pc, o.addr, o.kind);
    }
    bool operator==(const IoAccess& o) const {
        return pc == o.pc && addr == o.addr && kind == o.kind;
    }
};

struct NodeInfo {
    std::string display_name;              // sub_<hex> until a fingerprint match renames it
    std::optional<std::string> matched;    // fingerprint database name
    std::string digest;                    // sha256 fingerprint ("" when body is empty)
    std::vector<IoAccess> io_reads;
    std::vector<IoAccess> io_writes;
};

struct CallGraph {
    std::vector<NodeInfo> sub_nodes;  // parallel to PrgBinary::subs
    std::vector<Edge> edges;          // sorted (caller, kind, callee)
    std::uint32_t unresolved_sites = 0;
    bool fully_resolved() const { return unresolved_sites == 0; }
};

struct Warning {
    std::uint32_t offset = 0;
    std::string message;
};

/// Match the canonical 9-instruction dispatch pattern in a decoded
/// subroutine. Partial patterns are reported, never fatal.
std::vector<CallSite> find_call_sites(const PrgBinary& bin, int sub_index,
                                      std::vector<Warning>* warnings = nullptr);

/// Resolve every call site against the call table (static) or the symbol
/// table (dynamic); aggregate duplicate caller/callee pairs into counts and
/// fold in cross-subroutine direct branches.
CallGraph build_cfg(const PrgBinary& bin, const CallTable& table,
                    const std::vector<CallSite>& sites, std::uint32_t dispatch_base = 0,
                    std::vector<Warning>* warnings = nullptr);

/// Solo-emulate each subroutine from a zeroed state and record accesses that
/// land in the I/O map; statically resolvable accesses are merged in as a
/// fallback for paths emulation does not reach.
void annotate_io(const PrgBinary& bin, const Emulator& emu, const IoMap& map, CallGraph& graph,
                 std::uint32_t image_base = 0, std::vector<Warning>* warnings = nullptr);

/// Fingerprint every subroutine and rename hits to their database names.
/// Ambiguous digests keep the default name and produce a warning.
void match_known(const PrgBinary& bin, const FingerprintDb& db, CallGraph& graph,
                 std::vector<Warning>* warnings = nullptr);

struct ExtractedParam {
    std::string name;
    ParamType type = ParamType::Dword;
    std::uint32_t raw = 0;
    double value = 0;
    std::uint32_t provenance = kNoProvenance;  // file offset of the backing literal word
};

struct ExtractedArgs {
    CallSite site;
    std::string callee;
    std::uint32_t instance_base = 0;
    std::vector<ExtractedParam> params;
};

/// Run the caller to the call site with globals materialized and read the
/// parameters from the instance memory r0 points at.
ExtractedArgs extract_args(const PrgBinary& bin, const Emulator& emu, const CallSite& site,
                           const ParamLayout& layout, const MachineState& globals,
                           std::uint32_t image_base = 0);

struct AnalysisOptions {
    std::uint32_t image_base = 0;
    std::uint32_t dispatch_base = 0;
    std::optional<IoMap> iomap;
    std::optional<FingerprintDb> db;
};

struct AnalysisResult {
    PrgBinary bin;
    CallTable table;
    std::vector<CallSite> sites;
    CallGraph graph;
    std::vector<Warning> warnings;
    AnalysisOptions options;

    const std::vector<SymbolEntry>& symbols() const { return bin.symbols; }
    std::string node_name(int sub_index) const;
};

/// Full pipeline: parse, carve, decode, call table, CFG, I/O annotation,
/// known-function matching.
AnalysisResult analyze(Bytes prg, const AnalysisOptions& opts = {});

double decode_param_value(ParamType type, std::uint32_t raw);
std::uint32_t encode_param_value(ParamType type, double value);

}  // namespace prgkit
