#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "prgkit/binfmt.hpp"

namespace prgkit {

constexpr std::uint32_t kReturnSentinel = 0xFFFFFFF4;
constexpr std::uint32_t kDefaultStackTop = 0x7FFFFF00;
constexpr std::uint32_t kNoProvenance = 0xFFFFFFFF;

// Sparse delta over the (optional) file image. Unwritten addresses read from
// the file when in range and as zero otherwise.
struct SparseMem {
    std::unordered_map<std::uint32_t, std::uint32_t> words;       // word-addr -> value
    std::unordered_map<std::uint32_t, std::uint32_t> provenance;  // word-addr -> file offset of source

    bool has(std::uint32_t addr) const { return words.count(addr & ~3u) != 0; }
};

struct MachineState {
    std::array<std::uint32_t, 16> regs{};
    bool flag_n = false, flag_z = false, flag_c = false, flag_v = false;
    SparseMem mem;
    std::array<std::uint32_t, 16> reg_prov;
    std::uint64_t step_count = 0;

    MachineState() { reg_prov.fill(kNoProvenance); }

    std::uint32_t& sp() { return regs[13]; }
    std::uint32_t& lr() { return regs[14]; }
    std::uint32_t& pc() { return regs[15]; }

    /// Fresh state: all registers and flags zero except sp (stack top) and lr
    /// (return sentinel).
    static MachineState zeroed(std::uint32_t stack_top = kDefaultStackTop);
};

enum class AccessKind : std::uint8_t { Read, Write };

struct AccessRecord {
    AccessKind kind;
    std::uint32_t addr;
    std::uint8_t width;  // 1 or 4
    std::uint32_t value;
    std::uint32_t pc;
    bool synthetic;  // read of memory that is neither written nor file backed
};

struct StubIntercept {
    std::uint32_t pc;      // address of the mov pc, rI word
    std::uint32_t target;  // value that was not a subroutine entry
};

struct AccessTrace {
    std::vector<AccessRecord> records;
    std::vector<StubIntercept> stubs;

    std::string to_jsonl() const;
};

enum class HaltReason : std::uint8_t { Returned, Breakpoint, LeftCode, BudgetExhausted, DecodeFault };

const char* halt_reason_name(HaltReason r);

struct RunConfig {
    std::uint32_t entry = 0;
    std::set<std::uint32_t> halt_at;
    std::uint64_t step_budget = 10'000'000;
    std::uint32_t image_base = 0;
    std::uint32_t stack_top = kDefaultStackTop;
};

struct RunResult {
    HaltReason reason = HaltReason::Returned;
    std::uint64_t steps = 0;
    std::uint32_t halt_pc = 0;
    std::string detail;
};

struct CallTable {
    std::map<std::uint32_t, std::uint32_t> slots;  // slot address -> subroutine start (file offset)
    std::vector<std::uint32_t> missing;            // carved starts without any slot
    bool complete() const { return missing.empty(); }
};

// Concrete interpreter over one parsed binary. The decoded image is built once
// and shared by every run; runs own their MachineState.
class Emulator {
public:
    explicit Emulator(const PrgBinary& bin);

    RunResult run(const RunConfig& cfg, MachineState& state, AccessTrace* trace = nullptr) const;

    /// Execute Memory INIT from a zeroed state and recover the call table from
    /// the final memory image: words whose value is image_base + a carved
    /// subroutine start. Incompleteness is reported, not thrown.
    CallTable recover_call_table(std::uint32_t image_base = 0) const;

    /// State after running Global INIT from a zeroed state.
    MachineState snapshot_globals(std::uint32_t image_base = 0) const;

    const PrgBinary& binary() const { return bin_; }

private:
    const PrgBinary& bin_;
    std::vector<arm::Instr> image_;  // one entry per word of the code region
    std::uint32_t code_begin_, code_end_;
    std::set<std::uint32_t> sub_starts_;

    const arm::Instr* fetch(std::uint32_t file_off) const;
};

}  // namespace prgkit
