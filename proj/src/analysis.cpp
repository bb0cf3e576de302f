#include "prgkit/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "prgkit/error.hpp"

namespace prgkit {

using arm::Instr;
using arm::Op;

namespace {

bool is_push_reg(const Instr& i, std::uint8_t reg) {
    return i.op == Op::Str && !i.mem_reg_offset && i.rd == reg && i.rn == 13 && i.preindex &&
           i.writeback && !i.add_offset && i.imm12 == 4 && i.cond == arm::Cond::AL;
}

bool is_pop_reg(const Instr& i, std::uint8_t reg) {
    return i.op == Op::Ldr && !i.mem_reg_offset && i.rd == reg && i.rn == 13 && !i.preindex &&
           !i.writeback && i.add_offset && i.imm12 == 4 && i.cond == arm::Cond::AL;
}

bool is_mov_reg(const Instr& i, std::uint8_t rd, std::uint8_t rm) {
    return i.op == Op::Mov && !i.imm_op2 && !i.shift_by_reg && i.shift_amount == 0 && i.rd == rd &&
           i.rm == rm && !i.sets_flags && i.cond == arm::Cond::AL;
}

bool is_load_indirect(const Instr& i, std::uint8_t reg) {
    return i.op == Op::Ldr && !i.mem_reg_offset && i.rd == reg && i.rn == reg && i.preindex &&
           !i.writeback && i.imm12 == 0 && i.cond == arm::Cond::AL;
}

}  // namespace

std::vector<CallSite> find_call_sites(const PrgBinary& bin, int sub_index,
                                      std::vector<Warning>* warnings) {
    const Subroutine& sub = bin.subs[sub_index];
    const auto& instrs = sub.instrs;
    std::vector<CallSite> sites;

    for (std::size_t i = 0; i + 8 < instrs.size(); ++i) {
        const Instr& first = instrs[i];
        if (first.op != Op::Str || !is_push_reg(first, first.rd)) continue;
        const std::uint8_t ri = first.rd;
        if (ri == 13 || ri == 15) continue;

        // str lr save, literal load, indirect load, link, jump.
        if (!is_push_reg(instrs[i + 1], 14)) continue;
        const Instr& lit = instrs[i + 2];
        if (!(lit.op == Op::Ldr && lit.is_pc_relative_load() && lit.rd == ri &&
              lit.cond == arm::Cond::AL))
            continue;
        if (!is_load_indirect(instrs[i + 3], ri)) continue;
        if (!is_mov_reg(instrs[i + 4], 14, 15)) continue;
        if (!is_mov_reg(instrs[i + 5], 15, ri)) continue;

        bool tail_ok = instrs[i + 6].op == Op::Nop && is_pop_reg(instrs[i + 7], 14) &&
                       is_pop_reg(instrs[i + 8], ri);
        if (!tail_ok) {
            if (warnings)
                warnings->push_back({instrs[i + 5].addr,
                                     "dispatch at " + hex(instrs[i + 5].addr) +
                                         " missing canonical restore tail"});
            continue;
        }
        if (!lit.literal_resolved) {
            if (warnings)
                warnings->push_back({lit.addr, "dispatch literal at " + hex(lit.addr) +
                                                   " falls outside the image"});
            continue;
        }

        CallSite cs;
        cs.caller = sub_index;
        cs.dispatch_pc = instrs[i + 5].addr;
        cs.sub_offset = lit.literal_value;
        cs.literal_offset = lit.literal_addr;
        cs.reg = ri;
        sites.push_back(cs);
        i += 8;
    }
    return sites;
}

CallGraph build_cfg(const PrgBinary& bin, const CallTable& table,
                    const std::vector<CallSite>& sites, std::uint32_t dispatch_base,
                    std::vector<Warning>* warnings) {
    CallGraph graph;
    graph.sub_nodes.resize(bin.subs.size());
    for (std::size_t i = 0; i < bin.subs.size(); ++i)
        graph.sub_nodes[i].display_name = bin.subs[i].name;

    std::map<std::tuple<int, int, int, int>, std::uint32_t> counts;
    auto bump = [&](int caller, EdgeKind kind, int callee_sub, int callee_sym) {
        counts[{caller, static_cast<int>(kind), callee_sub, callee_sym}] += 1;
    };

    std::map<std::uint32_t, int> sub_by_start;
    for (std::size_t i = 0; i < bin.subs.size(); ++i)
        sub_by_start[bin.subs[i].start] = static_cast<int>(i);

    for (const auto& cs : sites) {
        auto slot = table.slots.find(cs.sub_offset);
        if (slot != table.slots.end()) {
            auto target = sub_by_start.find(slot->second);
            if (target != sub_by_start.end()) {
                bump(cs.caller, EdgeKind::Static, target->second, -1);
                continue;
            }
        }
        int sym_index = -1;
        if (cs.sub_offset >= dispatch_base + 8 && (cs.sub_offset - dispatch_base - 8) % 4 == 0) {
            std::uint32_t idx = (cs.sub_offset - dispatch_base - 8) / 4;
            for (std::size_t s = 0; s < bin.symbols.size(); ++s) {
                if (bin.symbols[s].index == idx) {
                    sym_index = static_cast<int>(s);
                    break;
                }
            }
        }
        if (sym_index >= 0) {
            bump(cs.caller, EdgeKind::Dynamic, -1, sym_index);
        } else {
            bump(cs.caller, EdgeKind::Unresolved, -1, -1);
            ++graph.unresolved_sites;
            if (warnings)
                warnings->push_back({cs.dispatch_pc,
                                     "unresolved dispatch target " + hex(cs.sub_offset) + " at " +
                                         hex(cs.dispatch_pc)});
        }
    }

    // Direct branches that land in another subroutine count as static calls.
    for (std::size_t i = 0; i < bin.subs.size(); ++i) {
        for (const auto& ins : bin.subs[i].instrs) {
            if (!ins.is_branch()) continue;
            std::uint32_t target = ins.branch_target();
            int target_sub = bin.sub_index_containing(target);
            if (target_sub >= 0 && target_sub != static_cast<int>(i))
                bump(static_cast<int>(i), EdgeKind::Static, target_sub, -1);
        }
    }

    for (const auto& [key, count] : counts) {
        Edge e;
        e.caller = std::get<0>(key);
        e.kind = static_cast<EdgeKind>(std::get<1>(key));
        e.callee_sub = std::get<2>(key);
        e.callee_sym = std::get<3>(key);
        e.count = count;
        graph.edges.push_back(e);
    }
    return graph;
}

namespace {

// Linear constant propagation over one subroutine: registers that hold a
// statically known address at a plain load/store give the fallback I/O
// matches for paths the solo run never takes.
void static_io_scan(const Subroutine& sub, const IoMap& map, std::set<IoAccess>& reads,
                    std::set<IoAccess>& writes) {
    std::array<std::uint32_t, 16> value{};
    std::array<bool, 16> known{};

    for (const auto& ins : sub.instrs) {
        if (!ins.ok()) {
            known.fill(false);
            continue;
        }
        if (ins.cond != arm::Cond::AL) {
            // Conditionally executed definitions poison their target.
            if (!ins.is_branch() && ins.rd < 16) known[ins.rd] = false;
            continue;
        }
        switch (ins.op) {
            case Op::Ldr:
                if (ins.is_pc_relative_load() && ins.literal_resolved) {
                    value[ins.rd] = ins.literal_value;
                    known[ins.rd] = true;
                    break;
                }
                [[fallthrough]];
            case Op::Ldrb: {
                if (!ins.mem_reg_offset && ins.preindex && known[ins.rn]) {
                    std::uint32_t ea = ins.add_offset ? value[ins.rn] + ins.imm12
                                                      : value[ins.rn] - ins.imm12;
                    if (map.is_input(ea)) reads.insert({ins.addr, ea, AccessKind::Read});
                }
                known[ins.rd] = false;
                if (ins.writeback || !ins.preindex) known[ins.rn] = false;
                break;
            }
            case Op::Str:
            case Op::Strb: {
                if (!ins.mem_reg_offset && ins.preindex && known[ins.rn]) {
                    std::uint32_t ea = ins.add_offset ? value[ins.rn] + ins.imm12
                                                      : value[ins.rn] - ins.imm12;
                    if (map.is_output(ea)) writes.insert({ins.addr, ea, AccessKind::Write});
                }
                if (ins.writeback || !ins.preindex) known[ins.rn] = false;
                break;
            }
            case Op::Mov:
                if (!ins.imm_op2 && !ins.shift_by_reg && ins.shift_amount == 0 && ins.rm != 15) {
                    value[ins.rd] = value[ins.rm];
                    known[ins.rd] = known[ins.rm];
                } else if (ins.imm_op2) {
                    value[ins.rd] = ins.imm_value();
                    known[ins.rd] = true;
                } else {
                    known[ins.rd] = false;
                }
                break;
            case Op::Add:
            case Op::Sub:
                if (ins.imm_op2 && known[ins.rn]) {
                    value[ins.rd] = ins.op == Op::Add ? value[ins.rn] + ins.imm_value()
                                                      : value[ins.rn] - ins.imm_value();
                    known[ins.rd] = true;
                } else {
                    known[ins.rd] = false;
                }
                break;
            case Op::Ldm:
                for (unsigned r = 0; r < 16; ++r)
                    if (ins.reglist & (1u << r)) known[r] = false;
                if (ins.writeback) known[ins.rn] = false;
                break;
            case Op::Stm:
                if (ins.writeback) known[ins.rn] = false;
                break;
            case Op::B:
            case Op::Bl:
            case Op::Nop:
            case Op::Msr:
                break;
            case Op::Tst:
            case Op::Teq:
            case Op::Cmp:
            case Op::Cmn:
                break;
            default:
                if (ins.rd < 16) known[ins.rd] = false;
                break;
        }
    }
}

}  // namespace

void annotate_io(const PrgBinary& bin, const Emulator& emu, const IoMap& map, CallGraph& graph,
                 std::uint32_t image_base, std::vector<Warning>* warnings) {
    for (std::size_t i = 0; i < bin.subs.size(); ++i) {
        const Subroutine& sub = bin.subs[i];
        std::set<IoAccess> reads, writes;

        MachineState st = MachineState::zeroed();
        RunConfig cfg;
        cfg.entry = sub.start;
        cfg.image_base = image_base;
        AccessTrace trace;
        RunResult r = emu.run(cfg, st, &trace);
        if (r.reason != HaltReason::Returned && warnings)
            warnings->push_back({sub.start, sub.name + ": solo run halted with " +
                                                halt_reason_name(r.reason) +
                                                ", falling back to static matching"});
        for (const auto& rec : trace.records) {
            if (rec.kind == AccessKind::Read && map.is_input(rec.addr))
                reads.insert({rec.pc - image_base, rec.addr, AccessKind::Read});
            else if (rec.kind == AccessKind::Write && map.is_output(rec.addr))
                writes.insert({rec.pc - image_base, rec.addr, AccessKind::Write});
        }

        static_io_scan(sub, map, reads, writes);

        graph.sub_nodes[i].io_reads.assign(reads.begin(), reads.end());
        graph.sub_nodes[i].io_writes.assign(writes.begin(), writes.end());
    }
}

void match_known(const PrgBinary& bin, const FingerprintDb& db, CallGraph& graph,
                 std::vector<Warning>* warnings) {
    for (std::size_t i = 0; i < bin.subs.size(); ++i) {
        NodeInfo& node = graph.sub_nodes[i];
        std::string digest;
        try {
            digest = fingerprint(bin.subs[i]);
        } catch (const Error&) {
            continue;  // empty body: nothing to match
        }
        node.digest = digest;
        auto names = db.names_for(digest);
        if (names.empty()) continue;
        if (names.size() > 1) {
            if (warnings) {
                std::string all;
                for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
                warnings->push_back({bin.subs[i].start,
                                     bin.subs[i].name + ": ambiguous fingerprint match (" + all + ")"});
            }
            continue;
        }
        node.matched = names.front();
        node.display_name = names.front();
    }
}

double decode_param_value(ParamType type, std::uint32_t raw) {
    switch (type) {
        case ParamType::Real32: {
            float f;
            std::uint32_t bits = raw;
            std::memcpy(&f, &bits, sizeof f);
            return static_cast<double>(f);
        }
        case ParamType::Bool:
            return raw ? 1.0 : 0.0;
        case ParamType::Word:
            return static_cast<double>(raw & 0xFFFF);
        case ParamType::Dword:
        case ParamType::Time:
            return static_cast<double>(raw);
    }
    return 0;
}

std::uint32_t encode_param_value(ParamType type, double value) {
    switch (type) {
        case ParamType::Real32: {
            float f = static_cast<float>(value);
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof bits);
            return bits;
        }
        case ParamType::Bool:
            return value != 0 ? 1u : 0u;
        case ParamType::Word:
            return static_cast<std::uint32_t>(value) & 0xFFFF;
        case ParamType::Dword:
        case ParamType::Time:
            return static_cast<std::uint32_t>(value);
    }
    return 0;
}

ExtractedArgs extract_args(const PrgBinary& bin, const Emulator& emu, const CallSite& site,
                           const ParamLayout& layout, const MachineState& globals,
                           std::uint32_t image_base) {
    ExtractedArgs out;
    out.site = site;
    out.callee = layout.function;

    MachineState st = MachineState::zeroed();
    st.mem = globals.mem;  // globals materialized; registers start fresh

    RunConfig cfg;
    cfg.entry = bin.subs[site.caller].start;
    cfg.image_base = image_base;
    cfg.halt_at = {site.dispatch_pc};
    RunResult r = emu.run(cfg, st, nullptr);
    if (r.reason != HaltReason::Breakpoint)
        fail(Errc::HaltNotReached, "call site " + hex(site.dispatch_pc) +
                                       " not reached on the concrete path (" +
                                       halt_reason_name(r.reason) + ")");

    out.instance_base = st.regs[0];
    for (const auto& p : layout.params) {
        ExtractedParam param;
        param.name = p.name;
        param.type = p.type;
        std::uint32_t addr = out.instance_base + p.byte_offset;
        std::uint32_t wa = addr & ~3u;

        std::uint32_t word = 0;
        auto it = st.mem.words.find(wa);
        if (it != st.mem.words.end()) {
            word = it->second;
        } else {
            std::uint32_t file_off = wa - image_base;
            if (wa >= image_base && file_off + 4 <= bin.bytes.size()) word = rd_u32(bin.bytes, file_off);
        }
        unsigned width = param_type_width(p.type);
        if (width == 4)
            param.raw = word;
        else if (width == 2)
            param.raw = (word >> ((addr & 2u) * 8)) & 0xFFFF;
        else
            param.raw = (word >> ((addr & 3u) * 8)) & 0xFF;
        param.value = decode_param_value(p.type, param.raw);

        auto prov = st.mem.provenance.find(wa);
        param.provenance = prov == st.mem.provenance.end() ? kNoProvenance : prov->second;
        out.params.push_back(std::move(param));
    }
    return out;
}

std::string AnalysisResult::node_name(int sub_index) const {
    if (sub_index < 0 || sub_index >= static_cast<int>(graph.sub_nodes.size())) return "?";
    return graph.sub_nodes[sub_index].display_name;
}

AnalysisResult analyze(Bytes prg, const AnalysisOptions& opts) {
    AnalysisResult result;
    result.options = opts;
    result.bin = parse_prg(std::move(prg));
    for (const auto& w : result.bin.warnings) result.warnings.push_back({0, w});

    Emulator emu(result.bin);
    result.table = emu.recover_call_table(opts.image_base);
    if (!result.table.complete()) {
        std::string uncovered;
        for (auto s : result.table.missing) uncovered += (uncovered.empty() ? "" : ", ") + hex(s);
        result.warnings.push_back(
            {0, "call table incomplete; uncovered subroutines: " + uncovered + " (graph may be unsound)"});
    }

    for (std::size_t i = 0; i < result.bin.subs.size(); ++i) {
        auto sites = find_call_sites(result.bin, static_cast<int>(i), &result.warnings);
        result.sites.insert(result.sites.end(), sites.begin(), sites.end());
    }

    result.graph = build_cfg(result.bin, result.table, result.sites, opts.dispatch_base,
                             &result.warnings);

    if (opts.iomap)
        annotate_io(result.bin, emu, *opts.iomap, result.graph, opts.image_base, &result.warnings);
    if (opts.db) match_known(result.bin, *opts.db, result.graph, &result.warnings);
    return result;
}

}  // namespace prgkit
