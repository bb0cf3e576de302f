#include "prgkit/emulator.hpp"

#include <sstream>

#include "prgkit/error.hpp"

namespace prgkit {

using arm::Cond;
using arm::Instr;
using arm::Op;
using arm::ShiftKind;

MachineState MachineState::zeroed(std::uint32_t stack_top) {
    MachineState st;
    st.sp() = stack_top;
    st.lr() = kReturnSentinel;
    return st;
}

const char* halt_reason_name(HaltReason r) {
    switch (r) {
        case HaltReason::Returned: return "returned";
        case HaltReason::Breakpoint: return "breakpoint";
        case HaltReason::LeftCode: return "left_code";
        case HaltReason::BudgetExhausted: return "budget_exhausted";
        case HaltReason::DecodeFault: return "decode_fault";
    }
    return "?";
}

std::string AccessTrace::to_jsonl() const {
    std::ostringstream os;
    for (const auto& r : records) {
        os << "{\"kind\":\"" << (r.kind == AccessKind::Read ? "read" : "write") << "\",\"addr\":" << r.addr
           << ",\"width\":" << static_cast<int>(r.width) << ",\"value\":" << r.value << ",\"pc\":" << r.pc
           << ",\"synthetic\":" << (r.synthetic ? "true" : "false") << "}\n";
    }
    for (const auto& s : stubs)
        os << "{\"kind\":\"stub\",\"pc\":" << s.pc << ",\"target\":" << s.target << "}\n";
    return os.str();
}

Emulator::Emulator(const PrgBinary& bin) : bin_(bin) {
    code_begin_ = kCodeStart;
    code_end_ = bin.code_end();
    image_.resize((code_end_ - code_begin_) / 4);
    for (const auto& sub : bin.subs) {
        for (const auto& ins : sub.instrs) {
            image_[(ins.addr - code_begin_) / 4] = ins;
        }
        // Pool words stay op==Word; executing one faults.
        for (std::uint32_t off = sub.end; off < sub.pool_end; off += 4) {
            Instr w;
            w.addr = off;
            w.raw = rd_u32(bin.bytes, off);
            w.op = Op::Word;
            image_[(off - code_begin_) / 4] = w;
        }
        sub_starts_.insert(sub.start);
    }
}

const Instr* Emulator::fetch(std::uint32_t file_off) const {
    if (file_off < code_begin_ || file_off >= code_end_ || file_off % 4 != 0) return nullptr;
    return &image_[(file_off - code_begin_) / 4];
}

namespace {

struct Ctx {
    MachineState& st;
    AccessTrace* trace;
    const Bytes& file;
    std::uint32_t image_base;

    std::uint32_t read_word_raw(std::uint32_t addr, bool& synthetic, std::uint32_t& prov) {
        std::uint32_t wa = addr & ~3u;
        auto it = st.mem.words.find(wa);
        if (it != st.mem.words.end()) {
            synthetic = false;
            auto pit = st.mem.provenance.find(wa);
            prov = pit == st.mem.provenance.end() ? kNoProvenance : pit->second;
            return it->second;
        }
        std::uint32_t file_off = wa - image_base;
        if (wa >= image_base && file_off + 4 <= file.size()) {
            synthetic = false;
            prov = file_off;  // a value read straight from the image can be patched there
            return rd_u32(file, file_off);
        }
        synthetic = true;
        prov = kNoProvenance;
        return 0;
    }

    std::uint32_t load(std::uint32_t addr, unsigned width, std::uint32_t pc, std::uint32_t& prov) {
        bool synthetic = false;
        std::uint32_t word = read_word_raw(addr, synthetic, prov);
        std::uint32_t value = width == 4 ? word : (word >> ((addr & 3u) * 8)) & 0xFF;
        if (trace)
            trace->records.push_back({AccessKind::Read, addr, static_cast<std::uint8_t>(width), value, pc,
                                      synthetic});
        return value;
    }

    void store(std::uint32_t addr, unsigned width, std::uint32_t value, std::uint32_t pc,
               std::uint32_t prov) {
        std::uint32_t wa = addr & ~3u;
        if (width == 4) {
            st.mem.words[wa] = value;
            if (prov != kNoProvenance)
                st.mem.provenance[wa] = prov;
            else
                st.mem.provenance.erase(wa);
        } else {
            bool synthetic = false;
            std::uint32_t dummy_prov;
            std::uint32_t word = read_word_raw(addr, synthetic, dummy_prov);
            unsigned shift = (addr & 3u) * 8;
            word = (word & ~(0xFFu << shift)) | ((value & 0xFF) << shift);
            st.mem.words[wa] = word;
            st.mem.provenance.erase(wa);  // partial writes lose word provenance
        }
        if (trace)
            trace->records.push_back({AccessKind::Write, addr, static_cast<std::uint8_t>(width),
                                      width == 4 ? value : (value & 0xFF), pc, false});
    }
};

inline std::uint32_t ror32(std::uint32_t v, unsigned n) {
    n &= 31;
    return n == 0 ? v : (v >> n) | (v << (32 - n));
}

bool cond_passed(Cond c, const MachineState& st) {
    switch (c) {
        case Cond::EQ: return st.flag_z;
        case Cond::NE: return !st.flag_z;
        case Cond::CS: return st.flag_c;
        case Cond::CC: return !st.flag_c;
        case Cond::MI: return st.flag_n;
        case Cond::PL: return !st.flag_n;
        case Cond::VS: return st.flag_v;
        case Cond::VC: return !st.flag_v;
        case Cond::HI: return st.flag_c && !st.flag_z;
        case Cond::LS: return !st.flag_c || st.flag_z;
        case Cond::GE: return st.flag_n == st.flag_v;
        case Cond::LT: return st.flag_n != st.flag_v;
        case Cond::GT: return !st.flag_z && st.flag_n == st.flag_v;
        case Cond::LE: return st.flag_z || st.flag_n != st.flag_v;
        case Cond::AL: return true;
    }
    return true;
}

// Register read with A32 pipeline semantics for pc.
inline std::uint32_t reg_read(const MachineState& st, unsigned r, std::uint32_t pc) {
    return r == 15 ? pc + 8 : st.regs[r];
}

struct Op2 {
    std::uint32_t value;
    bool carry;
};

Op2 eval_shifted_reg(const Instr& ins, const MachineState& st, std::uint32_t pc, bool carry_in) {
    std::uint32_t rm = reg_read(st, ins.rm, pc);
    std::uint32_t amount;
    if (ins.shift_by_reg) {
        amount = st.regs[ins.rs] & 0xFF;
        if (amount == 0) return {rm, carry_in};
        switch (ins.shift) {
            case ShiftKind::Lsl:
                if (amount < 32) return {rm << amount, ((rm >> (32 - amount)) & 1) != 0};
                if (amount == 32) return {0, (rm & 1) != 0};
                return {0, false};
            case ShiftKind::Lsr:
                if (amount < 32) return {rm >> amount, ((rm >> (amount - 1)) & 1) != 0};
                if (amount == 32) return {0, (rm >> 31) != 0};
                return {0, false};
            case ShiftKind::Asr:
                if (amount < 32)
                    return {static_cast<std::uint32_t>(static_cast<std::int32_t>(rm) >> amount),
                            ((rm >> (amount - 1)) & 1) != 0};
                return {static_cast<std::uint32_t>(static_cast<std::int32_t>(rm) >> 31), (rm >> 31) != 0};
            case ShiftKind::Ror: {
                unsigned r = amount & 31;
                if (r == 0) return {rm, (rm >> 31) != 0};
                return {ror32(rm, r), ((rm >> (r - 1)) & 1) != 0};
            }
        }
    } else {
        amount = ins.shift_amount;
        switch (ins.shift) {
            case ShiftKind::Lsl:
                if (amount == 0) return {rm, carry_in};
                return {rm << amount, ((rm >> (32 - amount)) & 1) != 0};
            case ShiftKind::Lsr:
                if (amount == 0) return {0, (rm >> 31) != 0};  // lsr #32
                return {rm >> amount, ((rm >> (amount - 1)) & 1) != 0};
            case ShiftKind::Asr:
                if (amount == 0)
                    return {static_cast<std::uint32_t>(static_cast<std::int32_t>(rm) >> 31),
                            (rm >> 31) != 0};  // asr #32
                return {static_cast<std::uint32_t>(static_cast<std::int32_t>(rm) >> amount),
                        ((rm >> (amount - 1)) & 1) != 0};
            case ShiftKind::Ror:
                if (amount == 0)  // rrx
                    return {(static_cast<std::uint32_t>(carry_in) << 31) | (rm >> 1), (rm & 1) != 0};
                return {ror32(rm, amount), ((rm >> (amount - 1)) & 1) != 0};
        }
    }
    return {rm, carry_in};
}

Op2 eval_op2(const Instr& ins, const MachineState& st, std::uint32_t pc) {
    if (ins.imm_op2) {
        std::uint32_t v = ins.imm_value();
        bool carry = ins.rot == 0 ? st.flag_c : (v >> 31) != 0;
        return {v, carry};
    }
    return eval_shifted_reg(ins, st, pc, st.flag_c);
}

struct AddResult {
    std::uint32_t value;
    bool carry, overflow;
};

AddResult add_with_carry(std::uint32_t a, std::uint32_t b, bool carry_in) {
    std::uint64_t wide = static_cast<std::uint64_t>(a) + b + (carry_in ? 1 : 0);
    std::uint32_t r = static_cast<std::uint32_t>(wide);
    bool carry = wide > 0xFFFFFFFFull;
    bool overflow = (~(a ^ b) & (a ^ r) & 0x80000000u) != 0;
    return {r, carry, overflow};
}

}  // namespace

RunResult Emulator::run(const RunConfig& cfg, MachineState& state, AccessTrace* trace) const {
    Ctx ctx{state, trace, bin_.bytes, cfg.image_base};
    RunResult result;
    const std::uint64_t start_steps = state.step_count;

    state.pc() = cfg.image_base + cfg.entry;

    while (true) {
        const std::uint32_t pc = state.pc();
        if (pc == kReturnSentinel) {
            result.reason = HaltReason::Returned;
            break;
        }
        const std::uint32_t file_off = pc - cfg.image_base;
        const Instr* ins = fetch(file_off);
        if (!ins) {
            result.reason = HaltReason::LeftCode;
            result.detail = "pc " + hex(pc) + " outside code region";
            break;
        }
        if (cfg.halt_at.count(file_off)) {
            result.reason = HaltReason::Breakpoint;
            break;
        }
        if (state.step_count - start_steps >= cfg.step_budget) {
            result.reason = HaltReason::BudgetExhausted;
            break;
        }
        if (!ins->ok()) {
            result.reason = HaltReason::DecodeFault;
            result.detail = "undecodable word at " + hex(pc);
            break;
        }

        ++state.step_count;
        if (!cond_passed(ins->cond, state)) {
            state.pc() = pc + 4;
            continue;
        }

        std::uint32_t next_pc = pc + 4;
        bool fault = false;

        switch (ins->op) {
            case Op::Nop:
                break;
            case Op::And: case Op::Eor: case Op::Sub: case Op::Rsb:
            case Op::Add: case Op::Adc: case Op::Sbc: case Op::Rsc:
            case Op::Tst: case Op::Teq: case Op::Cmp: case Op::Cmn:
            case Op::Orr: case Op::Mov: case Op::Bic: case Op::Mvn: {
                Op2 op2 = eval_op2(*ins, state, pc);
                std::uint32_t a = reg_read(state, ins->rn, pc);
                std::uint32_t value = 0;
                bool carry = op2.carry, overflow = state.flag_v, write_rd = true;
                switch (ins->op) {
                    case Op::And: value = a & op2.value; break;
                    case Op::Eor: value = a ^ op2.value; break;
                    case Op::Orr: value = a | op2.value; break;
                    case Op::Bic: value = a & ~op2.value; break;
                    case Op::Mov: value = op2.value; break;
                    case Op::Mvn: value = ~op2.value; break;
                    case Op::Tst: value = a & op2.value; write_rd = false; break;
                    case Op::Teq: value = a ^ op2.value; write_rd = false; break;
                    case Op::Sub: case Op::Cmp: {
                        AddResult r = add_with_carry(a, ~op2.value, true);
                        value = r.value; carry = r.carry; overflow = r.overflow;
                        write_rd = ins->op == Op::Sub;
                        break;
                    }
                    case Op::Rsb: {
                        AddResult r = add_with_carry(op2.value, ~a, true);
                        value = r.value; carry = r.carry; overflow = r.overflow;
                        break;
                    }
                    case Op::Add: case Op::Cmn: {
                        AddResult r = add_with_carry(a, op2.value, false);
                        value = r.value; carry = r.carry; overflow = r.overflow;
                        write_rd = ins->op == Op::Add;
                        break;
                    }
                    case Op::Adc: {
                        AddResult r = add_with_carry(a, op2.value, state.flag_c);
                        value = r.value; carry = r.carry; overflow = r.overflow;
                        break;
                    }
                    case Op::Sbc: {
                        AddResult r = add_with_carry(a, ~op2.value, state.flag_c);
                        value = r.value; carry = r.carry; overflow = r.overflow;
                        break;
                    }
                    case Op::Rsc: {
                        AddResult r = add_with_carry(op2.value, ~a, state.flag_c);
                        value = r.value; carry = r.carry; overflow = r.overflow;
                        break;
                    }
                    default: break;
                }
                if (ins->sets_flags) {
                    if (write_rd && ins->rd == 15) {
                        // Flag-restoring return (movs pc, lr style) needs
                        // banked SPSR state we do not model.
                        result.reason = HaltReason::DecodeFault;
                        result.detail = "flag-setting write to pc at " + hex(pc);
                        fault = true;
                        break;
                    }
                    state.flag_n = (value >> 31) != 0;
                    state.flag_z = value == 0;
                    state.flag_c = carry;
                    state.flag_v = overflow;
                }
                if (write_rd) {
                    if (ins->rd == 15) {
                        std::uint32_t target = value & ~3u;
                        // Register-indirect call dispatch: a mov pc, rI whose
                        // target is not a subroutine entry is a stub for a
                        // dynamically linked callee; skip over it.
                        if (ins->op == Op::Mov && !ins->imm_op2 && !ins->shift_by_reg &&
                            ins->shift_amount == 0 && ins->rm != 15 && target != kReturnSentinel &&
                            !sub_starts_.count(target - cfg.image_base)) {
                            if (trace) trace->stubs.push_back({pc, target});
                            state.regs[0] = 0;
                            state.reg_prov[0] = kNoProvenance;
                            next_pc = state.lr();
                        } else {
                            next_pc = target;
                        }
                    } else {
                        state.regs[ins->rd] = value;
                        bool is_plain_mov_reg = ins->op == Op::Mov && !ins->imm_op2 &&
                                                !ins->shift_by_reg && ins->shift_amount == 0 &&
                                                ins->rm != 15;
                        state.reg_prov[ins->rd] =
                            is_plain_mov_reg ? state.reg_prov[ins->rm] : kNoProvenance;
                    }
                }
                break;
            }
            case Op::Ldr: case Op::Ldrb: case Op::Str: case Op::Strb: {
                std::uint32_t base = reg_read(state, ins->rn, pc);
                std::uint32_t offset;
                if (ins->mem_reg_offset) {
                    Op2 o = eval_shifted_reg(*ins, state, pc, state.flag_c);
                    offset = o.value;
                } else {
                    offset = ins->imm12;
                }
                std::uint32_t target = ins->add_offset ? base + offset : base - offset;
                std::uint32_t addr = ins->preindex ? target : base;
                unsigned width = (ins->op == Op::Ldrb || ins->op == Op::Strb) ? 1 : 4;

                if (ins->op == Op::Ldr || ins->op == Op::Ldrb) {
                    std::uint32_t prov;
                    std::uint32_t value = ctx.load(addr, width, pc, prov);
                    if (ins->rd == 15) {
                        next_pc = value & ~3u;
                    } else {
                        state.regs[ins->rd] = value;
                        state.reg_prov[ins->rd] = width == 4 ? prov : kNoProvenance;
                    }
                } else {
                    std::uint32_t value = reg_read(state, ins->rd, pc);
                    ctx.store(addr, width, value, pc,
                              width == 4 && ins->rd != 15 ? state.reg_prov[ins->rd] : kNoProvenance);
                }
                if (!ins->preindex || ins->writeback) {
                    if (ins->rn != 15 && !(ins->op == Op::Ldr && ins->rn == ins->rd) &&
                        !(ins->op == Op::Ldrb && ins->rn == ins->rd)) {
                        state.regs[ins->rn] = target;
                        state.reg_prov[ins->rn] = kNoProvenance;
                    }
                }
                break;
            }
            case Op::Ldm: case Op::Stm: {
                std::uint32_t base = state.regs[ins->rn];
                unsigned count = static_cast<unsigned>(std::popcount(ins->reglist));
                std::uint32_t lowest = ins->bt_increment
                                           ? (ins->bt_before ? base + 4 : base)
                                           : (ins->bt_before ? base - 4 * count : base - 4 * count + 4);
                std::uint32_t addr = lowest;
                bool loaded_pc = false;
                for (unsigned r = 0; r < 16; ++r) {
                    if (!(ins->reglist & (1u << r))) continue;
                    if (ins->op == Op::Ldm) {
                        std::uint32_t prov;
                        std::uint32_t value = ctx.load(addr, 4, pc, prov);
                        if (r == 15) {
                            next_pc = value & ~3u;
                            loaded_pc = true;
                        } else {
                            state.regs[r] = value;
                            state.reg_prov[r] = prov;
                        }
                    } else {
                        ctx.store(addr, 4, reg_read(state, r, pc), pc,
                                  r == 15 ? kNoProvenance : state.reg_prov[r]);
                    }
                    addr += 4;
                }
                if (ins->writeback) {
                    bool rn_loaded = ins->op == Op::Ldm && (ins->reglist & (1u << ins->rn));
                    if (!rn_loaded) {
                        state.regs[ins->rn] = ins->bt_increment ? base + 4 * count : base - 4 * count;
                        state.reg_prov[ins->rn] = kNoProvenance;
                    }
                }
                (void)loaded_pc;
                break;
            }
            case Op::B:
                next_pc = ins->branch_target();
                break;
            case Op::Bl:
                state.lr() = pc + 4;
                state.reg_prov[14] = kNoProvenance;
                next_pc = ins->branch_target();
                break;
            case Op::Mul: case Op::Mla: {
                std::uint32_t value = state.regs[ins->rm] * state.regs[ins->rs];
                if (ins->op == Op::Mla) value += state.regs[ins->rn];
                state.regs[ins->rd] = value;
                state.reg_prov[ins->rd] = kNoProvenance;
                if (ins->sets_flags) {
                    state.flag_n = (value >> 31) != 0;
                    state.flag_z = value == 0;
                    // C is left unchanged; V unaffected by multiplies.
                }
                break;
            }
            case Op::Mrs: {
                std::uint32_t psr = 0x10;  // user mode bits
                psr |= (state.flag_n ? 1u : 0u) << 31;
                psr |= (state.flag_z ? 1u : 0u) << 30;
                psr |= (state.flag_c ? 1u : 0u) << 29;
                psr |= (state.flag_v ? 1u : 0u) << 28;
                state.regs[ins->rd] = psr;
                state.reg_prov[ins->rd] = kNoProvenance;
                break;
            }
            case Op::Msr: {
                std::uint32_t value = ins->imm_op2 ? ins->imm_value() : state.regs[ins->rm];
                if (ins->psr_mask & 0x8) {
                    state.flag_n = (value >> 31) & 1;
                    state.flag_z = (value >> 30) & 1;
                    state.flag_c = (value >> 29) & 1;
                    state.flag_v = (value >> 28) & 1;
                }
                // Control/extension fields have no modeled effect.
                break;
            }
            case Op::Swi:
                result.reason = HaltReason::DecodeFault;
                result.detail = "swi has no modeled semantics at " + hex(pc);
                fault = true;
                break;
            case Op::Word:
                fault = true;  // unreachable; handled before execution
                break;
        }

        if (fault) break;
        state.pc() = next_pc;
    }

    result.steps = state.step_count - start_steps;
    result.halt_pc = state.pc();
    return result;
}

CallTable Emulator::recover_call_table(std::uint32_t image_base) const {
    CallTable table;
    if (bin_.subs.empty()) return table;
    const Subroutine& memory_init = bin_.subs.back();

    MachineState st = MachineState::zeroed();
    RunConfig cfg;
    cfg.entry = memory_init.start;
    cfg.image_base = image_base;
    AccessTrace trace;
    run(cfg, st, &trace);

    std::set<std::uint32_t> starts;
    for (const auto& s : bin_.subs) starts.insert(image_base + s.start);

    for (const auto& [addr, value] : st.mem.words) {
        if (starts.count(value)) table.slots.emplace(addr, value - image_base);
    }

    std::set<std::uint32_t> covered;
    for (const auto& [slot, target] : table.slots) covered.insert(target);
    for (const auto& s : bin_.subs) {
        if (s.role == SubRole::MemoryInit) continue;
        if (!covered.count(s.start)) table.missing.push_back(s.start);
    }
    return table;
}

MachineState Emulator::snapshot_globals(std::uint32_t image_base) const {
    if (bin_.subs.empty()) fail(Errc::RunFault, "no subroutines carved");
    const Subroutine& global_init = bin_.subs.front();
    MachineState st = MachineState::zeroed();
    RunConfig cfg;
    cfg.entry = global_init.start;
    cfg.image_base = image_base;
    RunResult r = run(cfg, st, nullptr);
    if (r.reason != HaltReason::Returned)
        fail(Errc::RunFault, std::string("Global INIT did not return: ") + halt_reason_name(r.reason) +
                                 (r.detail.empty() ? "" : " (" + r.detail + ")"));
    return st;
}

}  // namespace prgkit
