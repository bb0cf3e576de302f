#include "prgkit/armdec.hpp"

#include <array>
#include <bit>
#include <sstream>

#include "prgkit/error.hpp"

namespace prgkit::arm {

namespace {

constexpr std::uint32_t kNopWord = 0xE1A00000u;

inline std::uint32_t ror32(std::uint32_t v, unsigned n) {
    n &= 31;
    return n == 0 ? v : (v >> n) | (v << (32 - n));
}

const char* kRegNames[16] = {
    "r0", "r1", "r2", "r3", "r4", "r5", "r6", "r7",
    "r8", "r9", "r10", "r11", "r12", "sp", "lr", "pc",
};

const char* kDpNames[16] = {
    "and", "eor", "sub", "rsb", "add", "adc", "sbc", "rsc",
    "tst", "teq", "cmp", "cmn", "orr", "mov", "bic", "mvn",
};

const char* kShiftNames[4] = {"lsl", "lsr", "asr", "ror"};

std::string imm_text(std::int64_t v) {
    std::ostringstream os;
    os << '#';
    if (v < 0) {
        os << '-';
        v = -v;
    }
    if (v < 10)
        os << v;
    else
        os << "0x" << std::hex << v;
    return os.str();
}

std::string reglist_text(std::uint16_t list) {
    std::string out = "{";
    bool first = true;
    for (int i = 0; i < 16; ++i) {
        if (!(list & (1u << i))) continue;
        if (!first) out += ", ";
        out += kRegNames[i];
        first = false;
    }
    out += "}";
    return out;
}

std::string psr_text(bool spsr, std::uint8_t mask) {
    std::string s = spsr ? "spsr" : "cpsr";
    if (mask) {
        s += '_';
        if (mask & 0x8) s += 'f';
        if (mask & 0x4) s += 's';
        if (mask & 0x2) s += 'x';
        if (mask & 0x1) s += 'c';
    }
    return s;
}

bool is_dp(Op op) { return static_cast<unsigned>(op) <= static_cast<unsigned>(Op::Mvn); }
bool dp_is_compare(Op op) { return op == Op::Tst || op == Op::Teq || op == Op::Cmp || op == Op::Cmn; }
bool dp_is_move(Op op) { return op == Op::Mov || op == Op::Mvn; }

Instr data_word(std::uint32_t raw, std::uint32_t addr, DecodeFail why) {
    Instr ins;
    ins.addr = addr;
    ins.raw = raw;
    ins.op = Op::Word;
    ins.fail = why;
    return ins;
}

void decode_shifted_reg(Instr& ins, std::uint32_t raw) {
    ins.rm = raw & 0xF;
    ins.shift = static_cast<ShiftKind>((raw >> 5) & 3);
    ins.shift_by_reg = (raw >> 4) & 1;
    if (ins.shift_by_reg) {
        ins.rs = (raw >> 8) & 0xF;
        ins.shift_amount = 0;
    } else {
        ins.shift_amount = (raw >> 7) & 0x1F;
    }
}

std::uint32_t encode_shifted_reg(const Instr& ins) {
    std::uint32_t w = ins.rm & 0xF;
    w |= static_cast<std::uint32_t>(ins.shift) << 5;
    if (ins.shift_by_reg) {
        w |= 1u << 4;
        w |= static_cast<std::uint32_t>(ins.rs & 0xF) << 8;
    } else {
        w |= static_cast<std::uint32_t>(ins.shift_amount & 0x1F) << 7;
    }
    return w;
}

// Shift operand text shared by data processing and register-offset loads.
// Returns "" for lsl #0 (no shift).
std::string shift_text(const Instr& ins) {
    if (ins.shift_by_reg) {
        return std::string(kShiftNames[static_cast<int>(ins.shift)]) + " " + kRegNames[ins.rs];
    }
    unsigned amount = ins.shift_amount;
    switch (ins.shift) {
        case ShiftKind::Lsl:
            if (amount == 0) return "";
            break;
        case ShiftKind::Lsr:
        case ShiftKind::Asr:
            if (amount == 0) amount = 32;
            break;
        case ShiftKind::Ror:
            if (amount == 0) return "rrx";
            break;
    }
    return std::string(kShiftNames[static_cast<int>(ins.shift)]) + " " + imm_text(amount);
}

}  // namespace

std::uint32_t Instr::imm_value() const { return ror32(imm8, 2u * rot); }

const char* cond_name(Cond c) {
    static const char* names[15] = {"eq", "ne", "cs", "cc", "mi", "pl", "vs",
                                    "vc", "hi", "ls", "ge", "lt", "gt", "le", ""};
    return names[static_cast<int>(c)];
}

Instr decode(std::uint32_t raw, std::uint32_t addr) {
    if (raw == kNopWord) {
        Instr ins;
        ins.addr = addr;
        ins.raw = raw;
        ins.op = Op::Nop;
        return ins;
    }

    std::uint32_t cond_bits = raw >> 28;
    if (cond_bits == 0xF) return data_word(raw, addr, DecodeFail::UnsupportedClass);

    Instr ins;
    ins.addr = addr;
    ins.raw = raw;
    ins.cond = static_cast<Cond>(cond_bits);

    const std::uint32_t cls = (raw >> 25) & 7;
    switch (cls) {
        case 0b000: {
            const bool bit4 = (raw >> 4) & 1;
            const bool bit7 = (raw >> 7) & 1;
            if (bit4 && bit7) {
                // Multiply space when bits 7:4 == 1001, otherwise halfword /
                // doubleword / swap extensions which we keep as data.
                if (((raw >> 4) & 0xF) == 0b1001) {
                    const std::uint32_t mul_op = (raw >> 21) & 7;
                    if ((raw & (1u << 24)) == 0 && (mul_op == 0 || mul_op == 1)) {
                        ins.op = mul_op ? Op::Mla : Op::Mul;
                        ins.sets_flags = (raw >> 20) & 1;
                        ins.rd = (raw >> 16) & 0xF;
                        ins.rn = (raw >> 12) & 0xF;  // accumulator (mla only)
                        ins.rs = (raw >> 8) & 0xF;
                        ins.rm = raw & 0xF;
                        if (ins.op == Op::Mul && ins.rn != 0)
                            return data_word(raw, addr, DecodeFail::UndefinedEncoding);
                        return ins;
                    }
                }
                return data_word(raw, addr, DecodeFail::UnsupportedClass);
            }
            const std::uint32_t opcode = (raw >> 21) & 0xF;
            const bool s = (raw >> 20) & 1;
            if (!s && opcode >= 8 && opcode <= 11) {
                // Miscellaneous space: mrs/msr supported, bx/clz/bkpt/... kept
                // as data.
                if ((raw & 0x0FBF0FFF) == 0x010F0000) {
                    ins.op = Op::Mrs;
                    ins.spsr = (raw >> 22) & 1;
                    ins.rd = (raw >> 12) & 0xF;
                    return ins;
                }
                if ((raw & 0x0FB0FFF0) == 0x0120F000) {
                    ins.op = Op::Msr;
                    ins.spsr = (raw >> 22) & 1;
                    ins.psr_mask = (raw >> 16) & 0xF;
                    ins.rm = raw & 0xF;
                    return ins;
                }
                return data_word(raw, addr, DecodeFail::UnsupportedClass);
            }
            ins.op = static_cast<Op>(opcode);
            ins.sets_flags = s;
            ins.rn = (raw >> 16) & 0xF;
            ins.rd = (raw >> 12) & 0xF;
            decode_shifted_reg(ins, raw);
            return ins;
        }
        case 0b001: {
            const std::uint32_t opcode = (raw >> 21) & 0xF;
            const bool s = (raw >> 20) & 1;
            if (!s && opcode >= 8 && opcode <= 11) {
                if ((raw & 0x0FB0F000) == 0x0320F000) {
                    ins.op = Op::Msr;
                    ins.spsr = (raw >> 22) & 1;
                    ins.psr_mask = (raw >> 16) & 0xF;
                    ins.imm_op2 = true;
                    ins.imm8 = raw & 0xFF;
                    ins.rot = (raw >> 8) & 0xF;
                    return ins;
                }
                return data_word(raw, addr, DecodeFail::UndefinedEncoding);
            }
            ins.op = static_cast<Op>(opcode);
            ins.sets_flags = s;
            ins.rn = (raw >> 16) & 0xF;
            ins.rd = (raw >> 12) & 0xF;
            ins.imm_op2 = true;
            ins.imm8 = raw & 0xFF;
            ins.rot = (raw >> 8) & 0xF;
            return ins;
        }
        case 0b010:
        case 0b011: {
            if (cls == 0b011 && ((raw >> 4) & 1))
                return data_word(raw, addr, DecodeFail::UnsupportedClass);  // media space
            const bool pre = (raw >> 24) & 1;
            const bool wb = (raw >> 21) & 1;
            if (!pre && wb)
                return data_word(raw, addr, DecodeFail::UnsupportedClass);  // ldrt/strt family
            const bool load = (raw >> 20) & 1;
            const bool byte = (raw >> 22) & 1;
            ins.op = load ? (byte ? Op::Ldrb : Op::Ldr) : (byte ? Op::Strb : Op::Str);
            ins.rn = (raw >> 16) & 0xF;
            ins.rd = (raw >> 12) & 0xF;
            ins.preindex = pre;
            ins.writeback = wb;
            ins.add_offset = (raw >> 23) & 1;
            if (cls == 0b011) {
                ins.mem_reg_offset = true;
                decode_shifted_reg(ins, raw);
            } else {
                ins.imm12 = raw & 0xFFF;
            }
            if (ins.is_pc_relative_load()) {
                std::int32_t off = ins.add_offset ? ins.imm12 : -static_cast<std::int32_t>(ins.imm12);
                ins.literal_addr = addr + 8 + static_cast<std::uint32_t>(off);
            }
            return ins;
        }
        case 0b100: {
            if ((raw >> 22) & 1)
                return data_word(raw, addr, DecodeFail::UnsupportedClass);  // user-bank forms
            ins.op = ((raw >> 20) & 1) ? Op::Ldm : Op::Stm;
            ins.rn = (raw >> 16) & 0xF;
            ins.reglist = raw & 0xFFFF;
            ins.bt_before = (raw >> 24) & 1;
            ins.bt_increment = (raw >> 23) & 1;
            ins.writeback = (raw >> 21) & 1;
            return ins;
        }
        case 0b101: {
            ins.op = ((raw >> 24) & 1) ? Op::Bl : Op::B;
            std::int32_t imm = static_cast<std::int32_t>(raw << 8) >> 8;  // sign-extend imm24
            ins.branch_offset = imm * 4;
            return ins;
        }
        default:
            if (((raw >> 24) & 0xF) == 0xF) {
                ins.op = Op::Swi;
                ins.imm24 = raw & 0x00FFFFFF;
                return ins;
            }
            return data_word(raw, addr, DecodeFail::UnsupportedClass);
    }
}

std::uint32_t encode(const Instr& ins) {
    if (ins.op == Op::Word) fail(Errc::Unencodable, "data word has no instruction encoding");
    if (ins.op == Op::Nop) return kNopWord;

    std::uint32_t w = static_cast<std::uint32_t>(ins.cond) << 28;
    auto dp_op2 = [&](const Instr& i) {
        if (i.imm_op2) {
            w |= 1u << 25;
            w |= static_cast<std::uint32_t>(i.rot & 0xF) << 8;
            w |= i.imm8;
        } else {
            w |= encode_shifted_reg(i);
        }
    };

    if (is_dp(ins.op)) {
        w |= static_cast<std::uint32_t>(ins.op) << 21;
        if (ins.sets_flags) w |= 1u << 20;
        w |= static_cast<std::uint32_t>(ins.rn & 0xF) << 16;
        w |= static_cast<std::uint32_t>(ins.rd & 0xF) << 12;
        dp_op2(ins);
        return w;
    }

    switch (ins.op) {
        case Op::Ldr:
        case Op::Str:
        case Op::Ldrb:
        case Op::Strb: {
            w |= 1u << 26;
            if (ins.mem_reg_offset) {
                w |= 1u << 25;
                if (ins.shift_by_reg) fail(Errc::Unencodable, "register-shifted memory offset");
                w |= encode_shifted_reg(ins);
            } else {
                if (ins.imm12 > 0xFFF) fail(Errc::Unencodable, "imm12 out of range");
                w |= ins.imm12;
            }
            if (ins.preindex) w |= 1u << 24;
            if (ins.add_offset) w |= 1u << 23;
            if (ins.op == Op::Ldrb || ins.op == Op::Strb) w |= 1u << 22;
            if (ins.writeback) w |= 1u << 21;
            if (ins.op == Op::Ldr || ins.op == Op::Ldrb) w |= 1u << 20;
            w |= static_cast<std::uint32_t>(ins.rn & 0xF) << 16;
            w |= static_cast<std::uint32_t>(ins.rd & 0xF) << 12;
            return w;
        }
        case Op::Ldm:
        case Op::Stm: {
            w |= 1u << 27;
            if (ins.bt_before) w |= 1u << 24;
            if (ins.bt_increment) w |= 1u << 23;
            if (ins.writeback) w |= 1u << 21;
            if (ins.op == Op::Ldm) w |= 1u << 20;
            w |= static_cast<std::uint32_t>(ins.rn & 0xF) << 16;
            w |= ins.reglist;
            return w;
        }
        case Op::B:
        case Op::Bl: {
            if (ins.branch_offset % 4 != 0) fail(Errc::Unencodable, "branch offset not word aligned");
            std::int32_t words = ins.branch_offset / 4;
            if (words < -(1 << 23) || words >= (1 << 23)) fail(Errc::Unencodable, "branch offset out of range");
            w |= 0b101u << 25;
            if (ins.op == Op::Bl) w |= 1u << 24;
            w |= static_cast<std::uint32_t>(words) & 0x00FFFFFF;
            return w;
        }
        case Op::Mul:
        case Op::Mla: {
            if (ins.op == Op::Mla) w |= 1u << 21;
            if (ins.sets_flags) w |= 1u << 20;
            w |= static_cast<std::uint32_t>(ins.rd & 0xF) << 16;
            w |= static_cast<std::uint32_t>(ins.rn & 0xF) << 12;
            w |= static_cast<std::uint32_t>(ins.rs & 0xF) << 8;
            w |= 0b1001u << 4;
            w |= ins.rm & 0xF;
            return w;
        }
        case Op::Mrs: {
            w |= 0x010F0000u;
            if (ins.spsr) w |= 1u << 22;
            w |= static_cast<std::uint32_t>(ins.rd & 0xF) << 12;
            return w;
        }
        case Op::Msr: {
            if (ins.imm_op2) {
                w |= 0x0320F000u;
                w |= static_cast<std::uint32_t>(ins.rot & 0xF) << 8;
                w |= ins.imm8;
            } else {
                w |= 0x0120F000u;
                w |= ins.rm & 0xF;
            }
            if (ins.spsr) w |= 1u << 22;
            w |= static_cast<std::uint32_t>(ins.psr_mask & 0xF) << 16;
            return w;
        }
        case Op::Swi:
            w |= 0x0F000000u;
            w |= ins.imm24 & 0x00FFFFFF;
            return w;
        default:
            fail(Errc::Unencodable, "unhandled op");
    }
}

bool encode_dp_imm(std::uint32_t value, std::uint8_t& imm8, std::uint8_t& rot) {
    for (unsigned r = 0; r < 16; ++r) {
        std::uint32_t rotated = ror32(value, 32 - 2 * r);  // undo: value == ror(imm8, 2r)
        if (r == 0) rotated = value;
        if (rotated <= 0xFF) {
            imm8 = static_cast<std::uint8_t>(rotated);
            rot = static_cast<std::uint8_t>(r);
            return true;
        }
    }
    return false;
}

std::string Instr::mnemonic() const {
    if (op == Op::Word) return ".word";
    if (op == Op::Nop) return "nop";

    std::string base;
    switch (op) {
        case Op::Ldr: base = "ldr"; break;
        case Op::Str: base = "str"; break;
        case Op::Ldrb: base = "ldrb"; break;
        case Op::Strb: base = "strb"; break;
        case Op::Ldm:
        case Op::Stm: {
            const bool load = op == Op::Ldm;
            // Stack convention alias for the frame push/pop on sp; everything
            // else uses the addressing-mode spelling.
            if (rn == 13 && writeback && load == bt_increment && load != bt_before) {
                base = load ? "ldmfd" : "stmfd";
            } else {
                base = load ? "ldm" : "stm";
                base += bt_increment ? (bt_before ? "ib" : "ia") : (bt_before ? "db" : "da");
            }
            break;
        }
        case Op::B: base = "b"; break;
        case Op::Bl: base = "bl"; break;
        case Op::Mul: base = "mul"; break;
        case Op::Mla: base = "mla"; break;
        case Op::Mrs: base = "mrs"; break;
        case Op::Msr: base = "msr"; break;
        case Op::Swi: base = "swi"; break;
        default: base = kDpNames[static_cast<int>(op)]; break;
    }
    if (sets_flags && !dp_is_compare(op)) base += 's';
    base += cond_name(cond);
    return base;
}

std::string Instr::text() const {
    if (op == Op::Word) {
        std::ostringstream os;
        os << ".word 0x" << std::hex << raw;
        return os.str();
    }
    if (op == Op::Nop) return "nop";

    std::string m = mnemonic();
    std::string ops;

    auto dp_op2_text = [&]() -> std::string {
        if (imm_op2) return imm_text(imm_value());
        std::string t = kRegNames[rm];
        std::string sh = shift_text(*this);
        if (!sh.empty()) t += ", " + sh;
        return t;
    };

    if (is_dp(op)) {
        if (dp_is_compare(op))
            ops = std::string(kRegNames[rn]) + ", " + dp_op2_text();
        else if (dp_is_move(op))
            ops = std::string(kRegNames[rd]) + ", " + dp_op2_text();
        else
            ops = std::string(kRegNames[rd]) + ", " + kRegNames[rn] + ", " + dp_op2_text();
    } else {
        switch (op) {
            case Op::Ldr:
            case Op::Str:
            case Op::Ldrb:
            case Op::Strb: {
                std::string addr_text;
                if (mem_reg_offset) {
                    std::string off = std::string(add_offset ? "" : "-") + kRegNames[rm];
                    std::string sh = shift_text(*this);
                    if (!sh.empty()) off += ", " + sh;
                    addr_text = preindex
                                    ? "[" + std::string(kRegNames[rn]) + ", " + off + "]" + (writeback ? "!" : "")
                                    : "[" + std::string(kRegNames[rn]) + "], " + off;
                } else {
                    std::int64_t off = add_offset ? imm12 : -static_cast<std::int64_t>(imm12);
                    if (preindex) {
                        addr_text = "[" + std::string(kRegNames[rn]);
                        if (imm12 != 0 || !add_offset) addr_text += ", " + imm_text(off);
                        addr_text += "]";
                        if (writeback) addr_text += "!";
                    } else {
                        addr_text = "[" + std::string(kRegNames[rn]) + "], " + imm_text(off);
                    }
                }
                ops = std::string(kRegNames[rd]) + ", " + addr_text;
                break;
            }
            case Op::Ldm:
            case Op::Stm:
                ops = std::string(kRegNames[rn]) + (writeback ? "!" : "") + ", " + reglist_text(reglist);
                break;
            case Op::B:
            case Op::Bl: {
                std::ostringstream os;
                os << "0x" << std::hex << branch_target();
                ops = os.str();
                break;
            }
            case Op::Mul:
                ops = std::string(kRegNames[rd]) + ", " + kRegNames[rm] + ", " + kRegNames[rs];
                break;
            case Op::Mla:
                ops = std::string(kRegNames[rd]) + ", " + kRegNames[rm] + ", " + kRegNames[rs] + ", " +
                      kRegNames[rn];
                break;
            case Op::Mrs:
                ops = std::string(kRegNames[rd]) + ", " + (spsr ? "spsr" : "cpsr");
                break;
            case Op::Msr:
                ops = psr_text(spsr, psr_mask) + ", " +
                      (imm_op2 ? imm_text(imm_value()) : std::string(kRegNames[rm]));
                break;
            case Op::Swi:
                ops = imm_text(imm24);
                break;
            default:
                break;
        }
    }
    return ops.empty() ? m : m + " " + ops;
}

std::string listing_line(const Instr& ins) {
    std::ostringstream os;
    os << std::hex;
    for (int shift = 28; shift >= 0; shift -= 4) os << "0123456789abcdef"[(ins.addr >> shift) & 0xF];
    os << ": ";
    for (int shift = 28; shift >= 0; shift -= 4) os << "0123456789abcdef"[(ins.raw >> shift) & 0xF];
    os << "  " << ins.text();
    return os.str();
}

namespace build {

namespace {
Instr base_instr(Op op, Cond c) {
    Instr ins;
    ins.op = op;
    ins.cond = c;
    return ins;
}

Instr mem_imm(Op op, std::uint8_t rd, std::uint8_t rn, std::int32_t offset, bool pre, bool wb) {
    Instr ins = base_instr(op, Cond::AL);
    ins.rd = rd;
    ins.rn = rn;
    ins.preindex = pre;
    ins.writeback = wb;
    ins.add_offset = offset >= 0;
    std::uint32_t mag = offset >= 0 ? static_cast<std::uint32_t>(offset) : static_cast<std::uint32_t>(-offset);
    if (mag > 0xFFF) fail(Errc::Unencodable, "memory offset out of range");
    ins.imm12 = static_cast<std::uint16_t>(mag);
    ins.raw = encode(ins);
    return ins;
}
}  // namespace

Instr mov_reg(std::uint8_t rd, std::uint8_t rm, Cond c) {
    Instr ins = base_instr(Op::Mov, c);
    ins.rd = rd;
    ins.rm = rm;
    ins.raw = encode(ins);
    if (ins.raw == kNopWord) ins.op = Op::Nop;
    return ins;
}

Instr mov_imm(std::uint8_t rd, std::uint32_t value, Cond c) {
    Instr ins = base_instr(Op::Mov, c);
    ins.rd = rd;
    ins.imm_op2 = true;
    if (!encode_dp_imm(value, ins.imm8, ins.rot)) fail(Errc::Unencodable, "mov immediate not encodable");
    ins.raw = encode(ins);
    return ins;
}

Instr dp_reg(Op op, std::uint8_t rd, std::uint8_t rn, std::uint8_t rm, Cond c, bool s) {
    Instr ins = base_instr(op, c);
    ins.rd = rd;
    ins.rn = rn;
    ins.rm = rm;
    ins.sets_flags = s || dp_is_compare(op);
    ins.raw = encode(ins);
    return ins;
}

Instr dp_imm(Op op, std::uint8_t rd, std::uint8_t rn, std::uint32_t value, Cond c, bool s) {
    Instr ins = base_instr(op, c);
    ins.rd = rd;
    ins.rn = rn;
    ins.imm_op2 = true;
    ins.sets_flags = s || dp_is_compare(op);
    if (!encode_dp_imm(value, ins.imm8, ins.rot)) fail(Errc::Unencodable, "immediate not encodable");
    ins.raw = encode(ins);
    return ins;
}

Instr cmp_reg(std::uint8_t rn, std::uint8_t rm, Cond c) { return dp_reg(Op::Cmp, 0, rn, rm, c, true); }

Instr nop() {
    Instr ins = base_instr(Op::Nop, Cond::AL);
    ins.raw = kNopWord;
    return ins;
}

Instr ldr_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset, bool pre, bool wb) {
    return mem_imm(Op::Ldr, rd, rn, offset, pre, wb);
}

Instr str_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset, bool pre, bool wb) {
    return mem_imm(Op::Str, rd, rn, offset, pre, wb);
}

Instr ldrb_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset) {
    return mem_imm(Op::Ldrb, rd, rn, offset, true, false);
}

Instr strb_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset) {
    return mem_imm(Op::Strb, rd, rn, offset, true, false);
}

Instr ldr_pcrel(std::uint8_t rd, std::int32_t offset) {
    Instr ins = mem_imm(Op::Ldr, rd, 15, offset, true, false);
    return ins;
}

Instr ldm(std::uint8_t rn, std::uint16_t reglist, bool before, bool increment, bool wb) {
    Instr ins = base_instr(Op::Ldm, Cond::AL);
    ins.rn = rn;
    ins.reglist = reglist;
    ins.bt_before = before;
    ins.bt_increment = increment;
    ins.writeback = wb;
    ins.raw = encode(ins);
    return ins;
}

Instr stm(std::uint8_t rn, std::uint16_t reglist, bool before, bool increment, bool wb) {
    Instr ins = base_instr(Op::Stm, Cond::AL);
    ins.rn = rn;
    ins.reglist = reglist;
    ins.bt_before = before;
    ins.bt_increment = increment;
    ins.writeback = wb;
    ins.raw = encode(ins);
    return ins;
}

Instr b(std::int32_t branch_bytes, Cond c) {
    Instr ins = base_instr(Op::B, c);
    ins.branch_offset = branch_bytes;
    ins.raw = encode(ins);
    return ins;
}

Instr bl(std::int32_t branch_bytes, Cond c) {
    Instr ins = base_instr(Op::Bl, c);
    ins.branch_offset = branch_bytes;
    ins.raw = encode(ins);
    return ins;
}

}  // namespace build

}  // namespace prgkit::arm
