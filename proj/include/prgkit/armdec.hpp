#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prgkit::arm {

// Condition field values (bits 31:28). 0b1111 is the unconditional space and
// is not a condition; words with it decode as data.
enum class Cond : std::uint8_t {
    EQ = 0, NE, CS, CC, MI, PL, VS, VC, HI, LS, GE, LT, GT, LE, AL
};

enum class Op : std::uint8_t {
    // Data processing, in encoding order (opcode field 0..15).
    And, Eor, Sub, Rsb, Add, Adc, Sbc, Rsc, Tst, Teq, Cmp, Cmn, Orr, Mov, Bic, Mvn,
    // Single word/byte transfer.
    Ldr, Str, Ldrb, Strb,
    // Block transfer.
    Ldm, Stm,
    // Branches.
    B, Bl,
    // Multiply.
    Mul, Mla,
    // Status register access.
    Mrs, Msr,
    Swi,
    Nop,   // the canonical mov r0, r0 filler (0xE1A00000)
    Word,  // not a decodable instruction; kept as a data word
};

enum class ShiftKind : std::uint8_t { Lsl, Lsr, Asr, Ror };

enum class DecodeFail : std::uint8_t { None, UnsupportedClass, UndefinedEncoding };

// One decoded A32 word. Field groups overlap by instruction class; the raw
// encoding fields are preserved exactly so encode() round-trips bit-for-bit.
struct Instr {
    std::uint32_t addr = 0;
    std::uint32_t raw = 0;
    Op op = Op::Word;
    Cond cond = Cond::AL;
    bool sets_flags = false;

    // Data processing / single transfer registers.
    std::uint8_t rd = 0;  // destination (or transfer register for ldr/str)
    std::uint8_t rn = 0;  // first operand / base register
    std::uint8_t rm = 0;
    std::uint8_t rs = 0;

    // Operand 2.
    bool imm_op2 = false;
    std::uint8_t imm8 = 0;
    std::uint8_t rot = 0;  // rotation field as encoded (value = ror(imm8, 2*rot))
    ShiftKind shift = ShiftKind::Lsl;
    bool shift_by_reg = false;
    std::uint8_t shift_amount = 0;  // raw 5-bit field; lsr/asr 0 mean #32, ror 0 means rrx

    // Single transfer addressing.
    bool mem_reg_offset = false;
    std::uint16_t imm12 = 0;
    bool add_offset = true;
    bool preindex = true;
    bool writeback = false;

    // Block transfer.
    std::uint16_t reglist = 0;
    bool bt_before = false;
    bool bt_increment = true;

    // Branch: signed byte offset relative to addr + 8.
    std::int32_t branch_offset = 0;

    // Status register transfer.
    bool spsr = false;
    std::uint8_t psr_mask = 0;  // bit0=c, bit1=x, bit2=s, bit3=f

    std::uint32_t imm24 = 0;  // swi comment field

    // PC-relative literal attachment (filled by decode for pc-based loads and
    // refined by decode_all once the pool contents are known).
    bool literal_resolved = false;
    std::uint32_t literal_addr = 0;
    std::uint32_t literal_value = 0;

    DecodeFail fail = DecodeFail::None;

    bool ok() const { return op != Op::Word; }
    bool is_branch() const { return op == Op::B || op == Op::Bl; }
    std::uint32_t branch_target() const { return addr + 8 + static_cast<std::uint32_t>(branch_offset); }
    std::uint32_t imm_value() const;

    bool is_pc_relative_load() const { return (op == Op::Ldr || op == Op::Ldrb) && !mem_reg_offset && rn == 15; }

    /// Mnemonic with byte/S/condition suffixes, e.g. "ldrbne", "addseq", "stmfd".
    std::string mnemonic() const;
    /// Full canonical listing text: mnemonic + operands.
    std::string text() const;
};

const char* cond_name(Cond c);

/// Decode one word. Unsupported or undefined encodings come back with
/// op == Op::Word and a fail reason; they are never dropped.
Instr decode(std::uint32_t raw, std::uint32_t addr);

/// Re-encode a decoded instruction. Throws Errc::Unencodable for Op::Word or
/// operands that do not fit the encoding.
std::uint32_t encode(const Instr& ins);

/// Find (imm8, rot) so that ror(imm8, 2*rot) == value. Returns false if the
/// value has no data-processing immediate encoding.
bool encode_dp_imm(std::uint32_t value, std::uint8_t& imm8, std::uint8_t& rot);

/// One listing line: "<addr>: <word>  <text>".
std::string listing_line(const Instr& ins);

// Builders used by the binary generator and by tests. All default to AL.
namespace build {

Instr mov_reg(std::uint8_t rd, std::uint8_t rm, Cond c = Cond::AL);
Instr mov_imm(std::uint8_t rd, std::uint32_t value, Cond c = Cond::AL);  // throws if unencodable
Instr dp_reg(Op op, std::uint8_t rd, std::uint8_t rn, std::uint8_t rm, Cond c = Cond::AL, bool s = false);
Instr dp_imm(Op op, std::uint8_t rd, std::uint8_t rn, std::uint32_t value, Cond c = Cond::AL, bool s = false);
Instr cmp_reg(std::uint8_t rn, std::uint8_t rm, Cond c = Cond::AL);
Instr nop();

// offset is signed; pre/post and writeback per flags.
Instr ldr_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset, bool pre = true, bool wb = false);
Instr str_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset, bool pre = true, bool wb = false);
Instr ldrb_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset);
Instr strb_imm(std::uint8_t rd, std::uint8_t rn, std::int32_t offset);

// PC-relative load; byte offset relative to the load address + 8.
Instr ldr_pcrel(std::uint8_t rd, std::int32_t offset);

Instr ldm(std::uint8_t rn, std::uint16_t reglist, bool before, bool increment, bool wb);
Instr stm(std::uint8_t rn, std::uint16_t reglist, bool before, bool increment, bool wb);

// branch_bytes is relative to the branch address + 8 and must be word aligned.
Instr b(std::int32_t branch_bytes, Cond c = Cond::AL);
Instr bl(std::int32_t branch_bytes, Cond c = Cond::AL);

}  // namespace build

}  // namespace prgkit::arm
