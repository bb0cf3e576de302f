#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prgkit/armdec.hpp"
#include "prgkit/bytes.hpp"

namespace prgkit {

// 80-byte PRG header. Only the five known fields are interpreted; the rest of
// the header rides along as opaque bytes.
struct PrgHeader {
    static constexpr std::size_t kSize = 80;

    std::uint32_t last_global_string_raw = 0;  // file offset 0x04
    std::uint32_t entry_point_raw = 0;         // file offset 0x20
    std::uint32_t last_subroutine_raw = 0;     // file offset 0x2C
    std::uint32_t stack_size = 0;              // file offset 0x30
    std::uint32_t last_dynlib_id_raw = 0;      // file offset 0x44
    std::array<std::uint8_t, kSize> raw{};

    std::uint32_t entry_point() const { return entry_point_raw + 0x18; }
    std::uint32_t last_subroutine_offset() const { return last_subroutine_raw + 0x18; }
};

enum class SubRole : std::uint8_t {
    GlobalInit,
    Support,
    SysDebug,
    LibMain,
    LibInit,
    UserFb,
    UserFbInit,
    PlcPrg,
    MemoryInit,
    Unknown,
};

const char* role_name(SubRole r);

struct Subroutine {
    std::uint32_t start = 0;     // offset of the first prologue word
    std::uint32_t end = 0;       // one past the epilogue word
    std::uint32_t pool_end = 0;  // one past the literal pool owned by this subroutine
    SubRole role = SubRole::Unknown;
    std::string name;
    std::vector<arm::Instr> instrs;  // decoded body, literal pool excluded

    std::uint32_t body_size() const { return end - start; }
    bool contains(std::uint32_t off) const { return off >= start && off < pool_end; }
};

struct SymbolEntry {
    std::string name;
    std::uint16_t index = 0;

    std::uint32_t jump_offset() const { return static_cast<std::uint32_t>(index) * 4 + 8; }
};

struct SectionMap {
    struct Range {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::uint32_t size() const { return end - begin; }
    };
    Range header;        // [0, 0x50)
    Range code;          // [0x50, end of Memory INIT incl. pool)
    Range symbol_table;  // [code.end, end of last symbol record)
    Range trailing;      // [symbol_table.end, file size)
};

struct PrgBinary {
    Bytes bytes;
    PrgHeader header;
    std::vector<Subroutine> subs;
    std::vector<SymbolEntry> symbols;
    SectionMap sections;
    std::vector<std::string> warnings;

    std::uint32_t code_end() const { return subs.empty() ? 0x50 : subs.back().pool_end; }
    const Subroutine* sub_starting_at(std::uint32_t off) const;
    int sub_index_containing(std::uint32_t off) const;  // -1 when outside all subs
};

// Canonical subroutine delimiter words (mov r12, sp / stmfd sp!, {r11, r12, lr}
// / mov r11, r12 and ldmdb r11, {r11, sp, pc}).
constexpr std::uint32_t kPrologue[3] = {0xE1A0C00D, 0xE92D5800, 0xE1A0B00C};
constexpr std::uint32_t kEpilogue = 0xE91BA800;
constexpr std::uint32_t kCodeStart = 0x50;

PrgHeader parse_header(const Bytes& bytes);

/// Carve subroutines by scanning for the prologue/epilogue byte patterns.
/// Bytes between an epilogue and the next prologue belong to the preceding
/// subroutine as its literal pool; the final subroutine's pool extends to the
/// farthest word referenced by its pc-relative loads.
std::vector<Subroutine> carve_subroutines(const Bytes& bytes, const PrgHeader& header,
                                          std::vector<std::string>* warnings = nullptr);

/// Read (name, u16) records starting at the first printable byte at/after
/// code_end. Stops at the first empty or non-printable name. table_end
/// receives one past the last consumed record.
std::vector<SymbolEntry> parse_symbol_table(const Bytes& bytes, std::uint32_t code_end,
                                            std::uint32_t* table_end = nullptr,
                                            std::vector<std::string>* warnings = nullptr);

SectionMap build_section_map(const Bytes& bytes, const PrgHeader& header,
                             const std::vector<Subroutine>& subs, std::uint32_t symtab_end);

/// Decode the body words of a carved subroutine, resolving pc-relative
/// literals against the file image. Undecodable words stay inline as .word.
std::vector<arm::Instr> decode_all(const Bytes& bytes, const Subroutine& sub);

/// Full dissection pipeline: header, carve, decode, symbols, section map.
PrgBinary parse_prg(Bytes bytes);

/// Concatenate the carved pieces back in section order. Equals the input
/// byte-for-byte for any successfully parsed binary.
Bytes reserialize(const PrgBinary& bin);

}  // namespace prgkit
