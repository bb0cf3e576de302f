#include "prgkit/binfmt.hpp"

#include <algorithm>
#include <sstream>

#include "prgkit/error.hpp"

namespace prgkit {

namespace {

bool printable(std::uint8_t c) { return c >= 0x20 && c <= 0x7E; }

// LDR <rd>, [pc, #±imm] detected on raw bits so carving stays independent of
// the decoder proper (byte-pattern charter of this module).
bool is_pcrel_load(std::uint32_t w) {
    if ((w >> 28) == 0xF) return false;
    return (w & 0x0F3F0000u) == 0x051F0000u;
}

std::string sub_default_name(std::uint32_t start) {
    std::ostringstream os;
    os << "sub_" << std::hex << start;
    return os.str();
}

void assign_roles(std::vector<Subroutine>& subs) {
    const std::size_t n = subs.size();
    for (auto& s : subs) {
        s.role = SubRole::Unknown;
        s.name = sub_default_name(s.start);
    }
    if (n == 0) return;
    subs.front().role = SubRole::GlobalInit;
    subs.front().name = "Global_INIT";
    subs.back().role = SubRole::MemoryInit;
    subs.back().name = "Memory_INIT";
    if (n < 7) return;
    for (std::size_t i = 1; i <= 3; ++i) {
        subs[i].role = SubRole::Support;
        subs[i].name = "Sub_" + std::to_string(i);
    }
    subs[4].role = SubRole::SysDebug;
    subs[4].name = "SYSDEBUG";
    subs[n - 2].role = SubRole::PlcPrg;
    subs[n - 2].name = "PLC_PRG";
    // Main/INIT pairs between SYSDEBUG and PLC_PRG. Whether a pair is a
    // statically linked library or user code is only decidable via the
    // fingerprint database, so carving labels them as user FBs.
    for (std::size_t i = 5; i + 2 < n; ++i) {
        subs[i].role = ((i - 5) % 2 == 0) ? SubRole::UserFb : SubRole::UserFbInit;
    }
}

}  // namespace

const char* role_name(SubRole r) {
    switch (r) {
        case SubRole::GlobalInit: return "global_init";
        case SubRole::Support: return "support";
        case SubRole::SysDebug: return "sysdebug";
        case SubRole::LibMain: return "lib_main";
        case SubRole::LibInit: return "lib_init";
        case SubRole::UserFb: return "user_fb";
        case SubRole::UserFbInit: return "user_fb_init";
        case SubRole::PlcPrg: return "plc_prg";
        case SubRole::MemoryInit: return "memory_init";
        case SubRole::Unknown: return "unknown";
    }
    return "unknown";
}

const Subroutine* PrgBinary::sub_starting_at(std::uint32_t off) const {
    for (const auto& s : subs)
        if (s.start == off) return &s;
    return nullptr;
}

int PrgBinary::sub_index_containing(std::uint32_t off) const {
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i].contains(off)) return static_cast<int>(i);
    return -1;
}

PrgHeader parse_header(const Bytes& bytes) {
    if (bytes.size() < PrgHeader::kSize)
        fail(Errc::TooShort, "file is " + std::to_string(bytes.size()) + " bytes, header needs 80");

    PrgHeader h;
    std::copy_n(bytes.begin(), PrgHeader::kSize, h.raw.begin());
    h.last_global_string_raw = rd_u32(bytes, 0x04);
    h.entry_point_raw = rd_u32(bytes, 0x20);
    h.last_subroutine_raw = rd_u32(bytes, 0x2C);
    h.stack_size = rd_u32(bytes, 0x30);
    h.last_dynlib_id_raw = rd_u32(bytes, 0x44);

    for (std::uint32_t derived : {h.entry_point(), h.last_subroutine_offset()}) {
        if (derived % 4 != 0)
            fail(Errc::MisalignedPointer, "derived offset " + hex(derived) + " is not word aligned");
        if (derived >= bytes.size())
            fail(Errc::MisalignedPointer, "derived offset " + hex(derived) + " is past end of file");
    }
    return h;
}

std::vector<Subroutine> carve_subroutines(const Bytes& bytes, const PrgHeader& header,
                                          std::vector<std::string>* warnings) {
    auto word_at = [&](std::uint32_t off) { return rd_u32(bytes, off); };
    auto prologue_at = [&](std::uint32_t off) {
        return off + 12 <= bytes.size() && word_at(off) == kPrologue[0] &&
               word_at(off + 4) == kPrologue[1] && word_at(off + 8) == kPrologue[2];
    };

    const std::uint32_t limit = static_cast<std::uint32_t>(bytes.size() & ~3u);
    if (!prologue_at(kCodeStart))
        fail(Errc::NoPrologueAt0x50, "no subroutine prologue at offset 0x50");

    std::vector<Subroutine> subs;
    std::uint32_t pos = kCodeStart;
    while (true) {
        Subroutine sub;
        sub.start = pos;
        std::uint32_t scan = pos + 12;
        while (scan + 4 <= limit && word_at(scan) != kEpilogue) scan += 4;
        if (scan + 4 > limit)
            fail(Errc::UnterminatedSubroutine,
                 "prologue at " + hex(pos) + " has no epilogue before end of file");
        sub.end = scan + 4;

        // Pool runs to the next prologue; the last subroutine keeps every word
        // its pc-relative loads reach.
        std::uint32_t next = sub.end;
        while (next + 12 <= limit && !prologue_at(next)) next += 4;
        if (next + 12 <= limit && prologue_at(next)) {
            sub.pool_end = next;
            subs.push_back(std::move(sub));
            pos = next;
            continue;
        }

        std::uint32_t pool_end = sub.end;
        for (std::uint32_t off = sub.start; off < sub.end; off += 4) {
            std::uint32_t w = word_at(off);
            if (!is_pcrel_load(w)) continue;
            std::uint32_t imm = w & 0xFFF;
            bool up = (w >> 23) & 1;
            std::uint32_t target = off + 8 + (up ? imm : -imm);
            if (target >= sub.end && target + 4 <= limit) pool_end = std::max(pool_end, target + 4);
        }
        sub.pool_end = pool_end;
        subs.push_back(std::move(sub));
        break;
    }

    if (subs.back().start != header.entry_point())
        fail(Errc::EntryMismatch, "header entry point " + hex(header.entry_point()) +
                                      " != last subroutine start " + hex(subs.back().start));

    assign_roles(subs);
    if (warnings) {
        std::size_t middle = subs.size() >= 7 ? subs.size() - 7 : 0;
        if (middle % 2 != 0)
            warnings->push_back("odd number of subroutines between SYSDEBUG and PLC_PRG");
    }
    return subs;
}

std::vector<SymbolEntry> parse_symbol_table(const Bytes& bytes, std::uint32_t code_end,
                                            std::uint32_t* table_end,
                                            std::vector<std::string>* warnings) {
    std::vector<SymbolEntry> entries;
    std::uint32_t pos = code_end;
    const std::uint32_t size = static_cast<std::uint32_t>(bytes.size());
    std::uint32_t skipped = 0;
    while (pos < size && !printable(bytes[pos])) {
        ++pos;
        ++skipped;
    }
    if (skipped && pos < size && warnings)
        warnings->push_back("skipped " + std::to_string(skipped) +
                            " non-printable bytes before symbol table at " + hex(pos));

    std::uint32_t end = code_end;
    while (pos < size && printable(bytes[pos])) {
        std::uint32_t name_start = pos;
        while (pos < size && printable(bytes[pos])) ++pos;
        if (pos >= size || bytes[pos] != 0) break;  // name must be NUL terminated
        std::string name(bytes.begin() + name_start, bytes.begin() + pos);
        ++pos;  // NUL
        if (pos + 2 > size) break;
        SymbolEntry e;
        e.name = std::move(name);
        e.index = rd_u16(bytes, pos);
        pos += 2;
        entries.push_back(std::move(e));
        end = pos;
    }
    if (table_end) *table_end = entries.empty() ? code_end : end;
    return entries;
}

SectionMap build_section_map(const Bytes& bytes, const PrgHeader&,
                             const std::vector<Subroutine>& subs, std::uint32_t symtab_end) {
    SectionMap map;
    const std::uint32_t size = static_cast<std::uint32_t>(bytes.size());
    map.header = {0, kCodeStart};
    map.code = {kCodeStart, subs.empty() ? kCodeStart : subs.back().pool_end};
    map.symbol_table = {map.code.end, std::max(symtab_end, map.code.end)};
    map.trailing = {map.symbol_table.end, size};

    const SectionMap::Range* ranges[] = {&map.header, &map.code, &map.symbol_table, &map.trailing};
    std::uint32_t cursor = 0;
    for (const auto* r : ranges) {
        if (r->begin != cursor || r->end < r->begin)
            fail(Errc::OverlapDetected, "section ranges do not tile the file");
        cursor = r->end;
    }
    if (cursor != size) fail(Errc::OverlapDetected, "section ranges do not cover the file");
    return map;
}

std::vector<arm::Instr> decode_all(const Bytes& bytes, const Subroutine& sub) {
    std::vector<arm::Instr> out;
    out.reserve((sub.end - sub.start) / 4);
    for (std::uint32_t off = sub.start; off < sub.end; off += 4) {
        arm::Instr ins = arm::decode(rd_u32(bytes, off), off);
        if (ins.is_pc_relative_load() && ins.literal_addr + 4 <= bytes.size()) {
            ins.literal_value = rd_u32(bytes, ins.literal_addr);
            ins.literal_resolved = true;
        }
        out.push_back(std::move(ins));
    }
    return out;
}

PrgBinary parse_prg(Bytes bytes) {
    PrgBinary bin;
    bin.bytes = std::move(bytes);
    bin.header = parse_header(bin.bytes);
    bin.subs = carve_subroutines(bin.bytes, bin.header, &bin.warnings);
    for (auto& sub : bin.subs) sub.instrs = decode_all(bin.bytes, sub);
    std::uint32_t symtab_end = 0;
    bin.symbols = parse_symbol_table(bin.bytes, bin.code_end(), &symtab_end, &bin.warnings);
    bin.sections = build_section_map(bin.bytes, bin.header, bin.subs, symtab_end);
    return bin;
}

Bytes reserialize(const PrgBinary& bin) {
    Bytes out;
    out.reserve(bin.bytes.size());
    out.insert(out.end(), bin.header.raw.begin(), bin.header.raw.end());
    for (const auto& sub : bin.subs)
        out.insert(out.end(), bin.bytes.begin() + sub.start, bin.bytes.begin() + sub.pool_end);
    out.insert(out.end(), bin.bytes.begin() + bin.sections.symbol_table.begin,
               bin.bytes.begin() + bin.sections.symbol_table.end);
    out.insert(out.end(), bin.bytes.begin() + bin.sections.trailing.begin,
               bin.bytes.begin() + bin.sections.trailing.end);
    return out;
}

}  // namespace prgkit
