#include "prgkit/knowledge.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "prgkit/error.hpp"

namespace prgkit {

using nlohmann::json;

const char* param_type_name(ParamType t) {
    switch (t) {
        case ParamType::Real32: return "REAL32";
        case ParamType::Dword: return "DWORD";
        case ParamType::Word: return "WORD";
        case ParamType::Bool: return "BOOL";
        case ParamType::Time: return "TIME";
    }
    return "DWORD";
}

ParamType param_type_from_name(const std::string& name) {
    if (name == "REAL32") return ParamType::Real32;
    if (name == "DWORD") return ParamType::Dword;
    if (name == "WORD") return ParamType::Word;
    if (name == "BOOL") return ParamType::Bool;
    if (name == "TIME") return ParamType::Time;
    fail(Errc::BadInput, "unknown parameter type " + name);
}

unsigned param_type_width(ParamType t) {
    switch (t) {
        case ParamType::Real32:
        case ParamType::Dword:
        case ParamType::Time: return 4;
        case ParamType::Word: return 2;
        case ParamType::Bool: return 1;
    }
    return 4;
}

const ParamDesc* ParamLayout::find(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return &p;
    return nullptr;
}

void ParamLayout::validate() const {
    std::uint32_t prev_end = 0;
    bool first = true;
    for (const auto& p : params) {
        if (!first && p.byte_offset < prev_end)
            fail(Errc::BadInput, "parameter " + p.name + " overlaps its predecessor");
        prev_end = p.byte_offset + param_type_width(p.type);
        first = false;
    }
}

void FingerprintDb::add(Fingerprint fp) {
    auto range = by_digest_.equal_range(fp.sha256);
    for (auto it = range.first; it != range.second; ++it) {
        if (entries_[it->second].name != fp.name)
            fail(Errc::CollisionDetected, "digest " + fp.sha256 + " maps to both " +
                                              entries_[it->second].name + " and " + fp.name);
    }
    by_digest_.emplace(fp.sha256, entries_.size());
    entries_.push_back(std::move(fp));
}

const Fingerprint* FingerprintDb::lookup(const std::string& sha256) const {
    auto it = by_digest_.find(sha256);
    if (it == by_digest_.end()) return nullptr;
    return &entries_[it->second];
}

bool FingerprintDb::ambiguous(const std::string& sha256) const {
    // add() rejects cross-name collisions, but a database edited or merged by
    // hand can still carry them; loaders keep the entries and report here.
    auto names = names_for(sha256);
    return names.size() > 1;
}

std::vector<std::string> FingerprintDb::names_for(const std::string& sha256) const {
    std::vector<std::string> names;
    auto range = by_digest_.equal_range(sha256);
    for (auto it = range.first; it != range.second; ++it) {
        const std::string& n = entries_[it->second].name;
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
    return names;
}

void FingerprintDb::attach_layout(const std::string& name, ParamLayout layout) {
    layout.validate();
    for (auto& e : entries_)
        if (e.name == name) e.param_layout = layout;
}

namespace {

json layout_to_json(const ParamLayout& l) {
    json params = json::array();
    for (const auto& p : l.params)
        params.push_back({{"name", p.name}, {"type", param_type_name(p.type)}, {"offset", p.byte_offset}});
    return json{{"function", l.function}, {"params", params}};
}

ParamLayout layout_from_json(const json& j) {
    ParamLayout l;
    l.function = j.at("function").get<std::string>();
    for (const auto& p : j.at("params")) {
        ParamDesc d;
        d.name = p.at("name").get<std::string>();
        d.type = param_type_from_name(p.at("type").get<std::string>());
        d.byte_offset = p.at("offset").get<std::uint32_t>();
        l.params.push_back(std::move(d));
    }
    l.validate();
    return l;
}

}  // namespace

std::string FingerprintDb::to_json() const {
    std::vector<const Fingerprint*> sorted;
    sorted.reserve(entries_.size());
    for (const auto& e : entries_) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const Fingerprint* a, const Fingerprint* b) {
        return std::tie(a->library, a->name, a->sha256) < std::tie(b->library, b->name, b->sha256);
    });

    json entries = json::array();
    for (const auto* e : sorted) {
        json entry = {{"sha256", e->sha256},
                      {"name", e->name},
                      {"library", e->library},
                      {"mnemonic_count", e->mnemonic_count}};
        if (e->param_layout) entry["param_layout"] = layout_to_json(*e->param_layout);
        entries.push_back(std::move(entry));
    }
    json doc = {{"format", "prgkit-fingerprints"},
                {"version", 1},
                {"canon", kFingerprintCanonVersion},
                {"entries", entries}};
    return doc.dump(2) + "\n";
}

FingerprintDb FingerprintDb::from_json(const std::string& text) {
    json doc = json::parse(text);
    if (doc.value("format", "") != "prgkit-fingerprints")
        fail(Errc::BadInput, "not a fingerprint database file");
    if (doc.value("canon", -1) != kFingerprintCanonVersion)
        fail(Errc::BadInput, "fingerprint canonicalization version mismatch");
    FingerprintDb db;
    for (const auto& e : doc.at("entries")) {
        Fingerprint fp;
        fp.sha256 = e.at("sha256").get<std::string>();
        fp.name = e.at("name").get<std::string>();
        fp.library = e.at("library").get<std::string>();
        fp.mnemonic_count = e.at("mnemonic_count").get<std::uint32_t>();
        if (e.contains("param_layout")) fp.param_layout = layout_from_json(e.at("param_layout"));
        // Bypass collision rejection on load: report via ambiguous() instead.
        db.by_digest_.emplace(fp.sha256, db.entries_.size());
        db.entries_.push_back(std::move(fp));
    }
    return db;
}

std::string mnemonic_stream(const Subroutine& sub) {
    std::string stream;
    for (const auto& ins : sub.instrs) {
        if (!ins.ok()) continue;
        if (!stream.empty()) stream += kMnemonicSeparator;
        stream += ins.mnemonic();
    }
    return stream;
}

std::string fingerprint(const Subroutine& sub) {
    std::string stream = mnemonic_stream(sub);
    if (stream.empty()) fail(Errc::EmptyBody, "subroutine " + sub.name + " has no decodable instruction");
    return sha256_hex(stream);
}

FingerprintDb build_db(const std::vector<DbCorpusEntry>& corpus) {
    FingerprintDb db;
    for (const auto& entry : corpus) {
        PrgBinary bin = parse_prg(entry.prg);
        if (bin.subs.size() != 9)
            fail(Errc::BadCorpus, entry.name + ": corpus binary must contain exactly one main/INIT pair, got " +
                                      std::to_string(bin.subs.size()) + " subroutines");
        const Subroutine& main_sub = bin.subs[5];
        const Subroutine& init_sub = bin.subs[6];

        Fingerprint main_fp;
        main_fp.sha256 = fingerprint(main_sub);
        main_fp.name = entry.name;
        main_fp.library = entry.library;
        main_fp.mnemonic_count = static_cast<std::uint32_t>(
            std::count_if(main_sub.instrs.begin(), main_sub.instrs.end(),
                          [](const arm::Instr& i) { return i.ok(); }));
        db.add(std::move(main_fp));

        Fingerprint init_fp;
        init_fp.sha256 = fingerprint(init_sub);
        init_fp.name = entry.name + "_INIT";
        init_fp.library = entry.library;
        init_fp.mnemonic_count = static_cast<std::uint32_t>(
            std::count_if(init_sub.instrs.begin(), init_sub.instrs.end(),
                          [](const arm::Instr& i) { return i.ok(); }));
        db.add(std::move(init_fp));
    }
    return db;
}

bool IoMap::is_input(std::uint32_t addr) const {
    for (const auto& r : input_ranges)
        if (r.contains(addr)) return true;
    return false;
}

bool IoMap::is_output(std::uint32_t addr) const {
    for (const auto& r : output_ranges)
        if (r.contains(addr)) return true;
    return false;
}

void IoMap::validate() const {
    auto check_list = [](const std::vector<IoRange>& ranges, const char* what) {
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            if (ranges[i].start > ranges[i].end)
                fail(Errc::MalformedMap, std::string(what) + " range start exceeds end");
            if (i > 0 && ranges[i].start <= ranges[i - 1].end)
                fail(Errc::MalformedMap, std::string(what) + " ranges overlap or are unsorted");
        }
    };
    if (input_ranges.empty() && output_ranges.empty())
        fail(Errc::MalformedMap, "map declares no ranges");
    check_list(input_ranges, "input");
    check_list(output_ranges, "output");
    for (const auto& in : input_ranges)
        for (const auto& out : output_ranges)
            if (in.start <= out.end && out.start <= in.end)
                fail(Errc::MalformedMap, "input and output ranges intersect");
}

IoMap wago_750_881() {
    IoMap map;
    map.model = "WAGO 750-881";
    map.input_ranges = {{0x28CFEC00, 0x28CFF7F8}};
    map.output_ranges = {{0x28CFD800, 0x28CFE3F8}};
    return map;
}

ParamLayout pid_param_layout() {
    ParamLayout l;
    l.function = "PID_FIXCYCLE";
    l.params = {
        {"actual", ParamType::Real32, 0},
        {"set_point", ParamType::Real32, 4},
        {"kp", ParamType::Real32, 8},
        {"ki", ParamType::Real32, 12},
        {"kd", ParamType::Real32, 16},
        {"y_offset", ParamType::Real32, 20},
        {"y_min", ParamType::Real32, 24},
        {"y_max", ParamType::Real32, 28},
        {"manual", ParamType::Bool, 32},
        {"reset", ParamType::Bool, 36},
        {"cycle", ParamType::Time, 40},
        {"mode", ParamType::Word, 44},
        {"status", ParamType::Dword, 48},
    };
    return l;
}

TrgKey TrgKey::from_bytes(Bytes b) {
    if (b.size() != kSize)
        fail(Errc::BadInput, "TRG key must be exactly 256 bytes, got " + std::to_string(b.size()));
    TrgKey k;
    k.key = std::move(b);
    return k;
}

Bytes trg_decode(const Bytes& cipher, const TrgKey& key) {
    Bytes out(cipher.size());
    for (std::size_t i = 0; i < cipher.size(); ++i)
        out[i] = cipher[i] ^ key.key[i % TrgKey::kSize];
    return out;
}

TrgKey trg_recover_key(const Bytes& cipher, const Bytes& known_plain) {
    if (known_plain.size() < TrgKey::kSize || cipher.size() < TrgKey::kSize)
        fail(Errc::InsufficientPlaintext,
             "need at least 256 bytes of aligned plaintext and ciphertext");
    Bytes key(TrgKey::kSize);
    for (std::size_t i = 0; i < TrgKey::kSize; ++i) key[i] = cipher[i] ^ known_plain[i];
    return TrgKey::from_bytes(std::move(key));
}

namespace {

std::uint32_t parse_addr(const std::string& text) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos, 0);
    } catch (const std::exception&) {
        fail(Errc::MalformedMap, "bad address: " + text);
    }
    if (pos != text.size() || v > 0xFFFFFFFFull) fail(Errc::MalformedMap, "bad address: " + text);
    return static_cast<std::uint32_t>(v);
}

IoRange parse_range(const std::string& text) {
    auto sep = text.find("..");
    if (sep == std::string::npos) fail(Errc::MalformedMap, "range needs start..end: " + text);
    IoRange r;
    r.start = parse_addr(text.substr(0, sep));
    r.end = parse_addr(text.substr(sep + 2));
    return r;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

IoMap parse_iomap_text(const std::string& text) {
    IoMap map;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(Errc::MalformedMap, "bad line: " + line);
        std::string k = trim(line.substr(0, eq));
        std::string v = trim(line.substr(eq + 1));
        if (k == "model")
            map.model = v;
        else if (k == "input")
            map.input_ranges.push_back(parse_range(v));
        else if (k == "output")
            map.output_ranges.push_back(parse_range(v));
        else
            fail(Errc::MalformedMap, "unknown key: " + k);
    }
    auto lt = [](const IoRange& a, const IoRange& b) { return a.start < b.start; };
    std::sort(map.input_ranges.begin(), map.input_ranges.end(), lt);
    std::sort(map.output_ranges.begin(), map.output_ranges.end(), lt);
    map.validate();
    return map;
}

IoMap parse_iomap(const Bytes& decoded_trg) {
    return parse_iomap_text(std::string(decoded_trg.begin(), decoded_trg.end()));
}

std::string render_iomap(const IoMap& map) {
    std::ostringstream os;
    os << "model=" << map.model << "\n";
    for (const auto& r : map.input_ranges) os << "input=" << hex(r.start) << ".." << hex(r.end) << "\n";
    for (const auto& r : map.output_ranges) os << "output=" << hex(r.start) << ".." << hex(r.end) << "\n";
    return os.str();
}

IoMap load_iomap(const std::string& path) {
    Bytes data = read_file(path);
    std::string text(data.begin(), data.end());
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json doc = json::parse(text);
        IoMap map;
        map.model = doc.value("model", "");
        for (const auto& r : doc.value("input_ranges", json::array()))
            map.input_ranges.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()});
        for (const auto& r : doc.value("output_ranges", json::array()))
            map.output_ranges.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()});
        map.validate();
        return map;
    }
    return parse_iomap_text(text);
}

}  // namespace prgkit
