#include "prgkit/patch.hpp"

#include <algorithm>

#include "json.hpp"
#include "prgkit/error.hpp"

namespace prgkit {

using nlohmann::json;

std::uint32_t compute_chk(const Bytes& bytes) {
    std::uint32_t sum = 0;
    for (std::uint8_t b : bytes) sum += b;
    return sum;
}

Bytes chk_file_bytes(std::uint32_t chk) {
    Bytes out;
    put_u32(out, chk);
    return out;
}

ApplyResult apply(const Bytes& binary, const std::vector<PatchOp>& ops) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> spans;
    for (const auto& op : ops) {
        if (op.old_bytes.size() != op.new_bytes.size())
            fail(Errc::BadInput, "patch at " + hex(op.offset) + " changes length");
        if (op.offset + op.old_bytes.size() > binary.size())
            fail(Errc::OutOfBounds, "patch at " + hex(op.offset) + " runs past end of file");
        spans.emplace_back(op.offset, op.offset + static_cast<std::uint32_t>(op.old_bytes.size()));
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].second)
            fail(Errc::Overlap, "patches overlap at " + hex(spans[i].first));

    for (const auto& op : ops) {
        if (!std::equal(op.old_bytes.begin(), op.old_bytes.end(), binary.begin() + op.offset))
            fail(Errc::OldMismatch, "stale patch at " + hex(op.offset) +
                                        ": current contents differ from expected old bytes");
    }

    ApplyResult result;
    result.patched = binary;
    for (const auto& op : ops)
        std::copy(op.new_bytes.begin(), op.new_bytes.end(), result.patched.begin() + op.offset);
    result.chk = compute_chk(result.patched);
    result.chk_file = chk_file_bytes(result.chk);
    return result;
}

std::vector<PatchOp> patch_argument(const Bytes& binary, const ExtractedArgs& args,
                                    const std::string& param, double new_value) {
    const ExtractedParam* target = nullptr;
    for (const auto& p : args.params)
        if (p.name == param) target = &p;
    if (!target) fail(Errc::NoLayout, "no parameter named " + param + " in " + args.callee);
    if (target->provenance == kNoProvenance)
        fail(Errc::ValueNotPatchable,
             param + " was computed at runtime, not loaded from a stored literal");
    if (target->provenance + 4 > binary.size())
        fail(Errc::OutOfBounds, "provenance offset " + hex(target->provenance) + " out of range");

    std::uint32_t new_raw = encode_param_value(target->type, new_value);

    PatchOp op;
    op.offset = target->provenance;
    op.old_bytes.assign(binary.begin() + op.offset, binary.begin() + op.offset + 4);
    op.new_bytes.resize(4);
    wr_u32(op.new_bytes, 0, new_raw);
    op.reason = args.callee + "." + param + " -> " + std::to_string(new_value);
    return {op};
}

std::string patch_ops_to_json(const std::vector<PatchOp>& ops) {
    auto hex_of = [](const Bytes& b) {
        std::string s;
        for (std::uint8_t v : b) {
            s += "0123456789abcdef"[v >> 4];
            s += "0123456789abcdef"[v & 0xF];
        }
        return s;
    };
    json arr = json::array();
    for (const auto& op : ops)
        arr.push_back({{"offset", op.offset},
                       {"old", hex_of(op.old_bytes)},
                       {"new", hex_of(op.new_bytes)},
                       {"reason", op.reason}});
    return arr.dump(2) + "\n";
}

std::vector<PatchOp> patch_ops_from_json(const std::string& text) {
    auto bytes_of = [](const std::string& s) {
        if (s.size() % 2) fail(Errc::BadInput, "odd hex string length in patch script");
        Bytes out(s.size() / 2);
        for (std::size_t i = 0; i < out.size(); ++i) {
            auto nib = [&](char c) -> unsigned {
                if (c >= '0' && c <= '9') return c - '0';
                if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                if (c >= 'A' && c <= 'F') return c - 'A' + 10;
                fail(Errc::BadInput, "bad hex digit in patch script");
            };
            out[i] = static_cast<std::uint8_t>((nib(s[2 * i]) << 4) | nib(s[2 * i + 1]));
        }
        return out;
    };
    json arr = json::parse(text);
    std::vector<PatchOp> ops;
    for (const auto& j : arr) {
        PatchOp op;
        op.offset = j.at("offset").get<std::uint32_t>();
        op.old_bytes = bytes_of(j.at("old").get<std::string>());
        op.new_bytes = bytes_of(j.at("new").get<std::string>());
        op.reason = j.value("reason", "");
        ops.push_back(std::move(op));
    }
    return ops;
}

}  // namespace prgkit
