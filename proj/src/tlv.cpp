#include "lwm2m/tlv.hpp"

namespace lwm2m::tlv {
namespace {

constexpr std::size_t kMaxValueLen = 0xFFFFFF;  // 24-bit length field

struct Cursor {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    bool done() const { return pos >= data.size(); }
    std::uint8_t u8() {
        if (pos + 1 > data.size()) raise(Errc::malformed, "truncated TLV");
        return data[pos++];
    }
    std::uint32_t be(std::size_t n) {
        if (pos + n > data.size()) raise(Errc::malformed, "truncated TLV");
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < n; ++i) v = (v << 8) | data[pos++];
        return v;
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        if (pos + n > data.size()) raise(Errc::malformed, "truncated TLV value");
        auto out = data.subspan(pos, n);
        pos += n;
        return out;
    }
};

Record decode_one(Cursor& cur, int depth) {
    std::uint8_t type = cur.u8();
    auto kind = static_cast<Kind>(type >> 6);
    if (kind == Kind::multiple_resource || kind == Kind::resource_instance)
        raise(Errc::malformed, "multiple-resource records not supported");

    Record rec;
    rec.kind = kind;
    rec.id = static_cast<std::uint16_t>(cur.be((type & 0x20) ? 2 : 1));

    std::size_t len;
    switch ((type >> 3) & 0x03) {
        case 0: len = type & 0x07; break;
        case 1: len = cur.be(1); break;
        case 2: len = cur.be(2); break;
        default: len = cur.be(3); break;
    }
    auto value = cur.take(len);
    rec.value.assign(value.begin(), value.end());

    if (kind == Kind::object_instance) {
        if (depth >= 1) raise(Errc::malformed, "nested object-instance record");
        // Validate the nested resource stream eagerly.
        Cursor inner{rec.value, 0};
        while (!inner.done()) {
            Record nested = decode_one(inner, depth + 1);
            if (nested.kind != Kind::resource)
                raise(Errc::malformed, "object-instance may only nest resource records");
        }
    }
    return rec;
}

}  // namespace

void append_record(std::vector<std::uint8_t>& out, const Record& record) {
    if (record.value.size() > kMaxValueLen) raise(Errc::value_too_large, "TLV value exceeds 24-bit length");

    std::uint8_t type = static_cast<std::uint8_t>(static_cast<std::uint8_t>(record.kind) << 6);
    bool wide_id = record.id > 0xFF;
    if (wide_id) type |= 0x20;

    std::size_t len = record.value.size();
    int len_bytes;
    if (len <= 7) {
        type |= static_cast<std::uint8_t>(len);
        len_bytes = 0;
    } else if (len <= 0xFF) {
        type |= 0x08;
        len_bytes = 1;
    } else if (len <= 0xFFFF) {
        type |= 0x10;
        len_bytes = 2;
    } else {
        type |= 0x18;
        len_bytes = 3;
    }

    out.push_back(type);
    if (wide_id) out.push_back(static_cast<std::uint8_t>(record.id >> 8));
    out.push_back(static_cast<std::uint8_t>(record.id & 0xFF));
    for (int i = len_bytes - 1; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>((len >> (8 * i)) & 0xFF));
    out.insert(out.end(), record.value.begin(), record.value.end());
}

std::vector<Record> decode_records(std::span<const std::uint8_t> payload) {
    std::vector<Record> out;
    Cursor cur{payload, 0};
    while (!cur.done()) out.push_back(decode_one(cur, 0));
    return out;
}

std::vector<std::uint8_t> encode_instance(const ObjectInstance& instance) {
    std::vector<std::uint8_t> out;
    for (const auto& [id, value] : instance.resources) {  // std::map: ascending ids
        Record rec;
        rec.kind = Kind::resource;
        rec.id = id;
        rec.value = value.leaf_bytes();
        append_record(out, rec);
    }
    return out;
}

std::map<ResourceId, std::vector<std::uint8_t>> decode_instance_raw(std::span<const std::uint8_t> payload) {
    std::map<ResourceId, std::vector<std::uint8_t>> out;
    for (auto& rec : decode_records(payload)) {
        if (rec.kind != Kind::resource) raise(Errc::malformed, "instance payload must hold resource records");
        if (out.count(rec.id)) raise(Errc::malformed, "duplicate resource id in instance payload");
        out.emplace(rec.id, std::move(rec.value));
    }
    return out;
}

std::map<ResourceId, ResourceValue> decode_instance(std::span<const std::uint8_t> payload,
                                                    const std::map<ResourceId, ValueKind>& schema) {
    std::map<ResourceId, ResourceValue> out;
    for (const auto& [id, bytes] : decode_instance_raw(payload)) {
        auto it = schema.find(id);
        if (it == schema.end()) raise(Errc::malformed, "resource id not in schema: " + std::to_string(id));
        out.emplace(id, ResourceValue::from_leaf_bytes(it->second, bytes.data(), bytes.size()));
    }
    return out;
}

}  // namespace lwm2m::tlv
