#include "lwm2m/tlv.hpp"

#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace lwm2m;
using testutil::errc_of;
using testutil::from_hex;

namespace {

// Deterministic random instance over a fixed schema, for round-trip checks.
struct InstanceGen {
    std::mt19937_64 rng;
    std::map<ResourceId, ValueKind> schema;

    explicit InstanceGen(std::uint64_t seed) : rng(seed) {
        schema = {{0, ValueKind::integer},    {1, ValueKind::string},  {2, ValueKind::opaque},
                  {3, ValueKind::boolean},    {4, ValueKind::objlink}, {300, ValueKind::integer},
                  {5700, ValueKind::opaque},  {5850, ValueKind::boolean}};
    }

    ObjectInstance next() {
        ObjectInstance inst;
        inst.object_id = 3300;
        inst.instance_id = static_cast<InstanceId>(rng() % 4);
        for (const auto& [rid, kind] : schema) {
            if (rng() % 2) continue;
            inst.resources.emplace(rid, value_of(kind));
        }
        return inst;
    }

    ResourceValue value_of(ValueKind kind) {
        switch (kind) {
            case ValueKind::integer: {
                int width = static_cast<int>(rng() % 4);
                std::int64_t v = static_cast<std::int64_t>(rng());
                if (width == 0) v = static_cast<std::int8_t>(v);
                else if (width == 1) v = static_cast<std::int16_t>(v);
                else if (width == 2) v = static_cast<std::int32_t>(v);
                return ResourceValue::integer(v);
            }
            case ValueKind::string: {
                std::string s(rng() % 40, '\0');
                for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
                return ResourceValue::str(s);
            }
            case ValueKind::opaque: {
                std::vector<std::uint8_t> v(rng() % 300);
                for (auto& b : v) b = static_cast<std::uint8_t>(rng());
                return ResourceValue::opaque(v);
            }
            case ValueKind::boolean:
                return ResourceValue::boolean(rng() % 2 == 0);
            case ValueKind::objlink:
                return ResourceValue::objlink({static_cast<ObjectId>(rng() % 0xFFFF),
                                               static_cast<InstanceId>(rng() % 0xFFFF)});
        }
        return ResourceValue::integer(0);
    }
};

}  // namespace

TEST_CASE("resource record with 16-bit id encodes to frozen bytes") {
    ObjectInstance inst;
    inst.object_id = 3311;
    inst.instance_id = 0;
    inst.resources.emplace(5850, ResourceValue::boolean(true));

    auto bytes = tlv::encode_instance(inst);
    CHECK(bytes == from_hex("e116da01"));
    CHECK(bytes == testutil::read_golden("tlv_bool_5850.bin"));

    auto decoded = tlv::decode_instance(bytes, {{5850, ValueKind::boolean}});
    CHECK(decoded.at(5850).as_boolean() == true);
}

TEST_CASE("resource record with 8-bit id encodes to frozen bytes") {
    ObjectInstance inst;
    inst.object_id = 1;
    inst.instance_id = 0;
    inst.resources.emplace(0, ResourceValue::boolean(false));
    CHECK(tlv::encode_instance(inst) == from_hex("c10000"));
}

TEST_CASE("resources are emitted in ascending id order") {
    ObjectInstance inst;
    inst.object_id = 3311;
    inst.instance_id = 0;
    inst.resources.emplace(5850, ResourceValue::boolean(true));
    inst.resources.emplace(1, ResourceValue::str("hi"));
    CHECK(tlv::encode_instance(inst) == from_hex("c2016869e116da01"));
}

TEST_CASE("longer values select wider length fields") {
    tlv::Record rec;
    rec.kind = tlv::Kind::resource;
    rec.id = 5;
    rec.value.assign(200, 0xAB);
    std::vector<std::uint8_t> out;
    tlv::append_record(out, rec);
    CHECK(out[0] == 0xC8);
    CHECK(out[1] == 0x05);
    CHECK(out[2] == 200);
    CHECK(out.size() == 203);

    auto records = tlv::decode_records(out);
    REQUIRE(records.size() == 1);
    CHECK(records[0] == rec);
}

TEST_CASE("length field boundaries round-trip; 24-bit limit enforced") {
    for (std::size_t len : {std::size_t{7}, std::size_t{8}, std::size_t{255}, std::size_t{256},
                            std::size_t{65535}, std::size_t{65536}}) {
        tlv::Record rec{tlv::Kind::resource, 9, std::vector<std::uint8_t>(len, 0x5A)};
        std::vector<std::uint8_t> out;
        tlv::append_record(out, rec);
        auto back = tlv::decode_records(out);
        REQUIRE(back.size() == 1);
        CHECK(back[0].value.size() == len);
    }
    tlv::Record too_big{tlv::Kind::resource, 9, std::vector<std::uint8_t>(0x1000000, 0)};
    std::vector<std::uint8_t> out;
    CHECK(errc_of([&] { tlv::append_record(out, too_big); }) == Errc::value_too_large);
}

TEST_CASE("empty instance encodes to empty payload") {
    ObjectInstance inst;
    inst.object_id = 3311;
    inst.instance_id = 0;
    CHECK(tlv::encode_instance(inst).empty());
    CHECK(tlv::decode_instance_raw({}).empty());
}

TEST_CASE("instance round-trip over 1000 randomized instances") {
    InstanceGen gen(0xC2C0001);
    for (int i = 0; i < 1000; ++i) {
        ObjectInstance inst = gen.next();
        auto bytes = tlv::encode_instance(inst);
        auto decoded = tlv::decode_instance(bytes, gen.schema);
        ObjectInstance back;
        back.object_id = inst.object_id;
        back.instance_id = inst.instance_id;
        back.resources = decoded;
        CHECK(back == inst);
        // Determinism: same input, same bytes.
        CHECK(tlv::encode_instance(inst) == bytes);
    }
}

TEST_CASE("object-instance records nest resources exactly one level") {
    ObjectInstance inst;
    inst.object_id = 3311;
    inst.instance_id = 1;
    inst.resources.emplace(5850, ResourceValue::boolean(true));

    tlv::Record wrapper;
    wrapper.kind = tlv::Kind::object_instance;
    wrapper.id = 1;
    wrapper.value = tlv::encode_instance(inst);
    std::vector<std::uint8_t> out;
    tlv::append_record(out, wrapper);
    auto records = tlv::decode_records(out);
    REQUIRE(records.size() == 1);
    CHECK(records[0].kind == tlv::Kind::object_instance);

    // Double nesting is malformed.
    tlv::Record outer;
    outer.kind = tlv::Kind::object_instance;
    outer.id = 2;
    outer.value = out;
    std::vector<std::uint8_t> bad;
    tlv::append_record(bad, outer);
    CHECK(errc_of([&] { tlv::decode_records(bad); }) == Errc::malformed);
}

TEST_CASE("truncated payload is malformed") {
    auto bytes = from_hex("e116da01");
    for (std::size_t cut = 1; cut < bytes.size(); ++cut) {
        std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK(errc_of([&] { tlv::decode_records(head); }) == Errc::malformed);
    }
}

TEST_CASE("trailing garbage byte is malformed") {
    auto bytes = from_hex("e116da01");
    bytes.push_back(0x42);
    CHECK(errc_of([&] { tlv::decode_records(bytes); }) == Errc::malformed);
}

TEST_CASE("multiple-resource kinds are rejected by this subset") {
    // Type byte with bits 7-6 = 10 (multiple resource).
    auto bytes = from_hex("810500");
    CHECK(errc_of([&] { tlv::decode_records(bytes); }) == Errc::malformed);
}

TEST_CASE("decode never crashes on mutated inputs") {
    InstanceGen gen(0xC2C0002);
    std::mt19937_64 rng(0xFADE);
    int malformed = 0, ok = 0;
    for (int i = 0; i < 2000; ++i) {
        auto bytes = tlv::encode_instance(gen.next());
        if (bytes.empty()) continue;
        // Random mutation; may or may not stay well-formed.
        std::size_t idx = rng() % bytes.size();
        bytes[idx] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        try {
            auto records = tlv::decode_records(bytes);
            (void)records;
            ++ok;
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed);
            ++malformed;
        }
    }
    CHECK(malformed > 0);
    CHECK(ok + malformed > 0);
}
