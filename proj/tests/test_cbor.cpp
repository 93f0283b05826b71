#include "lwm2m/cbor.hpp"

#include "doctest.h"
#include "lwm2m/errors.hpp"
#include "test_util.hpp"

using namespace lwm2m;
using testutil::errc_of;
using testutil::from_hex;

TEST_CASE("uint encoding picks the minimal width") {
    std::vector<std::uint8_t> out;
    cbor::put_uint(out, 0);
    cbor::put_uint(out, 23);
    cbor::put_uint(out, 24);
    cbor::put_uint(out, 255);
    cbor::put_uint(out, 256);
    cbor::put_uint(out, 65536);
    CHECK(out == from_hex("0017181818ff1901001a00010000"));
}

TEST_CASE("array of maps with integer keys round-trips") {
    std::vector<std::uint8_t> out;
    cbor::put_array_header(out, 1);
    cbor::put_map_header(out, 2);
    cbor::put_uint(out, 1);
    cbor::put_uint(out, 3311);
    cbor::put_uint(out, 3);
    cbor::put_uint(out, 1);
    CHECK(out == from_hex("81a201190cef0301"));

    cbor::Reader r(out);
    CHECK(r.read_array_header() == 1);
    CHECK(r.read_map_header() == 2);
    CHECK(r.read_uint() == 1);
    CHECK(r.read_uint() == 3311);
    CHECK(r.read_uint() == 3);
    CHECK(r.read_uint() == 1);
    r.expect_end();
}

TEST_CASE("text strings round-trip") {
    std::vector<std::uint8_t> out;
    cbor::put_text(out, "coap://s1");
    CHECK(out == from_hex("69636f61703a2f2f7331"));
    cbor::Reader r(out);
    CHECK(r.read_text() == "coap://s1");
}

TEST_CASE("truncation and trailing bytes are malformed") {
    auto bytes = from_hex("81a201190cef0301");
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
        std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        cbor::Reader r(head);
        CHECK(errc_of([&] {
            r.read_array_header();
            auto n = r.read_map_header();
            for (std::size_t i = 0; i < 2 * n; ++i) r.read_uint();
            r.expect_end();
        }) == Errc::malformed);
    }

    auto trailing = bytes;
    trailing.push_back(0x00);
    cbor::Reader r(trailing);
    CHECK(errc_of([&] {
        r.read_array_header();
        r.read_map_header();
        for (int i = 0; i < 4; ++i) r.read_uint();
        r.expect_end();
    }) == Errc::malformed);
}

TEST_CASE("absurd container counts are rejected") {
    // Array claiming 2^32-1 elements with no content.
    auto bytes = from_hex("9affffffff");
    cbor::Reader r(bytes);
    CHECK(errc_of([&] { r.read_array_header(); }) == Errc::malformed);
}
