#include "lwm2m/message.hpp"

#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace lwm2m;
using testutil::errc_of;
using testutil::from_hex;

TEST_CASE("frame layout matches frozen bytes") {
    Message msg;
    msg.kind = MsgKind::confirmable;
    msg.code = Code::get;
    msg.message_id = 0x1234;
    msg.token = {0xAB, 0xCD};
    msg.add_option_string(kOptUriPath, "ac");
    msg.add_option_string(kOptUriQuery, "ep=c1");

    auto bytes = msg.encode();
    CHECK(bytes == from_hex("0001123402abcd000b00026163000f000565703d6331ff"));
}

TEST_CASE("decode inverts encode for randomized messages") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        Message msg;
        msg.kind = static_cast<MsgKind>(rng() % 3);
        msg.code = (rng() % 2) ? Code::get : Code::content_205;
        msg.message_id = static_cast<std::uint16_t>(rng());
        msg.token.resize(rng() % 9);
        for (auto& b : msg.token) b = static_cast<std::uint8_t>(rng());
        int opts = static_cast<int>(rng() % 4);
        for (int o = 0; o < opts; ++o) {
            std::vector<std::uint8_t> val(rng() % 20);
            for (auto& b : val) b = static_cast<std::uint8_t>(rng());
            msg.add_option(static_cast<std::uint16_t>(rng() % 0xFF00), val);
        }
        msg.payload.resize(rng() % 64);
        for (auto& b : msg.payload) b = static_cast<std::uint8_t>(rng());

        CHECK(Message::decode(msg.encode()) == msg);
    }
}

TEST_CASE("responses echo message id and token") {
    Message req;
    req.kind = MsgKind::confirmable;
    req.code = Code::get;
    req.message_id = 77;
    req.token = {1, 2, 3};
    auto rsp = req.make_response(Code::content_205);
    CHECK(rsp.kind == MsgKind::ack);
    CHECK(rsp.message_id == 77);
    CHECK(rsp.token == req.token);
}

TEST_CASE("uri path helpers") {
    Message msg;
    msg.set_uri_path(Path(3311, 1, 5850));
    CHECK(msg.uri_path_segments() == std::vector<std::string>{"3311", "1", "5850"});
    CHECK(msg.uri_path() == Path(3311, 1, 5850));

    Message named;
    named.set_uri_path_segments({"ac"});
    CHECK_FALSE(named.uri_path().has_value());
}

TEST_CASE("observe option carries a compact sequence number") {
    Message msg;
    msg.set_observe(0x1FFFF);
    CHECK(msg.observe() == 0x1FFFF);
    Message msg2;
    msg2.set_observe(5);
    CHECK(msg2.observe() == 5);
    CHECK_FALSE(Message().observe().has_value());
}

TEST_CASE("malformed frames are rejected") {
    CHECK(errc_of([] { Message::decode(from_hex("0001")); }) == Errc::malformed);        // too short
    CHECK(errc_of([] { Message::decode(from_hex("0301000000ff")); }) == Errc::malformed);  // bad kind
    CHECK(errc_of([] { Message::decode(from_hex("00ff000000ff")); }) == Errc::malformed);  // bad code
    CHECK(errc_of([] { Message::decode(from_hex("000100000900ff")); }) == Errc::malformed); // token len 9
    CHECK(errc_of([] { Message::decode(from_hex("0001000000")); }) == Errc::malformed);     // no marker
    CHECK(errc_of([] { Message::decode(from_hex("0001000000000b0005ff")); }) == Errc::malformed); // truncated option
}

TEST_CASE("token above 8 bytes cannot be encoded") {
    Message msg;
    msg.token.resize(9);
    CHECK(errc_of([&] { msg.encode(); }) == Errc::value_too_large);
}
