#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lwm2m/types.hpp"

namespace lwm2m {

enum class MsgKind : std::uint8_t { confirmable = 0, non_confirmable = 1, ack = 2 };

// CoAP code byte: class << 5 | detail.
enum class Code : std::uint8_t {
    get = 0x01,
    post = 0x02,
    put = 0x03,
    del = 0x04,
    created_201 = 0x41,
    changed_204 = 0x44,
    content_205 = 0x45,
    bad_request_400 = 0x80,
    unauthorized_401 = 0x81,
    not_found_404 = 0x84,
};

const char* code_name(Code c);

constexpr std::uint16_t kOptObserve = 6;
constexpr std::uint16_t kOptUriPath = 11;
constexpr std::uint16_t kOptContentFormat = 12;
constexpr std::uint16_t kOptUriQuery = 15;

// Content-format values for the payload codecs in use.
constexpr std::uint16_t kContentFormatTlv = 11542;
constexpr std::uint16_t kContentFormatCbor = 11544;

// Framing: kind(1) | code(1) | message_id(2 BE) | token_len(1) | token |
//          options (number:2 BE, len:2 BE, bytes)* | 0xFF | payload
struct Message {
    MsgKind kind = MsgKind::confirmable;
    Code code = Code::get;
    std::uint16_t message_id = 0;
    std::vector<std::uint8_t> token;
    std::vector<std::pair<std::uint16_t, std::vector<std::uint8_t>>> options;
    std::vector<std::uint8_t> payload;

    bool is_request() const { return static_cast<std::uint8_t>(code) < 0x20; }

    void add_option(std::uint16_t number, std::span<const std::uint8_t> value);
    void add_option_string(std::uint16_t number, const std::string& value);
    void set_uri_path(const Path& path);
    void set_uri_path_segments(const std::vector<std::string>& segments);
    void set_content_format(std::uint16_t format);

    std::vector<std::string> uri_path_segments() const;
    std::optional<Path> uri_path() const;  // nullopt when segments are not numeric
    std::vector<std::string> uri_queries() const;
    std::optional<std::uint32_t> observe() const;
    void set_observe(std::uint32_t seq);

    std::vector<std::uint8_t> encode() const;
    static Message decode(std::span<const std::uint8_t> data);

    // Response skeleton echoing message id and token.
    Message make_response(Code response_code) const;

    bool operator==(const Message&) const = default;
};

}  // namespace lwm2m
