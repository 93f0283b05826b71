#include "lwm2m/message.hpp"

#include <algorithm>

namespace lwm2m {

const char* code_name(Code c) {
    switch (c) {
        case Code::get: return "GET";
        case Code::post: return "POST";
        case Code::put: return "PUT";
        case Code::del: return "DELETE";
        case Code::created_201: return "2.01";
        case Code::changed_204: return "2.04";
        case Code::content_205: return "2.05";
        case Code::bad_request_400: return "4.00";
        case Code::unauthorized_401: return "4.01";
        case Code::not_found_404: return "4.04";
    }
    return "?";
}

void Message::add_option(std::uint16_t number, std::span<const std::uint8_t> value) {
    options.emplace_back(number, std::vector<std::uint8_t>(value.begin(), value.end()));
}

void Message::add_option_string(std::uint16_t number, const std::string& value) {
    options.emplace_back(number, std::vector<std::uint8_t>(value.begin(), value.end()));
}

void Message::set_uri_path(const Path& path) {
    add_option_string(kOptUriPath, std::to_string(path.object_id));
    if (path.instance_id) add_option_string(kOptUriPath, std::to_string(*path.instance_id));
    if (path.resource_id) add_option_string(kOptUriPath, std::to_string(*path.resource_id));
}

void Message::set_uri_path_segments(const std::vector<std::string>& segments) {
    for (const auto& s : segments) add_option_string(kOptUriPath, s);
}

void Message::set_content_format(std::uint16_t format) {
    std::vector<std::uint8_t> bytes{static_cast<std::uint8_t>(format >> 8),
                                    static_cast<std::uint8_t>(format & 0xFF)};
    add_option(kOptContentFormat, bytes);
}

std::vector<std::string> Message::uri_path_segments() const {
    std::vector<std::string> out;
    for (const auto& [num, bytes] : options)
        if (num == kOptUriPath) out.emplace_back(bytes.begin(), bytes.end());
    return out;
}

std::optional<Path> Message::uri_path() const {
    auto segments = uri_path_segments();
    if (segments.empty() || segments.size() > 3) return std::nullopt;
    std::string text;
    for (const auto& s : segments) text += "/" + s;
    try {
        return Path::parse(text);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::vector<std::string> Message::uri_queries() const {
    std::vector<std::string> out;
    for (const auto& [num, bytes] : options)
        if (num == kOptUriQuery) out.emplace_back(bytes.begin(), bytes.end());
    return out;
}

std::optional<std::uint32_t> Message::observe() const {
    for (const auto& [num, bytes] : options) {
        if (num != kOptObserve) continue;
        std::uint32_t v = 0;
        for (auto b : bytes) v = (v << 8) | b;
        return v;
    }
    return std::nullopt;
}

void Message::set_observe(std::uint32_t seq) {
    std::vector<std::uint8_t> bytes;
    if (seq > 0xFFFF) bytes.push_back(static_cast<std::uint8_t>(seq >> 16));
    if (seq > 0xFF) bytes.push_back(static_cast<std::uint8_t>(seq >> 8));
    bytes.push_back(static_cast<std::uint8_t>(seq & 0xFF));
    add_option(kOptObserve, bytes);
}

std::vector<std::uint8_t> Message::encode() const {
    if (token.size() > 8) raise(Errc::value_too_large, "token exceeds 8 bytes");
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(kind));
    out.push_back(static_cast<std::uint8_t>(code));
    out.push_back(static_cast<std::uint8_t>(message_id >> 8));
    out.push_back(static_cast<std::uint8_t>(message_id & 0xFF));
    out.push_back(static_cast<std::uint8_t>(token.size()));
    out.insert(out.end(), token.begin(), token.end());
    for (const auto& [number, bytes] : options) {
        if ((number >> 8) == 0xFF) raise(Errc::malformed, "option number collides with payload marker");
        if (bytes.size() > 0xFFFF) raise(Errc::value_too_large, "option too long");
        out.push_back(static_cast<std::uint8_t>(number >> 8));
        out.push_back(static_cast<std::uint8_t>(number & 0xFF));
        out.push_back(static_cast<std::uint8_t>(bytes.size() >> 8));
        out.push_back(static_cast<std::uint8_t>(bytes.size() & 0xFF));
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    out.push_back(0xFF);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

namespace {

bool valid_code(std::uint8_t code) {
    switch (static_cast<Code>(code)) {
        case Code::get: case Code::post: case Code::put: case Code::del:
        case Code::created_201: case Code::changed_204: case Code::content_205:
        case Code::bad_request_400: case Code::unauthorized_401: case Code::not_found_404:
            return true;
    }
    return false;
}

}  // namespace

Message Message::decode(std::span<const std::uint8_t> data) {
    if (data.size() < 5) raise(Errc::malformed, "frame too short");
    Message msg;
    if (data[0] > 2) raise(Errc::malformed, "bad message kind");
    msg.kind = static_cast<MsgKind>(data[0]);
    if (!valid_code(data[1])) raise(Errc::malformed, "unknown message code");
    msg.code = static_cast<Code>(data[1]);
    msg.message_id = static_cast<std::uint16_t>((data[2] << 8) | data[3]);
    std::size_t token_len = data[4];
    if (token_len > 8) raise(Errc::malformed, "token length exceeds 8");
    std::size_t pos = 5;
    if (pos + token_len > data.size()) raise(Errc::malformed, "truncated token");
    msg.token.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                     data.begin() + static_cast<std::ptrdiff_t>(pos + token_len));
    pos += token_len;

    while (true) {
        if (pos >= data.size()) raise(Errc::malformed, "missing payload marker");
        if (data[pos] == 0xFF) {
            ++pos;
            break;
        }
        if (pos + 4 > data.size()) raise(Errc::malformed, "truncated option header");
        std::uint16_t number = static_cast<std::uint16_t>((data[pos] << 8) | data[pos + 1]);
        std::size_t len = static_cast<std::size_t>((data[pos + 2] << 8) | data[pos + 3]);
        pos += 4;
        if (pos + len > data.size()) raise(Errc::malformed, "truncated option value");
        msg.options.emplace_back(number, std::vector<std::uint8_t>(
                                             data.begin() + static_cast<std::ptrdiff_t>(pos),
                                             data.begin() + static_cast<std::ptrdiff_t>(pos + len)));
        pos += len;
    }
    msg.payload.assign(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end());
    return msg;
}

Message Message::make_response(Code response_code) const {
    Message rsp;
    rsp.kind = kind == MsgKind::confirmable ? MsgKind::ack : MsgKind::non_confirmable;
    rsp.code = response_code;
    rsp.message_id = message_id;
    rsp.token = token;
    return rsp;
}

}  // namespace lwm2m
