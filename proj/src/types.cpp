#include "lwm2m/types.hpp"

#include <charconv>

namespace lwm2m {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::not_found: return "NotFound";
        case Errc::type_mismatch: return "TypeMismatch";
        case Errc::malformed: return "Malformed";
        case Errc::value_too_large: return "ValueTooLarge";
        case Errc::forbidden: return "Forbidden";
        case Errc::owner_unknown: return "OwnerUnknown";
        case Errc::no_credentials: return "NoCredentials";
        case Errc::cookie_rejected: return "CookieRejected";
        case Errc::peer_expired: return "PeerExpired";
        case Errc::replay_detected: return "ReplayDetected";
        case Errc::auth_failed: return "AuthFailed";
        case Errc::channel_closed: return "ChannelClosed";
        case Errc::duplicate_endpoint: return "DuplicateEndpoint";
        case Errc::missing_ep: return "MissingEp";
        case Errc::policy_refused: return "PolicyRefused";
        case Errc::no_trusted_server: return "NoTrustedServer";
        case Errc::observation_evicted: return "ObservationEvicted";
        case Errc::unknown_node: return "UnknownNode";
        case Errc::config_invalid: return "ConfigInvalid";
        case Errc::give_up: return "GiveUp";
    }
    return "Unknown";
}

const char* value_kind_name(ValueKind k) {
    switch (k) {
        case ValueKind::integer: return "integer";
        case ValueKind::string: return "string";
        case ValueKind::opaque: return "opaque";
        case ValueKind::boolean: return "boolean";
        case ValueKind::objlink: return "objlink";
    }
    return "unknown";
}

std::string Path::to_string() const {
    std::string out = "/" + std::to_string(object_id);
    if (instance_id) {
        out += "/" + std::to_string(*instance_id);
        if (resource_id) out += "/" + std::to_string(*resource_id);
    }
    return out;
}

static std::uint16_t parse_id(const std::string& text, std::size_t begin, std::size_t end) {
    if (begin >= end) raise(Errc::malformed, "empty path segment");
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + end, value);
    if (ec != std::errc() || ptr != text.data() + end || value > 0xFFFF)
        raise(Errc::malformed, "bad path segment: " + text.substr(begin, end - begin));
    return static_cast<std::uint16_t>(value);
}

Path Path::parse(const std::string& text) {
    if (text.empty() || text[0] != '/') raise(Errc::malformed, "path must start with '/'");
    std::vector<std::uint16_t> ids;
    std::size_t pos = 1;
    while (pos <= text.size()) {
        std::size_t next = text.find('/', pos);
        if (next == std::string::npos) next = text.size();
        ids.push_back(parse_id(text, pos, next));
        pos = next + 1;
    }
    if (ids.empty() || ids.size() > 3) raise(Errc::malformed, "path needs 1..3 segments");
    Path p(ids[0]);
    if (ids.size() > 1) p.instance_id = ids[1];
    if (ids.size() > 2) p.resource_id = ids[2];
    return p;
}

std::vector<std::uint8_t> ResourceValue::leaf_bytes() const {
    switch (kind()) {
        case ValueKind::integer: {
            std::int64_t v = as_integer();
            int width = 8;
            if (v >= -128 && v <= 127) width = 1;
            else if (v >= -32768 && v <= 32767) width = 2;
            else if (v >= -2147483648LL && v <= 2147483647LL) width = 4;
            std::vector<std::uint8_t> out(static_cast<std::size_t>(width));
            for (int i = width - 1; i >= 0; --i) {
                out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xFF);
                v >>= 8;
            }
            return out;
        }
        case ValueKind::string: {
            const auto& s = as_string();
            return std::vector<std::uint8_t>(s.begin(), s.end());
        }
        case ValueKind::opaque:
            return as_opaque();
        case ValueKind::boolean:
            return {static_cast<std::uint8_t>(as_boolean() ? 1 : 0)};
        case ValueKind::objlink: {
            ObjectLink l = as_objlink();
            return {static_cast<std::uint8_t>(l.object_id >> 8), static_cast<std::uint8_t>(l.object_id),
                    static_cast<std::uint8_t>(l.instance_id >> 8), static_cast<std::uint8_t>(l.instance_id)};
        }
    }
    raise(Errc::malformed, "unreachable value kind");
}

ResourceValue ResourceValue::from_leaf_bytes(ValueKind kind, const std::uint8_t* data, std::size_t len) {
    switch (kind) {
        case ValueKind::integer: {
            if (len != 1 && len != 2 && len != 4 && len != 8)
                raise(Errc::malformed, "integer value must be 1/2/4/8 bytes");
            std::int64_t v = (data[0] & 0x80) ? -1 : 0;  // sign extend
            for (std::size_t i = 0; i < len; ++i) v = (v << 8) | data[i];
            return integer(v);
        }
        case ValueKind::string:
            return str(std::string(reinterpret_cast<const char*>(data), len));
        case ValueKind::opaque:
            if (len > kMaxOpaqueBytes) raise(Errc::malformed, "opaque value exceeds 1024 bytes");
            return opaque(std::vector<std::uint8_t>(data, data + len));
        case ValueKind::boolean:
            if (len != 1 || data[0] > 1) raise(Errc::malformed, "boolean value must be one byte 0/1");
            return boolean(data[0] == 1);
        case ValueKind::objlink: {
            if (len != 4) raise(Errc::malformed, "objlink value must be 4 bytes");
            ObjectLink l;
            l.object_id = static_cast<ObjectId>((data[0] << 8) | data[1]);
            l.instance_id = static_cast<InstanceId>((data[2] << 8) | data[3]);
            return objlink(l);
        }
    }
    raise(Errc::malformed, "unreachable value kind");
}

}  // namespace lwm2m
