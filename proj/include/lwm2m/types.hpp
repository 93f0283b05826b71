#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lwm2m/errors.hpp"

namespace lwm2m {

// Simulation clock, microseconds.
using SimTime = std::int64_t;
constexpr SimTime kMillisecond = 1000;
constexpr SimTime kSecond = 1000 * kMillisecond;

using ObjectId = std::uint16_t;
using InstanceId = std::uint16_t;
using ResourceId = std::uint16_t;
using ShortServerId = std::uint16_t;  // >= 1 for real servers
using ClientId = std::uint16_t;

// Short server id 0 denotes the bootstrap principal in ACL owner fields.
constexpr ShortServerId kBootstrapShortId = 0;

// Standard object ids.
constexpr ObjectId kAclObjectId = 2;
constexpr ObjectId kOscoreObjectId = 21;
constexpr ObjectId kGenericSensorObjectId = 3300;
constexpr ObjectId kLightControlObjectId = 3311;

// Extension objects (vendor range).
constexpr ObjectId kClientObjectId = 26241;
constexpr ObjectId kClientSecurityObjectId = 26242;
constexpr ObjectId kClientAclObjectId = 26243;

// Objects managed exclusively by server principals.
inline bool is_internal_object(ObjectId id) {
    return id == kAclObjectId || id == kOscoreObjectId || id == kClientObjectId ||
           id == kClientSecurityObjectId || id == kClientAclObjectId;
}

struct Path {
    ObjectId object_id = 0;
    std::optional<InstanceId> instance_id;
    std::optional<ResourceId> resource_id;

    Path() = default;
    explicit Path(ObjectId obj) : object_id(obj) {}
    Path(ObjectId obj, InstanceId inst) : object_id(obj), instance_id(inst) {}
    Path(ObjectId obj, InstanceId inst, ResourceId res)
        : object_id(obj), instance_id(inst), resource_id(res) {}

    bool is_object() const { return !instance_id.has_value(); }
    bool is_instance() const { return instance_id.has_value() && !resource_id.has_value(); }
    bool is_resource() const { return resource_id.has_value(); }

    std::string to_string() const;
    // Parses "/obj[/inst[/res]]"; throws malformed on bad syntax.
    static Path parse(const std::string& text);

    auto operator<=>(const Path&) const = default;
};

struct ObjectLink {
    ObjectId object_id = 0;
    InstanceId instance_id = 0;
    auto operator<=>(const ObjectLink&) const = default;
};

enum class ValueKind : std::uint8_t { integer, string, opaque, boolean, objlink };

const char* value_kind_name(ValueKind k);

// Typed resource content. Opaque values are capped at 1024 bytes so the
// fragmentation arithmetic downstream stays in a testable range.
class ResourceValue {
public:
    static constexpr std::size_t kMaxOpaqueBytes = 1024;

    static ResourceValue integer(std::int64_t v) { return ResourceValue(v); }
    static ResourceValue str(std::string v) { return ResourceValue(std::move(v)); }
    static ResourceValue boolean(bool v) { return ResourceValue(v); }
    static ResourceValue objlink(ObjectLink v) { return ResourceValue(v); }
    static ResourceValue opaque(std::vector<std::uint8_t> v) {
        if (v.size() > kMaxOpaqueBytes) raise(Errc::value_too_large, "opaque value exceeds 1024 bytes");
        return ResourceValue(std::move(v));
    }

    ValueKind kind() const { return static_cast<ValueKind>(value_.index()); }

    std::int64_t as_integer() const { return std::get<std::int64_t>(value_); }
    const std::string& as_string() const { return std::get<std::string>(value_); }
    const std::vector<std::uint8_t>& as_opaque() const { return std::get<std::vector<std::uint8_t>>(value_); }
    bool as_boolean() const { return std::get<bool>(value_); }
    ObjectLink as_objlink() const { return std::get<ObjectLink>(value_); }

    // Raw value bytes as carried in TLV records and single-resource reads.
    std::vector<std::uint8_t> leaf_bytes() const;
    static ResourceValue from_leaf_bytes(ValueKind kind, const std::uint8_t* data, std::size_t len);

    bool operator==(const ResourceValue&) const = default;

private:
    template <typename T>
    explicit ResourceValue(T v) : value_(std::move(v)) {}

    std::variant<std::int64_t, std::string, std::vector<std::uint8_t>, bool, ObjectLink> value_;
};

struct ObjectInstance {
    ObjectId object_id = 0;
    InstanceId instance_id = 0;
    std::map<ResourceId, ResourceValue> resources;

    bool operator==(const ObjectInstance&) const = default;
};

}  // namespace lwm2m
