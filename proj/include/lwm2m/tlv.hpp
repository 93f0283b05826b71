#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lwm2m/types.hpp"

namespace lwm2m::tlv {

// Record kinds, matching bits 7-6 of the type byte.
enum class Kind : std::uint8_t {
    object_instance = 0,
    resource_instance = 1,
    multiple_resource = 2,
    resource = 3,
};

struct Record {
    Kind kind = Kind::resource;
    std::uint16_t id = 0;
    std::vector<std::uint8_t> value;

    bool operator==(const Record&) const = default;
};

// Appends one record. Throws ValueTooLarge when the value exceeds the
// 24-bit length field.
void append_record(std::vector<std::uint8_t>& out, const Record& record);

// Decodes a whole record stream. Only object-instance and resource records
// are accepted (the subset this stack emits); nesting deeper than
// object-instance > resource is Malformed, as are truncated or trailing bytes.
std::vector<Record> decode_records(std::span<const std::uint8_t> payload);

// Instance payload: the instance's resources as a flat sequence of resource
// records in ascending resource id. Pure function of the input.
std::vector<std::uint8_t> encode_instance(const ObjectInstance& instance);

// Raw inverse: resource id -> value bytes.
std::map<ResourceId, std::vector<std::uint8_t>> decode_instance_raw(std::span<const std::uint8_t> payload);

// Typed inverse given the object's declared resource kinds.
std::map<ResourceId, ResourceValue> decode_instance(std::span<const std::uint8_t> payload,
                                                    const std::map<ResourceId, ValueKind>& schema);

}  // namespace lwm2m::tlv
