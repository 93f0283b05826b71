#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>

#include "lwm2m/types.hpp"

namespace lwm2m {

using ObjectSchema = std::map<ResourceId, ValueKind>;

// The node's object/instance/resource store. The resource kind registry is
// fixed at construction; instances come and go at runtime. Mutations fire
// on_change so observers can be flagged dirty.
class ObjectTree {
public:
    ObjectTree() = default;
    explicit ObjectTree(std::map<ObjectId, ObjectSchema> schemas) : schemas_(std::move(schemas)) {}

    void declare_object(ObjectId object_id, ObjectSchema schema);
    bool knows_object(ObjectId object_id) const { return schemas_.count(object_id) != 0; }
    const ObjectSchema& schema(ObjectId object_id) const;

    // Creates an instance with the given resources; picks the next free
    // instance id when none is requested. Throws on duplicate id or
    // kind/schema mismatch.
    InstanceId create_instance(ObjectId object_id, std::optional<InstanceId> instance_id,
                               std::map<ResourceId, ResourceValue> resources);
    void remove_instance(ObjectId object_id, InstanceId instance_id);
    bool has_instance(ObjectId object_id, InstanceId instance_id) const;
    std::set<InstanceId> instances(ObjectId object_id) const;

    const ResourceValue& get_resource(const Path& path) const;
    ObjectInstance snapshot(const Path& instance_path) const;
    void set_resource(const Path& path, ResourceValue value);

    // Called after every successful set_resource.
    std::function<void(const Path&)> on_change;

private:
    std::map<ObjectId, ObjectSchema> schemas_;
    std::map<ObjectId, std::map<InstanceId, std::map<ResourceId, ResourceValue>>> instances_;

    const std::map<ResourceId, ResourceValue>& instance_or_throw(ObjectId object_id, InstanceId instance_id) const;
};

}  // namespace lwm2m
