#include "lwm2m/object_tree.hpp"

namespace lwm2m {

void ObjectTree::declare_object(ObjectId object_id, ObjectSchema schema) {
    schemas_[object_id] = std::move(schema);
}

const ObjectSchema& ObjectTree::schema(ObjectId object_id) const {
    auto it = schemas_.find(object_id);
    if (it == schemas_.end()) raise(Errc::not_found, "object not declared: " + std::to_string(object_id));
    return it->second;
}

InstanceId ObjectTree::create_instance(ObjectId object_id, std::optional<InstanceId> instance_id,
                                       std::map<ResourceId, ResourceValue> resources) {
    const ObjectSchema& sch = schema(object_id);
    for (const auto& [rid, value] : resources) {
        auto it = sch.find(rid);
        if (it == sch.end()) raise(Errc::type_mismatch, "resource not in schema: " + std::to_string(rid));
        if (it->second != value.kind())
            raise(Errc::type_mismatch, "resource " + std::to_string(rid) + " expects " +
                                           value_kind_name(it->second));
    }
    auto& per_object = instances_[object_id];
    InstanceId id;
    if (instance_id) {
        id = *instance_id;
        if (per_object.count(id))
            raise(Errc::type_mismatch, "instance id already in use: " + std::to_string(id));
    } else {
        id = 0;
        while (per_object.count(id)) ++id;
    }
    per_object.emplace(id, std::move(resources));
    return id;
}

void ObjectTree::remove_instance(ObjectId object_id, InstanceId instance_id) {
    auto obj = instances_.find(object_id);
    if (obj == instances_.end() || obj->second.erase(instance_id) == 0)
        raise(Errc::not_found, Path(object_id, instance_id).to_string());
}

bool ObjectTree::has_instance(ObjectId object_id, InstanceId instance_id) const {
    auto obj = instances_.find(object_id);
    return obj != instances_.end() && obj->second.count(instance_id) != 0;
}

std::set<InstanceId> ObjectTree::instances(ObjectId object_id) const {
    std::set<InstanceId> out;
    auto obj = instances_.find(object_id);
    if (obj != instances_.end())
        for (const auto& [id, _] : obj->second) out.insert(id);
    return out;
}

const std::map<ResourceId, ResourceValue>& ObjectTree::instance_or_throw(ObjectId object_id,
                                                                         InstanceId instance_id) const {
    auto obj = instances_.find(object_id);
    if (obj == instances_.end()) raise(Errc::not_found, Path(object_id, instance_id).to_string());
    auto inst = obj->second.find(instance_id);
    if (inst == obj->second.end()) raise(Errc::not_found, Path(object_id, instance_id).to_string());
    return inst->second;
}

const ResourceValue& ObjectTree::get_resource(const Path& path) const {
    if (!path.is_resource()) raise(Errc::not_found, "resource path required: " + path.to_string());
    const auto& resources = instance_or_throw(path.object_id, *path.instance_id);
    auto it = resources.find(*path.resource_id);
    if (it == resources.end()) raise(Errc::not_found, path.to_string());
    return it->second;
}

ObjectInstance ObjectTree::snapshot(const Path& instance_path) const {
    if (!instance_path.is_instance()) raise(Errc::not_found, "instance path required: " + instance_path.to_string());
    ObjectInstance out;
    out.object_id = instance_path.object_id;
    out.instance_id = *instance_path.instance_id;
    out.resources = instance_or_throw(out.object_id, out.instance_id);
    return out;
}

void ObjectTree::set_resource(const Path& path, ResourceValue value) {
    if (!path.is_resource()) raise(Errc::not_found, "resource path required: " + path.to_string());
    const ObjectSchema& sch = schema(path.object_id);
    auto kind_it = sch.find(*path.resource_id);
    if (kind_it == sch.end()) raise(Errc::not_found, path.to_string());
    if (kind_it->second != value.kind())
        raise(Errc::type_mismatch,
              path.to_string() + " expects " + std::string(value_kind_name(kind_it->second)) + ", got " +
                  value_kind_name(value.kind()));

    auto obj = instances_.find(path.object_id);
    if (obj == instances_.end()) raise(Errc::not_found, path.to_string());
    auto inst = obj->second.find(*path.instance_id);
    if (inst == obj->second.end()) raise(Errc::not_found, path.to_string());

    inst->second.insert_or_assign(*path.resource_id, std::move(value));
    if (on_change) on_change(path);
}

}  // namespace lwm2m
