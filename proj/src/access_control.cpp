#include "lwm2m/access_control.hpp"

namespace lwm2m {

std::string AccessFlags::letters() const {
    std::string out;
    if (has(Access::read)) out += 'R';
    if (has(Access::write)) out += 'W';
    if (has(Access::execute)) out += 'X';
    if (has(Access::del)) out += 'D';
    if (has(Access::create)) out += 'C';
    if (has(Access::discover)) out += 'V';
    if (out.empty()) out = "-";
    return out;
}

AccessFlags AccessFlags::from_names(const std::set<std::string>& names) {
    AccessFlags flags;
    for (const auto& n : names) {
        if (n == "read") flags = flags.with(Access::read);
        else if (n == "write") flags = flags.with(Access::write);
        else if (n == "execute") flags = flags.with(Access::execute);
        else if (n == "delete") flags = flags.with(Access::del);
        else if (n == "create") flags = flags.with(Access::create);
        else if (n == "discover") flags = flags.with(Access::discover);
        else raise(Errc::config_invalid, "unknown access flag: " + n);
    }
    return flags;
}

InstanceId AclStore::next_id(bool server_table) const {
    InstanceId id = 0;
    if (server_table) {
        while (server_acls_.count(id)) ++id;
    } else {
        while (client_acls_.count(id)) ++id;
    }
    return id;
}

InstanceId AclStore::add_server_acl(AclInstance instance) {
    if (find_server_acl(instance.object_ref, instance.instance_ref))
        raise(Errc::type_mismatch, "target already has a server ACL instance");
    if (server_acls_.count(instance.instance_id)) instance.instance_id = next_id(true);
    InstanceId id = instance.instance_id;
    server_acls_.emplace(id, std::move(instance));
    return id;
}

InstanceId AclStore::add_client_acl(ClientAclInstance instance) {
    if (find_client_acl(instance.object_ref, instance.instance_ref))
        raise(Errc::type_mismatch, "target already has a client ACL instance");
    if (client_acls_.count(instance.instance_id)) instance.instance_id = next_id(false);
    InstanceId id = instance.instance_id;
    client_acls_.emplace(id, std::move(instance));
    return id;
}

InstanceId AclStore::upsert_client_acl(ClientAclInstance instance) {
    for (auto it = client_acls_.begin(); it != client_acls_.end(); ++it) {
        if (it->second.object_ref == instance.object_ref && it->second.instance_ref == instance.instance_ref) {
            InstanceId id = it->first;
            instance.instance_id = id;
            it->second = std::move(instance);
            return id;
        }
    }
    return add_client_acl(std::move(instance));
}

const AclInstance* AclStore::find_server_acl(ObjectId object_ref, std::optional<InstanceId> instance_ref) const {
    for (const auto& [_, acl] : server_acls_)
        if (acl.object_ref == object_ref && acl.instance_ref == instance_ref) return &acl;
    return nullptr;
}

const ClientAclInstance* AclStore::find_client_acl(ObjectId object_ref, std::optional<InstanceId> instance_ref) const {
    for (const auto& [_, acl] : client_acls_)
        if (acl.object_ref == object_ref && acl.instance_ref == instance_ref) return &acl;
    return nullptr;
}

const AclInstance* AclStore::match_server(ObjectId object_id, std::optional<InstanceId> instance_id) const {
    if (instance_id)
        if (const auto* acl = find_server_acl(object_id, instance_id)) return acl;
    return find_server_acl(object_id, std::nullopt);
}

const ClientAclInstance* AclStore::match_client(ObjectId object_id, std::optional<InstanceId> instance_id) const {
    if (instance_id)
        if (const auto* acl = find_client_acl(object_id, instance_id)) return acl;
    return find_client_acl(object_id, std::nullopt);
}

std::set<ShortServerId> AclStore::owners() const {
    std::set<ShortServerId> out;
    for (const auto& [_, acl] : server_acls_)
        if (acl.owner != kBootstrapShortId) out.insert(acl.owner);
    for (const auto& [_, acl] : client_acls_)
        if (acl.owner != kBootstrapShortId) out.insert(acl.owner);
    return out;
}

AclInstance& AclStore::owned_server_acl(const Principal& principal, InstanceId id) {
    if (!principal.is_server()) raise(Errc::forbidden, "clients never mutate ACLs");
    auto it = server_acls_.find(id);
    if (it == server_acls_.end()) raise(Errc::not_found, "no such ACL instance");
    if (it->second.owner != principal.id) raise(Errc::forbidden, "principal is not the access control owner");
    return it->second;
}

ClientAclInstance& AclStore::owned_client_acl(const Principal& principal, InstanceId id) {
    if (!principal.is_server()) raise(Errc::forbidden, "clients never mutate ACLs");
    auto it = client_acls_.find(id);
    if (it == client_acls_.end()) raise(Errc::not_found, "no such client ACL instance");
    if (it->second.owner != principal.id) raise(Errc::forbidden, "principal is not the access control owner");
    return it->second;
}

void AclStore::set_server_entry(const Principal& principal, InstanceId acl_instance, ShortServerId subject,
                                AccessFlags flags) {
    owned_server_acl(principal, acl_instance).acl[subject] = flags;
}

void AclStore::set_client_entry(const Principal& principal, InstanceId acl_instance, ClientId subject,
                                AccessFlags flags) {
    owned_client_acl(principal, acl_instance).acl[subject] = flags;
}

void AclStore::remove_client_entry(const Principal& principal, InstanceId acl_instance, ClientId subject) {
    owned_client_acl(principal, acl_instance).acl.erase(subject);
}

void AclStore::set_client_owner(const Principal& principal, InstanceId acl_instance, ShortServerId new_owner) {
    owned_client_acl(principal, acl_instance).owner = new_owner;
}

void AclStore::remove_instances_for(ObjectId object_ref, InstanceId instance_ref) {
    for (auto it = server_acls_.begin(); it != server_acls_.end();) {
        if (it->second.object_ref == object_ref && it->second.instance_ref == instance_ref)
            it = server_acls_.erase(it);
        else
            ++it;
    }
    for (auto it = client_acls_.begin(); it != client_acls_.end();) {
        if (it->second.object_ref == object_ref && it->second.instance_ref == instance_ref)
            it = client_acls_.erase(it);
        else
            ++it;
    }
}

std::uint64_t AclStore::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    for (const auto& [id, acl] : server_acls_) {
        mix(id);
        mix(acl.object_ref);
        mix(acl.instance_ref ? *acl.instance_ref + 1u : 0u);
        mix(acl.owner);
        for (const auto& [sid, flags] : acl.acl) {
            mix(sid);
            mix(flags.bits());
        }
    }
    for (const auto& [id, acl] : client_acls_) {
        mix(0x10000u + id);
        mix(acl.object_ref);
        mix(acl.instance_ref ? *acl.instance_ref + 1u : 0u);
        mix(acl.owner);
        for (const auto& [cid, flags] : acl.acl) {
            mix(cid);
            mix(flags.bits());
        }
    }
    return h;
}

bool check_access(const Principal& principal, Access op, const Path& path, const AclStore& acls,
                  std::size_t server_account_count) {
    // Extension/internal objects are managed by servers alone.
    if (is_internal_object(path.object_id)) return principal.is_server();

    if (principal.is_server()) {
        // LwM2M default: a single-server deployment without ACLs grants full access.
        if (server_account_count <= 1 && acls.server_acls().empty()) return true;
        const AclInstance* acl = op == Access::create
                                     ? acls.find_server_acl(path.object_id, std::nullopt)
                                     : acls.match_server(path.object_id, path.instance_id);
        if (!acl) return false;
        auto it = acl->acl.find(principal.id);
        return it != acl->acl.end() && it->second.has(op);
    }

    // Clients: deny unless an explicit entry grants the bit.
    const ClientAclInstance* acl = op == Access::create
                                       ? acls.find_client_acl(path.object_id, std::nullopt)
                                       : acls.match_client(path.object_id, path.instance_id);
    if (!acl) return false;
    auto it = acl->acl.find(static_cast<ClientId>(principal.id));
    return it != acl->acl.end() && it->second.has(op);
}

std::pair<AclInstance, ClientAclInstance> apply_create_side_effects(
    ClientId creator, const ClientAclInstance& authorizing_acl, ObjectId object_id, InstanceId instance_id,
    AccessFlags grants, const std::set<ShortServerId>& known_servers) {
    if (!known_servers.count(authorizing_acl.owner))
        raise(Errc::owner_unknown, "authorizing ACL owner is not a registered server");

    AclInstance server_acl;
    server_acl.object_ref = object_id;
    server_acl.instance_ref = instance_id;
    server_acl.owner = authorizing_acl.owner;

    ClientAclInstance client_acl;
    client_acl.object_ref = object_id;
    client_acl.instance_ref = instance_id;
    client_acl.owner = authorizing_acl.owner;
    client_acl.acl[creator] = grants;

    return {std::move(server_acl), std::move(client_acl)};
}

}  // namespace lwm2m
