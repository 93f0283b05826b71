#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "lwm2m/types.hpp"

namespace lwm2m {

enum class Access : std::uint8_t {
    read = 0x01,
    write = 0x02,
    execute = 0x04,
    del = 0x08,
    create = 0x10,
    discover = 0x20,  // client ACLs only
};

class AccessFlags {
public:
    constexpr AccessFlags() = default;
    constexpr explicit AccessFlags(std::uint8_t bits) : bits_(bits & 0x3F) {}
    static constexpr AccessFlags of(Access a) { return AccessFlags(static_cast<std::uint8_t>(a)); }

    constexpr bool has(Access a) const { return (bits_ & static_cast<std::uint8_t>(a)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }

    constexpr AccessFlags with(Access a) const {
        return AccessFlags(static_cast<std::uint8_t>(bits_ | static_cast<std::uint8_t>(a)));
    }
    constexpr AccessFlags intersect(AccessFlags other) const {
        return AccessFlags(static_cast<std::uint8_t>(bits_ & other.bits_));
    }
    constexpr bool covers(AccessFlags other) const { return (other.bits_ & ~bits_) == 0; }

    // Compact letters R W X D C V (V = discover).
    std::string letters() const;
    static AccessFlags from_names(const std::set<std::string>& names);

    bool operator==(const AccessFlags&) const = default;

private:
    std::uint8_t bits_ = 0;
};

inline AccessFlags operator|(Access a, Access b) {
    return AccessFlags(static_cast<std::uint8_t>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b)));
}

// Server-facing access control object instance.
struct AclInstance {
    InstanceId instance_id = 0;
    ObjectId object_ref = 0;
    std::optional<InstanceId> instance_ref;
    std::map<ShortServerId, AccessFlags> acl;
    ShortServerId owner = kBootstrapShortId;
};

// Client-facing access control object instance; only servers mutate these.
struct ClientAclInstance {
    InstanceId instance_id = 0;
    ObjectId object_ref = 0;
    std::optional<InstanceId> instance_ref;
    std::map<ClientId, AccessFlags> acl;
    ShortServerId owner = kBootstrapShortId;
};

struct Principal {
    enum class Kind : std::uint8_t { server, client } kind = Kind::server;
    std::uint16_t id = 0;

    static Principal server(ShortServerId id) { return {Kind::server, id}; }
    static Principal client(ClientId id) { return {Kind::client, id}; }
    bool is_server() const { return kind == Kind::server; }

    auto operator<=>(const Principal&) const = default;
};

// Both ACL tables of one node. Each (object_ref, instance_ref) pair is
// referenced by at most one instance per table.
class AclStore {
public:
    InstanceId add_server_acl(AclInstance instance);
    InstanceId add_client_acl(ClientAclInstance instance);
    // Replaces any instance referencing the same target (re-provisioning).
    InstanceId upsert_client_acl(ClientAclInstance instance);

    const AclInstance* find_server_acl(ObjectId object_ref, std::optional<InstanceId> instance_ref) const;
    const ClientAclInstance* find_client_acl(ObjectId object_ref, std::optional<InstanceId> instance_ref) const;

    // Instance-level entry shadows the object-level one entirely.
    const AclInstance* match_server(ObjectId object_id, std::optional<InstanceId> instance_id) const;
    const ClientAclInstance* match_client(ObjectId object_id, std::optional<InstanceId> instance_id) const;

    const std::map<InstanceId, AclInstance>& server_acls() const { return server_acls_; }
    const std::map<InstanceId, ClientAclInstance>& client_acls() const { return client_acls_; }

    std::set<ShortServerId> owners() const;

    // Owner-gated mutations; principal must be a server and own the target.
    void set_server_entry(const Principal& principal, InstanceId acl_instance, ShortServerId subject, AccessFlags flags);
    void set_client_entry(const Principal& principal, InstanceId acl_instance, ClientId subject, AccessFlags flags);
    void remove_client_entry(const Principal& principal, InstanceId acl_instance, ClientId subject);
    void set_client_owner(const Principal& principal, InstanceId acl_instance, ShortServerId new_owner);
    void remove_instances_for(ObjectId object_ref, InstanceId instance_ref);

    // State fingerprint for no-mutation checks.
    std::uint64_t fingerprint() const;

private:
    std::map<InstanceId, AclInstance> server_acls_;
    std::map<InstanceId, ClientAclInstance> client_acls_;

    InstanceId next_id(bool server_table) const;
    AclInstance& owned_server_acl(const Principal& principal, InstanceId id);
    ClientAclInstance& owned_client_acl(const Principal& principal, InstanceId id);
};

// Total decision procedure. server_account_count feeds the single-server
// default (servers get full access when no ACLs exist at all).
bool check_access(const Principal& principal, Access op, const Path& path, const AclStore& acls,
                  std::size_t server_account_count);

// After an authorized client create: builds the two new ACL instances. The
// creator receives `grants` but never becomes owner.
std::pair<AclInstance, ClientAclInstance> apply_create_side_effects(
    ClientId creator, const ClientAclInstance& authorizing_acl, ObjectId object_id, InstanceId instance_id,
    AccessFlags grants, const std::set<ShortServerId>& known_servers);

constexpr AccessFlags kDefaultCreateGrants{0x03};  // read|write

}  // namespace lwm2m
