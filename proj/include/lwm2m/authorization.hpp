#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "lwm2m/access_control.hpp"
#include "lwm2m/accounts.hpp"
#include "lwm2m/message.hpp"
#include "lwm2m/object_tree.hpp"

namespace lwm2m {

// Resource ids of the extension objects.
namespace objres {
// client object (26241)
constexpr ResourceId kClientId = 0;
constexpr ResourceId kEndpoint = 1;
constexpr ResourceId kLifetime = 2;
constexpr ResourceId kBinding = 3;
constexpr ResourceId kObservePeriod = 4;
// client security object (26242)
constexpr ResourceId kUri = 0;
constexpr ResourceId kMode = 2;
constexpr ResourceId kPskIdentity = 3;
constexpr ResourceId kPskKey = 5;
constexpr ResourceId kOscoreLink = 6;
constexpr ResourceId kPeerEndpoint = 7;
constexpr ResourceId kPeerLifetime = 8;
// OSCORE object (21)
constexpr ResourceId kMasterSecret = 0;
constexpr ResourceId kSenderId = 1;
constexpr ResourceId kRecipientId = 2;
// client access control object (26243)
constexpr ResourceId kObjectRef = 0;
constexpr ResourceId kInstanceRef = 1;
constexpr ResourceId kAclEntries = 2;
constexpr ResourceId kAclOwner = 3;
}  // namespace objres

// Schemas of the extension objects, declared on every node.
std::map<ObjectId, ObjectSchema> internal_schemas();

struct OwnerServerHints {
    std::vector<std::string> server_uris;  // non-empty
};

std::vector<std::uint8_t> encode_hints(const OwnerServerHints& hints);
OwnerServerHints decode_hints(std::span<const std::uint8_t> payload);

// Hints are a pure function of node-wide state (configured default owners
// plus the owners present in the ACL tables), never of the requested path, so
// denied-existing and nonexistent targets are indistinguishable.
OwnerServerHints hints_for(const AclStore& acls, const std::map<ShortServerId, ServerAccount>& servers,
                           const std::vector<std::string>& default_owner_uris);

// First hinted URI matching a server the requester is registered to; throws
// NoTrustedServer otherwise. Unknown URIs are skipped, never contacted.
ShortServerId validate_hints(const std::map<ShortServerId, ServerAccount>& accounts,
                             const OwnerServerHints& hints);

struct AccessRequestItem {
    ObjectId object_id = 0;
    std::optional<InstanceId> instance_id;
    AccessFlags flags;

    bool operator==(const AccessRequestItem&) const = default;
};

struct AccessRequest {
    std::string target_endpoint;
    bool need_credentials = false;
    std::vector<AccessRequestItem> items;  // non-empty, each with non-empty flags

    bool operator==(const AccessRequest&) const = default;
};

// POST /ac with uri-query "ep=<endpoint>" (+ "c" when credentials are
// needed); payload is a CBOR array of integer-keyed maps
// {1: object id, 2: instance id (absent = object level), 3: flags bitmask}.
Message encode_access_request(const AccessRequest& request);
AccessRequest decode_access_request(const Message& message);

// Pre-installed server policy: maximum grantable flags per
// (requester endpoint, host endpoint, object id).
class PolicyTable {
public:
    void allow(const std::string& requester, const std::string& host, ObjectId object_id, AccessFlags max);
    std::optional<AccessFlags> lookup(const std::string& requester, const std::string& host,
                                      ObjectId object_id) const;

    // Validates every item against the table; throws PolicyRefused when any
    // item exceeds its entry (all-or-nothing).
    void check(const std::string& requester, const AccessRequest& request) const;

private:
    std::map<std::tuple<std::string, std::string, ObjectId>, AccessFlags> rules_;
};

// Everything the provisioning sequence writes into the two clients.
struct ProvisioningMaterial {
    std::string requester_endpoint;
    std::string requester_uri;
    std::string host_endpoint;
    std::string host_uri;
    ClientId requester_id_on_host = 0;
    ClientId host_id_on_requester = 0;
    std::uint32_t lifetime_s = 0;
    SecurityMode mode = SecurityMode::handshake;
    Psk credentials;  // fresh PSK, or the context-mode master secret
    ShortServerId granting_server = 0;
};

struct ProvisioningOp {
    std::string dest_endpoint;
    Message request;
    std::string label;
};

// Builds the credential-distribution operations that follow an accepted
// access request: client object, (context: OSCORE object,) client security
// object and client access control object on the host, then the client
// security update on the requester. The access request itself is the first
// operation of the sequence, so handshake mode totals 5 and context mode 6.
std::vector<ProvisioningOp> build_provisioning_plan(const AccessRequest& request,
                                                    const ProvisioningMaterial& material);

std::vector<std::uint8_t> encode_acl_entries(const std::map<ClientId, AccessFlags>& entries);
std::map<ClientId, AccessFlags> decode_acl_entries(std::span<const std::uint8_t> blob);

}  // namespace lwm2m
