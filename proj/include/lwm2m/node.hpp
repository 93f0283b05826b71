#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lwm2m/access_control.hpp"
#include "lwm2m/accounts.hpp"
#include "lwm2m/authorization.hpp"
#include "lwm2m/channel.hpp"
#include "lwm2m/message.hpp"
#include "lwm2m/object_tree.hpp"

namespace lwm2m {

struct Observation {
    Principal observer;
    std::string observer_endpoint;
    Path path;
    std::vector<std::uint8_t> token;
    bool confirmable = false;  // notifications default to non-confirmable
    std::uint32_t notify_seq = 0;
};

// One LwM2M endpoint: object tree, accounts, ACL tables, secure channels,
// observations and the request handlers of the device management / service
// enablement and information reporting interfaces. Owned by a single
// simulator event loop; never shared across threads.
class Node {
public:
    static constexpr std::size_t kMaxObservations = 16;
    static constexpr std::size_t kDedupWindow = 32;

    explicit Node(std::string name, std::uint64_t seed = 1);

    const std::string& name() const { return name_; }

    ObjectTree& tree() { return tree_; }
    const ObjectTree& tree() const { return tree_; }
    AclStore& acls() { return acls_; }
    const AclStore& acls() const { return acls_; }

    // Accounts.
    void add_server_account(ServerAccount account);
    std::map<ShortServerId, ServerAccount>& servers() { return servers_; }
    const std::map<ShortServerId, ServerAccount>& servers() const { return servers_; }
    ClientAccount& put_client_account(ClientAccount account, SimTime now);
    ClientAccount* client_by_endpoint(const std::string& endpoint);
    const std::map<ClientId, ClientAccount>& clients() const { return clients_; }
    std::vector<ClientId> expire_accounts(SimTime now);

    // Owner server hints.
    void set_default_owner_uris(std::vector<std::string> uris) { default_owner_uris_ = std::move(uris); }
    OwnerServerHints current_hints() const;

    // Channels, keyed by peer endpoint name.
    SecureChannel& ensure_channel(const std::string& peer, SecurityMode mode, const crypto::Key& key,
                                  bool initiator, bool established);
    SecureChannel* channel(const std::string& peer);
    void close_channel(const std::string& peer);
    std::size_t secure_state_count() const { return channels_.size(); }
    CookieJar& cookies() { return cookies_; }

    // Principal identity of an authenticated peer endpoint.
    std::optional<Principal> principal_for(const std::string& peer_endpoint) const;

    // Dispatches one request; total (never throws on protocol input).
    // Anonymous principals get the unauthorized-with-hints response.
    Message handle_request(const std::optional<Principal>& principal, const std::string& peer_endpoint,
                           const Message& request, SimTime now);

    // Notifications produced by handlers or local set_value calls.
    struct Outgoing {
        std::string dest;
        Message msg;
    };
    std::vector<Outgoing> take_outgoing() { return std::exchange(outgoing_, {}); }

    // Local application write (the sensor "produces data").
    void set_value(const Path& path, ResourceValue value);

    const std::vector<Observation>& observations() const { return observations_; }

    // Server-role registration table: endpoint name -> registered.
    const std::map<std::string, std::string>& registered_endpoints() const { return registered_; }

    std::uint16_t next_mid() { return mid_seq_++; }
    std::vector<std::uint8_t> next_token();

    // OSCORE-object material staged by provisioning creates.
    const std::map<InstanceId, crypto::Key>& oscore_instances() const { return oscore_; }

    // Threat-model negative controls.
    bool lifetime_enforcement = true;
    bool cookie_required = true;

    // Counters used by the security checks.
    std::uint64_t hint_responses = 0;

private:
    Message dispatch(const Principal& principal, const std::string& peer_endpoint, const Message& request,
                     SimTime now);
    Message unauthorized_with_hints(const Message& request);
    Message generic_denied(const Message& request) { return request.make_response(Code::not_found_404); }

    Message handle_read(const Principal& principal, const Path& path, const Message& request);
    Message handle_observe(const Principal& principal, const std::string& peer, const Path& path,
                           const Message& request);
    Message handle_discover(const Principal& principal, const Path& path, const Message& request);
    Message handle_write(const Principal& principal, const Path& path, const Message& request);
    Message handle_create(const Principal& principal, const Path& path, const Message& request);
    Message handle_execute(const Principal& principal, const Path& path, const Message& request);
    Message handle_delete(const Principal& principal, const Path& path, const Message& request);
    Message handle_register(const std::string& peer_endpoint, const Message& request);

    Message materialize_internal(const Principal& principal, ObjectId object_id,
                                 std::optional<InstanceId> instance_id, const Message& request, SimTime now);
    bool apply_internal_values(const Principal& principal, ObjectId object_id, InstanceId instance,
                               const std::map<ResourceId, ResourceValue>& values, SimTime now);
    void emit_notifications(const Path& path);

    std::string name_;
    ObjectTree tree_;
    AclStore acls_;
    std::map<ShortServerId, ServerAccount> servers_;
    std::map<ClientId, ClientAccount> clients_;
    std::map<std::string, ClientId> client_ids_;  // endpoint -> id
    std::vector<std::string> default_owner_uris_;
    std::map<std::string, SecureChannel> channels_;
    CookieJar cookies_;
    std::vector<Observation> observations_;
    std::map<std::string, std::string> registered_;  // endpoint name -> peer
    std::map<InstanceId, crypto::Key> oscore_;
    std::vector<Outgoing> outgoing_;
    std::uint16_t mid_seq_;
    std::uint64_t token_seq_;
};

}  // namespace lwm2m
