#pragma once

#include <optional>
#include <set>
#include <string>

#include "lwm2m/authorization.hpp"
#include "lwm2m/netsim/world.hpp"

namespace lwm2m::netsim {

enum class ScenarioKind { c2c, server_centric };

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::c2c;
    SecurityMode mode = SecurityMode::handshake;  // C2C channel style
    bool random_topology = false;
    int forwarders = 0;
    std::size_t random_nodes = 20;
    LinkConfig links;
    std::uint32_t interval_ms = 1000;
    std::uint32_t count = 500;
    std::uint64_t seed = 1;
    std::uint32_t payload_bytes = 5;
    std::uint32_t lifetime_s = 0;
    PolicyTable policy;
    bool policy_given = false;

    // Throws ConfigInvalid on any deviation from the schema.
    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig from_file(const std::string& path);
};

struct UpdateRecord {
    std::uint64_t seq = 0;
    SimTime t_emit = -1;
    SimTime t_deliver = -1;
    bool delivered = false;
};

struct Metrics {
    std::vector<UpdateRecord> updates;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    double goodput_Bps = 0.0;
    double median_delivery_ms = -1.0;
    std::map<std::string, NodeCounters> node_frames;
    std::uint64_t provisioning_ops = 0;
    bool flow_completed = false;
    SimTime channel_setup_us = -1;
    SimTime initial_read_us = -1;
    std::size_t initial_read_wire = 0;
    std::size_t initial_content_wire = 0;
    std::vector<std::size_t> provisioning_wire_sizes;

    double delivery_rate() const { return sent == 0 ? 0.0 : static_cast<double>(delivered) / static_cast<double>(sent); }
    std::uint64_t total_frames() const;

    std::string to_csv() const;
    std::string summary_json(const ScenarioConfig& config) const;
};

// Server-side third-party authorization: policy check, fresh credentials and
// the sequential credential-distribution operations, all-or-nothing.
class AuthorizationServerApp {
public:
    AuthorizationServerApp(World& world, Endpoint& server, PolicyTable policy, SecurityMode mode,
                           std::uint32_t lifetime_s);

    std::uint64_t provisioning_ops() const { return provisioning_ops_; }
    const std::vector<std::size_t>& op_wire_sizes() const { return op_wire_sizes_; }
    const std::set<std::string>& issued_keys() const { return issued_keys_; }
    std::uint64_t grants() const { return grants_; }
    std::uint64_t refusals() const { return refusals_; }

private:
    bool handle_access_request(const std::string& requester, const Message& msg);
    void run_plan(const std::string& requester, const Message& original,
                  std::vector<ProvisioningOp> plan, std::size_t index,
                  std::vector<std::pair<std::string, Path>> created);
    void rollback(std::vector<std::pair<std::string, Path>> created);

    World& world_;
    Endpoint& server_;
    PolicyTable policy_;
    SecurityMode mode_;
    std::uint32_t lifetime_s_;
    ClientId next_client_id_ = 3;
    std::map<std::pair<std::string, std::string>, ClientId> assigned_ids_;  // (host, requester)
    std::uint64_t provisioning_ops_ = 0;
    std::vector<std::size_t> op_wire_sizes_;
    std::set<std::string> issued_keys_;
    std::uint64_t grants_ = 0;
    std::uint64_t refusals_ = 0;
};

// Builds the three-party world (host, requester, server behind the gateway)
// with pre-provisioned server accounts and the sensor object.
struct ScenarioWorld {
    explicit ScenarioWorld(const ScenarioConfig& config);

    ScenarioConfig config;
    World world;
    AuthorizationServerApp* auth_app = nullptr;

    Endpoint& host() { return world.endpoint("host"); }
    Endpoint& requester() { return world.endpoint("requester"); }
    Endpoint& server() { return world.endpoint("server"); }

    // Secure-channel + registration bring-up for both clients.
    void bring_up(std::function<void(bool)> done);

    // Full authorization sequence on the requester: unauthorized probe,
    // hints, access request, C2C channel, initial authorized read.
    void run_authorization_flow(std::function<void(bool)> done, Metrics* metrics);

    Path sensor_path() const { return Path(kGenericSensorObjectId, 0, 5700); }

private:
    std::unique_ptr<AuthorizationServerApp> auth_app_storage_;
};

Metrics run_scenario(const ScenarioConfig& config);

}  // namespace lwm2m::netsim
