#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lwm2m/netsim/sim.hpp"
#include "lwm2m/types.hpp"

namespace lwm2m::netsim {

enum class LinkKind { lowpan_hop, internet_uplink };

struct LinkSpec {
    double latency_ms = 15.0;  // per lowpan hop
    double loss_prob = 0.0;
    LinkKind kind = LinkKind::lowpan_hop;
};

constexpr double kDefaultHopLatencyMs = 15.0;
constexpr double kDefaultUplinkLatencyMs = 78.0;

// IEEE 802.15.4 byte budget: 127-byte PHY frames, 23 bytes of MAC overhead
// leave 104 bytes for upper layers; the adaptation layer takes 41 of those in
// the first frame. Follow-up fragments spend 8 bytes on the fragmentation
// header.
struct FrameBudget {
    static constexpr int kPhyMtu = 127;
    static constexpr int kMacOverhead = 23;
    static constexpr int kAdaptationOverhead = 41;
    static constexpr int kLinkPayload = kPhyMtu - kMacOverhead;             // 104
    static constexpr int kFirstFragmentBudget = kLinkPayload - kAdaptationOverhead;  // 63
    static constexpr int kNextFragmentBudget = kLinkPayload - 8;            // 96
};

// Number of link frames needed for `payload_total_bytes` of message bytes
// above the adaptation layer.
int fragments_for(std::size_t payload_total_bytes);

// One leg of a route: either a radio path of `hops` store-and-forward hops
// (with the named relays in between) or the wired internet uplink.
struct RouteLeg {
    LinkKind kind = LinkKind::lowpan_hop;
    int hops = 0;
    std::vector<std::string> relays;  // forwarding nodes, for the frame counters
};

struct Route {
    std::vector<RouteLeg> legs;
};

struct LinkConfig {
    double lowpan_latency_ms = kDefaultHopLatencyMs;
    double uplink_latency_ms = kDefaultUplinkLatencyMs;
    double uplink_jitter_ms = 0.0;
    double loss_prob = 0.0;
};

// Node placement for the randomized 20-node experiment: seeded positions with
// 2.2 m minimum spacing; inter-node distance maps linearly to hop count.
struct RandomPlacement {
    std::vector<std::pair<double, double>> positions;
    std::size_t host_index = 0;
    std::size_t requester_index = 0;
    std::size_t gateway_index = 0;

    int hops_between(std::size_t a, std::size_t b) const;
};

RandomPlacement make_random_placement(std::size_t node_count, Rng& rng);

// The deployment graph: fixed endpoints "host", "requester", "server" plus a
// forwarder chain towards the gateway (or a random placement).
class Topology {
public:
    static Topology chain(int forwarders);
    static Topology random(std::size_t node_count, std::uint64_t seed);

    // Route between endpoints; "server" sits behind the uplink.
    Route route(const std::string& from, const std::string& to) const;

    int forwarders() const { return forwarders_; }

private:
    int forwarders_ = 0;          // chain mode
    bool random_mode_ = false;
    int host_gw_hops_ = 1;
    int requester_gw_hops_ = 1;
    int c2c_hops_ = 1;

    std::vector<std::string> chain_relays(bool towards_gateway, int hops) const;
};

}  // namespace lwm2m::netsim
