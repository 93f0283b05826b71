#include "lwm2m/netsim/topology.hpp"

#include <algorithm>
#include <cmath>

#include "lwm2m/errors.hpp"

namespace lwm2m::netsim {

int fragments_for(std::size_t payload_total_bytes) {
    if (payload_total_bytes <= static_cast<std::size_t>(FrameBudget::kFirstFragmentBudget)) return 1;
    std::size_t rest = payload_total_bytes - FrameBudget::kFirstFragmentBudget;
    return 1 + static_cast<int>((rest + FrameBudget::kNextFragmentBudget - 1) /
                                FrameBudget::kNextFragmentBudget);
}

int RandomPlacement::hops_between(std::size_t a, std::size_t b) const {
    double dx = positions[a].first - positions[b].first;
    double dy = positions[a].second - positions[b].second;
    double dist = std::sqrt(dx * dx + dy * dy);
    // Radio range matches the maximum placement spacing: 6.6 m per hop.
    return std::max(1, static_cast<int>(std::ceil(dist / 6.6)));
}

RandomPlacement make_random_placement(std::size_t node_count, Rng& rng) {
    RandomPlacement placement;
    const double side = 6.6 * std::sqrt(static_cast<double>(node_count));
    while (placement.positions.size() < node_count) {
        double x = rng.uniform01() * side;
        double y = rng.uniform01() * side;
        bool ok = true;
        for (const auto& [px, py] : placement.positions) {
            double d = std::sqrt((px - x) * (px - x) + (py - y) * (py - y));
            if (d < 2.2) {
                ok = false;
                break;
            }
        }
        if (ok) placement.positions.emplace_back(x, y);
    }
    placement.gateway_index = 0;
    placement.host_index = 1 + rng.below(static_cast<std::uint32_t>(node_count - 1));
    do {
        placement.requester_index = 1 + rng.below(static_cast<std::uint32_t>(node_count - 1));
    } while (placement.requester_index == placement.host_index);
    return placement;
}

Topology Topology::chain(int forwarders) {
    if (forwarders < 0) raise(Errc::config_invalid, "forwarder count must be >= 0");
    Topology t;
    t.forwarders_ = forwarders;
    t.host_gw_hops_ = forwarders + 1;
    t.requester_gw_hops_ = forwarders + 1;
    t.c2c_hops_ = 1;  // host and requester are radio neighbours
    return t;
}

Topology Topology::random(std::size_t node_count, std::uint64_t seed) {
    if (node_count < 3) raise(Errc::config_invalid, "random topology needs at least 3 nodes");
    Rng rng(seed);
    RandomPlacement placement = make_random_placement(node_count, rng);
    Topology t;
    t.random_mode_ = true;
    t.host_gw_hops_ = placement.hops_between(placement.host_index, placement.gateway_index);
    t.requester_gw_hops_ = placement.hops_between(placement.requester_index, placement.gateway_index);
    t.c2c_hops_ = placement.hops_between(placement.host_index, placement.requester_index);
    t.forwarders_ = std::max(t.host_gw_hops_, t.requester_gw_hops_) - 1;
    return t;
}

std::vector<std::string> Topology::chain_relays(bool towards_gateway, int hops) const {
    // host/requester -> f1 -> ... -> fN -> gw; the far end terminates the leg.
    std::vector<std::string> relays;
    for (int i = 1; i < hops; ++i)
        relays.push_back("f" + std::to_string(towards_gateway ? i : hops - i));
    return relays;
}

Route Topology::route(const std::string& from, const std::string& to) const {
    auto lowpan = [&](int hops, bool towards_gateway, bool terminates_at_gw) {
        RouteLeg leg;
        leg.kind = LinkKind::lowpan_hop;
        leg.hops = hops;
        leg.relays = chain_relays(towards_gateway, hops);
        if (terminates_at_gw && !towards_gateway) {
            // gw originates the leg when forwarding downwards.
        }
        return leg;
    };
    auto uplink = [] {
        RouteLeg leg;
        leg.kind = LinkKind::internet_uplink;
        leg.hops = 1;
        return leg;
    };

    Route r;
    bool from_server = from == "server";
    bool to_server = to == "server";
    if (from_server && to_server) raise(Errc::config_invalid, "no server-to-server route");

    if (!from_server && !to_server) {
        // Direct client-to-client radio path.
        RouteLeg leg;
        leg.kind = LinkKind::lowpan_hop;
        leg.hops = c2c_hops_;
        for (int i = 1; i < c2c_hops_; ++i) leg.relays.push_back("r" + std::to_string(i));
        r.legs.push_back(std::move(leg));
        return r;
    }

    if (to_server) {
        int hops = from == "host" ? host_gw_hops_ : requester_gw_hops_;
        RouteLeg up = lowpan(hops, true, true);
        up.relays.push_back("gw");
        r.legs.push_back(std::move(up));
        r.legs.push_back(uplink());
        return r;
    }

    // server -> client: uplink first, then down the chain from the gateway.
    int hops = to == "host" ? host_gw_hops_ : requester_gw_hops_;
    r.legs.push_back(uplink());
    RouteLeg down = lowpan(hops, false, true);
    down.relays.insert(down.relays.begin(), "gw");
    r.legs.push_back(std::move(down));
    return r;
}

}  // namespace lwm2m::netsim
