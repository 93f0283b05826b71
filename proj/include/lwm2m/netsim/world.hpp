#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lwm2m/netsim/sim.hpp"
#include "lwm2m/netsim/topology.hpp"
#include "lwm2m/node.hpp"

namespace lwm2m::netsim {

// Per-node frame counters (energy proxy).
struct NodeCounters {
    std::uint64_t originated = 0;
    std::uint64_t forwarded = 0;
};

struct Datagram {
    enum class Kind { plaintext, record, control };

    std::string from;
    std::string to;
    Kind kind = Kind::plaintext;
    std::vector<std::uint8_t> bytes;  // frame or serialized record
    FlightKind control = FlightKind::hello;
    std::vector<std::uint8_t> cookie;  // hello_verify / hello_with_cookie
    std::size_t wire_size = 0;
};

// The shared radio segment is one collision domain at desk scale: a lowpan
// transmission overlapping another in time destroys both, which is what makes
// delivery degrade once updates are emitted faster than the pipeline drains.
class Medium {
public:
    struct Tx {
        SimTime start;
        SimTime end;
        std::uint64_t flight_id;
    };

    // Registers [start, end); returns ids of in-flight transmissions it
    // collided with (the new one is then lost as well).
    std::vector<std::uint64_t> offer(SimTime start, SimTime end, std::uint64_t flight_id);

private:
    std::vector<Tx> active_;
};

class World;

// Transport agent around one Node: sealing, dedup, exchanges with CoAP
// retransmission timers, handshake flights and notification pumping.
class Endpoint {
public:
    static constexpr SimTime kProcDelay = 1 * kMillisecond;
    static constexpr SimTime kAckTimeout = 2 * kSecond;
    static constexpr int kMaxRetransmit = 4;  // wait ladder 2,4,8,16 s

    Endpoint(World& world, std::string name, std::uint64_t seed);

    Node& node() { return node_; }
    const std::string& name() const { return name_; }

    // Confirmable request over the channel to dest (or plaintext).
    void send_request(const std::string& dest, Message msg,
                      std::function<void(const Message&)> on_response,
                      std::function<void()> on_giveup = {}, bool plaintext = false);
    void send_nonconfirmable(const std::string& dest, Message msg);
    void send_response(const std::string& dest, const Message& response);

    // Establishes the secure channel to peer per its account's mode.
    void open_channel_to(const std::string& peer, std::function<void(bool)> done);

    void on_datagram(const Datagram& datagram);

    // Sends out pending notifications after local mutations.
    void pump_outgoing();

    // Hooks.
    std::function<void(const std::string& from, const Message&)> on_notification;
    std::function<bool(const std::string& from, const Message&)> app_request_hook;
    std::function<void(const std::string& from, const Message&)> on_request_delivered;

    // Monotone freshness per observation token (record sequence numbers).
    std::uint64_t last_notify_seq(const std::vector<std::uint8_t>& token) const;

    std::uint64_t auth_failures = 0;
    std::uint64_t replays_dropped = 0;
    std::uint64_t giveups = 0;

private:
    struct Exchange {
        std::string dest;
        Message request;
        bool plaintext = false;
        int attempt = 0;
        EventId timer = 0;
        std::function<void(const Message&)> on_response;
        std::function<void()> on_giveup;
    };

    struct DedupEntry {
        std::uint16_t mid;
        bool done = false;
        Message response;
    };

    void transmit_message(const std::string& dest, const Message& msg, bool plaintext);
    void arm_retransmit(const std::string& token_key);
    void handle_frame(const std::string& from, const Message& msg, bool authenticated, std::uint64_t record_seq);
    void handle_control(const Datagram& datagram);
    const Psk* psk_for(const std::string& peer) const;
    std::string cookie_source(const std::string& peer) const { return "addr:" + peer; }

    World& world_;
    std::string name_;
    Node node_;
    std::map<std::string, Exchange> pending_;           // token bytes -> exchange
    std::map<std::string, std::deque<DedupEntry>> dedup_;
    std::map<std::string, std::function<void(bool)>> handshake_waiters_;
    std::map<std::string, std::uint64_t> notify_seq_;   // token bytes -> last record seq
};

class World {
public:
    World(Topology topology, LinkConfig links, std::uint64_t seed);

    Sim& sim() { return sim_; }
    Rng& rng() { return rng_; }
    const Topology& topology() const { return topology_; }
    const LinkConfig& links() const { return links_; }

    Endpoint& add_endpoint(const std::string& name);
    Endpoint& endpoint(const std::string& name);
    bool has_endpoint(const std::string& name) const { return endpoints_.count(name) != 0; }

    void transmit(Datagram datagram);

    const std::map<std::string, NodeCounters>& counters() const { return counters_; }
    void reset_counters() { counters_.clear(); }
    std::uint64_t sends_to(const std::string& dest) const;
    std::uint64_t datagrams_sent() const { return datagrams_sent_; }

    // Test hook: drop the nth upcoming lowpan transmission (1 = next).
    void force_drop_in(std::uint64_t n) { force_drop_at_ = offered_ + n; }

    Psk make_psk(const std::string& identity);

private:
    struct Flight {
        Datagram datagram;
        Route route;
        std::size_t leg = 0;
        bool cancelled = false;
        EventId pending = 0;
    };

    void start_leg(const std::shared_ptr<Flight>& flight);
    void deliver(const std::shared_ptr<Flight>& flight);

    Sim sim_;
    Rng rng_;
    Topology topology_;
    LinkConfig links_;
    Medium medium_;
    std::map<std::string, std::unique_ptr<Endpoint>> endpoints_;
    std::map<std::uint64_t, std::shared_ptr<Flight>> in_flight_;
    std::map<std::string, NodeCounters> counters_;
    std::map<std::string, std::uint64_t> sends_to_;
    std::uint64_t next_flight_id_ = 1;
    std::uint64_t datagrams_sent_ = 0;
    std::uint64_t offered_ = 0;
    std::uint64_t force_drop_at_ = 0;
};

}  // namespace lwm2m::netsim
