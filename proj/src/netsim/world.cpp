#include "lwm2m/netsim/world.hpp"

#include <algorithm>

namespace lwm2m::netsim {

std::vector<std::uint64_t> Medium::offer(SimTime start, SimTime end, std::uint64_t flight_id) {
    std::erase_if(active_, [start](const Tx& tx) { return tx.end <= start; });
    std::vector<std::uint64_t> collided;
    for (const Tx& tx : active_)
        if (tx.start < end && start < tx.end) collided.push_back(tx.flight_id);
    active_.push_back(Tx{start, end, flight_id});
    return collided;
}

Endpoint::Endpoint(World& world, std::string name, std::uint64_t seed)
    : world_(world), name_(std::move(name)), node_(name_, seed) {}

const Psk* Endpoint::psk_for(const std::string& peer) const {
    auto& node = const_cast<Node&>(node_);
    if (ClientAccount* account = node.client_by_endpoint(peer))
        return account->expired ? nullptr : &account->credentials;
    for (const auto& [sid, account] : node_.servers())
        if (account.uri == "coap://" + peer || account.uri == peer) return &account.credentials;
    return nullptr;
}

void Endpoint::transmit_message(const std::string& dest, const Message& msg, bool plaintext) {
    Datagram d;
    d.from = name_;
    d.to = dest;
    auto frame = msg.encode();
    if (plaintext) {
        d.kind = Datagram::Kind::plaintext;
        d.wire_size = frame.size();
        d.bytes = std::move(frame);
    } else {
        SecureChannel* ch = node_.channel(dest);
        if (!ch || !ch->established) raise(Errc::channel_closed, "no channel to " + dest);
        WireRecord record = seal(*ch, frame, msg.token, msg.is_request());
        d.kind = Datagram::Kind::record;
        d.wire_size = frame.size() + secure_overhead(ch->mode, msg.is_request());
        d.bytes = record.serialize();
    }
    world_.transmit(std::move(d));
}

void Endpoint::send_request(const std::string& dest, Message msg,
                            std::function<void(const Message&)> on_response,
                            std::function<void()> on_giveup, bool plaintext) {
    if (msg.token.empty()) msg.token = node_.next_token();
    msg.message_id = node_.next_mid();
    msg.kind = MsgKind::confirmable;
    std::string key(msg.token.begin(), msg.token.end());
    Exchange ex;
    ex.dest = dest;
    ex.request = msg;
    ex.plaintext = plaintext;
    ex.on_response = std::move(on_response);
    ex.on_giveup = std::move(on_giveup);
    pending_[key] = std::move(ex);
    try {
        transmit_message(dest, msg, plaintext);
    } catch (const Error&) {
        pending_.erase(key);  // refused locally, nothing on the wire
        throw;
    }
    arm_retransmit(key);
}

void Endpoint::arm_retransmit(const std::string& token_key) {
    Exchange& ex = pending_.at(token_key);
    SimTime wait = kAckTimeout << ex.attempt;
    ex.timer = world_.sim().after(wait, [this, token_key] {
        auto it = pending_.find(token_key);
        if (it == pending_.end()) return;
        Exchange& ex = it->second;
        if (ex.attempt + 1 >= kMaxRetransmit) {
            auto giveup = std::move(ex.on_giveup);
            pending_.erase(it);
            ++giveups;
            if (giveup) giveup();
            return;
        }
        ++ex.attempt;
        try {
            transmit_message(ex.dest, ex.request, ex.plaintext);
        } catch (const Error&) {
            // Channel vanished mid-exchange; keep the timer ladder running.
        }
        arm_retransmit(token_key);
    });
}

void Endpoint::send_nonconfirmable(const std::string& dest, Message msg) {
    if (msg.token.empty()) msg.token = node_.next_token();
    msg.message_id = node_.next_mid();
    msg.kind = MsgKind::non_confirmable;
    transmit_message(dest, msg, node_.channel(dest) == nullptr);
}

void Endpoint::send_response(const std::string& dest, const Message& response) {
    auto& window = dedup_[dest];
    for (auto& entry : window) {
        if (entry.mid == response.message_id) {
            entry.done = true;
            entry.response = response;
            break;
        }
    }
    bool plaintext = node_.channel(dest) == nullptr || !node_.channel(dest)->established;
    transmit_message(dest, response, plaintext);
}

void Endpoint::open_channel_to(const std::string& peer, std::function<void(bool)> done) {
    if (SecureChannel* ch = node_.channel(peer); ch && ch->established) {
        done(true);
        return;
    }
    SecurityMode mode = SecurityMode::handshake;
    if (ClientAccount* account = node_.client_by_endpoint(peer)) {
        if (account->expired || (node_.lifetime_enforcement && account->expires_at(world_.sim().now()))) {
            done(false);  // PeerExpired
            return;
        }
        mode = account->security_mode;
    }
    const Psk* psk = psk_for(peer);
    if (!psk) {
        done(false);  // NoCredentials
        return;
    }
    if (mode == SecurityMode::context) {
        // Context derivation needs no flights; the peer derives on first record.
        node_.ensure_channel(peer, mode, psk->key, true, true);
        done(true);
        return;
    }
    node_.ensure_channel(peer, mode, psk->key, true, false);
    handshake_waiters_[peer] = std::move(done);
    Datagram hello;
    hello.from = name_;
    hello.to = peer;
    hello.kind = Datagram::Kind::control;
    hello.control = FlightKind::hello;
    hello.wire_size = flight_wire_size(FlightKind::hello);
    world_.transmit(std::move(hello));
}

std::uint64_t Endpoint::last_notify_seq(const std::vector<std::uint8_t>& token) const {
    auto it = notify_seq_.find(std::string(token.begin(), token.end()));
    return it == notify_seq_.end() ? 0 : it->second;
}

void Endpoint::handle_control(const Datagram& d) {
    SimTime now = world_.sim().now();
    auto reply = [&](FlightKind kind, std::vector<std::uint8_t> cookie) {
        Datagram out;
        out.from = name_;
        out.to = d.from;
        out.kind = Datagram::Kind::control;
        out.control = kind;
        out.cookie = std::move(cookie);
        out.wire_size = flight_wire_size(kind);
        world_.transmit(std::move(out));
    };

    switch (d.control) {
        case FlightKind::hello: {
            if (!node_.cookie_required) {
                // Negative control for the amplification threat: allocate
                // handshake state on first contact.
                const Psk* psk = psk_for(d.from);
                crypto::Key key = psk ? psk->key : crypto::Key{};
                node_.ensure_channel(d.from, SecurityMode::handshake, key, false, false);
                reply(FlightKind::hello_verify, {});
                return;
            }
            auto cookie = node_.cookies().mint(now, cookie_source(d.from));
            reply(FlightKind::hello_verify, {cookie.begin(), cookie.end()});
            return;
        }
        case FlightKind::hello_verify:
            reply(FlightKind::hello_with_cookie, d.cookie);
            return;
        case FlightKind::hello_with_cookie: {
            if (node_.cookie_required && !node_.cookies().verify(now, cookie_source(d.from), d.cookie))
                return;  // CookieRejected: no state, no reply
            const Psk* psk = psk_for(d.from);
            if (!psk) return;
            SecureChannel& ch = node_.ensure_channel(d.from, SecurityMode::handshake, psk->key, false, false);
            ch.established = true;
            reply(FlightKind::finished, {});
            return;
        }
        case FlightKind::finished: {
            if (SecureChannel* ch = node_.channel(d.from)) ch->established = true;
            auto waiter = handshake_waiters_.find(d.from);
            if (waiter != handshake_waiters_.end()) {
                auto done = std::move(waiter->second);
                handshake_waiters_.erase(waiter);
                done(true);
            }
            return;
        }
    }
}

void Endpoint::on_datagram(const Datagram& d) {
    SimTime now = world_.sim().now();
    if (d.kind == Datagram::Kind::control) {
        handle_control(d);
        return;
    }

    if (d.kind == Datagram::Kind::plaintext) {
        Message msg;
        try {
            msg = Message::decode(d.bytes);
        } catch (const Error&) {
            return;
        }
        handle_frame(d.from, msg, false, 0);
        return;
    }

    // Secure record path.
    WireRecord record;
    try {
        record = WireRecord::parse(d.bytes);
    } catch (const Error&) {
        ++auth_failures;
        return;
    }

    // Lazy lifetime expiry: expired peers are answered like unknown ones.
    if (ClientAccount* account = node_.client_by_endpoint(d.from)) {
        if (node_.lifetime_enforcement && (account->expired || account->expires_at(now))) {
            node_.expire_accounts(now);
            Message rsp;
            rsp.kind = MsgKind::non_confirmable;
            rsp.code = Code::unauthorized_401;
            rsp.message_id = node_.next_mid();
            rsp.token = record.token;
            rsp.payload = encode_hints(node_.current_hints());
            ++node_.hint_responses;
            transmit_message(d.from, rsp, true);
            return;
        }
    }

    SecureChannel* ch = node_.channel(d.from);
    if (!ch || !ch->established) {
        // Context-mode peers derive the channel from the installed account.
        ClientAccount* account = node_.client_by_endpoint(d.from);
        if (account && !account->expired && account->security_mode == SecurityMode::context) {
            ch = &node_.ensure_channel(d.from, SecurityMode::context, account->credentials.key, false, true);
        } else {
            Message rsp;
            rsp.kind = MsgKind::non_confirmable;
            rsp.code = Code::unauthorized_401;
            rsp.message_id = node_.next_mid();
            rsp.token = record.token;
            rsp.payload = encode_hints(node_.current_hints());
            ++node_.hint_responses;
            transmit_message(d.from, rsp, true);
            return;
        }
    }

    std::vector<std::uint8_t> frame;
    try {
        frame = open(*ch, record);
    } catch (const Error& e) {
        if (e.code() == Errc::replay_detected)
            ++replays_dropped;
        else
            ++auth_failures;
        return;
    }

    Message msg;
    try {
        msg = Message::decode(frame);
    } catch (const Error&) {
        ++auth_failures;
        return;
    }
    handle_frame(d.from, msg, true, record.seq);
}

void Endpoint::handle_frame(const std::string& from, const Message& msg, bool authenticated,
                            std::uint64_t record_seq) {
    SimTime now = world_.sim().now();
    if (!msg.is_request()) {
        std::string key(msg.token.begin(), msg.token.end());
        auto it = pending_.find(key);
        if (it != pending_.end()) {
            world_.sim().cancel(it->second.timer);
            auto on_response = std::move(it->second.on_response);
            pending_.erase(it);
            if (on_response) on_response(msg);
            return;
        }
        if (msg.code == Code::content_205 && msg.observe().has_value()) {
            // Notification freshness: monotone record sequence per token.
            if (authenticated) {
                auto& last = notify_seq_[key];
                if (record_seq <= last) return;
                last = record_seq;
            }
            if (on_notification) on_notification(from, msg);
        }
        return;
    }

    // Request path: retransmission dedup window, applied at most once.
    auto& window = dedup_[from];
    for (const auto& entry : window) {
        if (entry.mid == msg.message_id) {
            if (entry.done) transmit_message(from, entry.response, !authenticated);
            return;  // still in flight or re-answered identically; never re-applied
        }
    }
    window.push_back(DedupEntry{msg.message_id, false, {}});
    if (window.size() > Node::kDedupWindow) window.pop_front();

    if (authenticated && app_request_hook && app_request_hook(from, msg)) return;

    if (authenticated && on_request_delivered) on_request_delivered(from, msg);

    std::optional<Principal> principal = authenticated ? node_.principal_for(from) : std::nullopt;
    Message rsp = node_.handle_request(principal, from, msg, now);
    send_response(from, rsp);
    pump_outgoing();
}

void Endpoint::pump_outgoing() {
    for (auto& out : node_.take_outgoing()) {
        if (!node_.channel(out.dest) || !node_.channel(out.dest)->established) continue;
        if (out.msg.kind == MsgKind::confirmable) {
            std::string key(out.msg.token.begin(), out.msg.token.end());
            Exchange ex;
            ex.dest = out.dest;
            ex.request = out.msg;
            pending_[key] = std::move(ex);
            transmit_message(out.dest, out.msg, false);
            arm_retransmit(key);
        } else {
            transmit_message(out.dest, out.msg, false);
        }
    }
}

World::World(Topology topology, LinkConfig links, std::uint64_t seed)
    : rng_(seed), topology_(std::move(topology)), links_(links) {}

Endpoint& World::add_endpoint(const std::string& name) {
    auto [it, inserted] = endpoints_.emplace(name, nullptr);
    if (inserted) it->second = std::make_unique<Endpoint>(*this, name, rng_.fork());
    return *it->second;
}

Endpoint& World::endpoint(const std::string& name) {
    auto it = endpoints_.find(name);
    if (it == endpoints_.end()) raise(Errc::unknown_node, name);
    return *it->second;
}

std::uint64_t World::sends_to(const std::string& dest) const {
    auto it = sends_to_.find(dest);
    return it == sends_to_.end() ? 0 : it->second;
}

Psk World::make_psk(const std::string& identity) {
    Psk psk;
    psk.identity = identity;
    for (auto& b : psk.key) b = static_cast<std::uint8_t>(rng_.next());
    return psk;
}

void World::transmit(Datagram datagram) {
    ++datagrams_sent_;
    ++sends_to_[datagram.to];
    if (!has_endpoint(datagram.to)) return;  // unknown destinations are never reachable

    auto flight = std::make_shared<Flight>();
    flight->route = topology_.route(datagram.from, datagram.to);
    flight->datagram = std::move(datagram);
    start_leg(flight);
}

void World::start_leg(const std::shared_ptr<Flight>& flight) {
    if (flight->cancelled) return;
    if (flight->leg >= flight->route.legs.size()) {
        deliver(flight);
        return;
    }
    const RouteLeg& leg = flight->route.legs[flight->leg];

    if (leg.kind == LinkKind::internet_uplink) {
        double jitter = links_.uplink_jitter_ms > 0 ? rng_.uniform01() * links_.uplink_jitter_ms : 0.0;
        SimTime duration = static_cast<SimTime>((links_.uplink_latency_ms + jitter) * kMillisecond);
        flight->pending = sim_.after(duration, [this, flight] {
            ++flight->leg;
            start_leg(flight);
        });
        return;
    }

    int nfrag = fragments_for(flight->datagram.wire_size);
    SimTime duration =
        static_cast<SimTime>((leg.hops + nfrag - 1) * links_.lowpan_latency_ms * kMillisecond);

    // Frame counters: the radio sender originates, every relay forwards.
    if (flight->leg == 0)
        counters_[flight->datagram.from].originated += static_cast<std::uint64_t>(nfrag);
    for (const auto& relay : leg.relays) counters_[relay].forwarded += static_cast<std::uint64_t>(nfrag);

    std::uint64_t id = next_flight_id_++;
    in_flight_[id] = flight;

    ++offered_;
    bool forced_drop = force_drop_at_ != 0 && offered_ == force_drop_at_;
    if (forced_drop) force_drop_at_ = 0;

    bool random_loss = false;
    for (int h = 0; h < leg.hops && !random_loss; ++h)
        for (int f = 0; f < nfrag && !random_loss; ++f)
            if (rng_.bernoulli(links_.loss_prob)) random_loss = true;

    SimTime now = sim_.now();
    auto collided = medium_.offer(now, now + duration, id);
    if (!collided.empty()) {
        // Colliding transmissions destroy each other.
        for (std::uint64_t cid : collided) {
            auto it = in_flight_.find(cid);
            if (it == in_flight_.end()) continue;
            it->second->cancelled = true;
            sim_.cancel(it->second->pending);
            in_flight_.erase(it);
        }
        in_flight_.erase(id);
        return;
    }
    if (forced_drop || random_loss) {
        flight->pending = sim_.after(duration, [this, id] { in_flight_.erase(id); });
        return;
    }

    flight->pending = sim_.after(duration, [this, flight, id] {
        in_flight_.erase(id);
        ++flight->leg;
        start_leg(flight);
    });
}

void World::deliver(const std::shared_ptr<Flight>& flight) {
    // Endpoint processing happens one node-proc delay after arrival.
    sim_.after(Endpoint::kProcDelay, [this, flight] {
        auto it = endpoints_.find(flight->datagram.to);
        if (it != endpoints_.end()) it->second->on_datagram(flight->datagram);
    });
}

}  // namespace lwm2m::netsim
