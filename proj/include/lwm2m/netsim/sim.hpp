#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "lwm2m/types.hpp"

namespace lwm2m::netsim {

// Deterministic RNG. Distribution helpers are hand-rolled so byte-identical
// behavior does not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed ? seed : 0x5EED) {}

    std::uint64_t next() { return engine_(); }
    std::uint32_t below(std::uint32_t n) { return n == 0 ? 0 : static_cast<std::uint32_t>(next() % n); }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return p > 0.0 && uniform01() < p; }

    std::uint64_t fork() { return next() ^ 0xA5A5A5A5DEADBEEFULL; }

private:
    std::mt19937_64 engine_;
};

using EventId = std::uint64_t;

// Single-threaded discrete-event loop. Event order is total: (time, id).
class Sim {
public:
    SimTime now() const { return now_; }

    EventId at(SimTime when, std::function<void()> fn);
    EventId after(SimTime delay, std::function<void()> fn) { return at(now_ + delay, std::move(fn)); }
    void cancel(EventId id) { cancelled_.insert(id); }

    // Runs until the queue drains or the clock passes `limit` (0 = no limit).
    void run(SimTime limit = 0);

    std::size_t executed_events() const { return executed_; }

private:
    struct Event {
        SimTime at;
        EventId id;
        std::function<void()> fn;
        bool operator>(const Event& other) const {
            return at != other.at ? at > other.at : id > other.id;
        }
    };

    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::set<EventId> cancelled_;
    SimTime now_ = 0;
    EventId next_id_ = 1;
    std::size_t executed_ = 0;
};

}  // namespace lwm2m::netsim
