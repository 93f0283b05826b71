#include "lwm2m/netsim/sim.hpp"

namespace lwm2m::netsim {

EventId Sim::at(SimTime when, std::function<void()> fn) {
    EventId id = next_id_++;
    queue_.push(Event{when < now_ ? now_ : when, id, std::move(fn)});
    return id;
}

void Sim::run(SimTime limit) {
    while (!queue_.empty()) {
        Event ev = queue_.top();
        if (limit > 0 && ev.at > limit) break;
        queue_.pop();
        if (auto it = cancelled_.find(ev.id); it != cancelled_.end()) {
            cancelled_.erase(it);
            continue;
        }
        now_ = ev.at;
        ++executed_;
        ev.fn();
    }
}

}  // namespace lwm2m::netsim
