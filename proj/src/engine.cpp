#include "csim/engine.hpp"

#include <stdexcept>
#include <string>

namespace csim::engine {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::SlotStart: return "slot-start";
        case EventKind::Beacon: return "beacon";
        case EventKind::Transmission: return "transmission";
        case EventKind::AckDeadline: return "ack-deadline";
        case EventKind::SuperframeBoundary: return "superframe-boundary";
        case EventKind::MobilityStep: return "mobility-step";
        case EventKind::BleBroadcast: return "ble-broadcast";
    }
    return "unknown";
}

EventHandle EventQueue::push(Event event) {
    live_.insert(event.sequence);
    EventHandle handle{event.sequence};
    heap_.push(std::move(event));
    return handle;
}

bool EventQueue::cancel(EventHandle handle) {
    if (live_.erase(handle.sequence) == 0) return false;
    cancelled_.insert(handle.sequence);
    return true;
}

void EventQueue::drop_cancelled() {
    while (!heap_.empty()) {
        auto it = cancelled_.find(heap_.top().sequence);
        if (it == cancelled_.end()) return;
        cancelled_.erase(it);
        heap_.pop();
    }
}

bool EventQueue::empty() const { return live_.empty(); }

const Event& EventQueue::top() {
    drop_cancelled();
    if (heap_.empty()) throw std::logic_error("EventQueue::top on empty queue");
    return heap_.top();
}

Event EventQueue::pop() {
    drop_cancelled();
    if (heap_.empty()) throw std::logic_error("EventQueue::pop on empty queue");
    Event e = heap_.top();
    heap_.pop();
    live_.erase(e.sequence);
    return e;
}

EventHandle Simulator::schedule(SimTime time, EventKind kind, EventPayload payload) {
    if (time < clock_) {
        throw std::logic_error("event scheduled in the past: t=" + std::to_string(time.ticks) +
                               " clock=" + std::to_string(clock_.ticks));
    }
    return queue_.push(Event{time, next_sequence_++, kind, payload});
}

void Simulator::on(EventKind kind, Handler handler) {
    handlers_.at(static_cast<std::size_t>(kind)) = std::move(handler);
}

std::size_t Simulator::run_until(SimTime end) {
    if (end < clock_) throw std::logic_error("run_until target precedes the clock");
    std::size_t count = 0;
    while (!queue_.empty() && queue_.top().time <= end) {
        Event e = queue_.pop();
        clock_ = e.time;
        if (observer_) observer_(e);
        if (auto& h = handlers_[static_cast<std::size_t>(e.kind)]) h(e);
        ++count;
    }
    clock_ = end;
    processed_ += count;
    return count;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index over empty range");
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

bool RngStream::bernoulli(double p) {
    // always consume one draw so the sequence does not depend on p
    return uniform() < p;
}

double RngStream::gaussian() { return normal_(engine_); }

std::uint64_t replication_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace csim::engine
