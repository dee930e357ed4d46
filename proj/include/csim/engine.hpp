#pragma once

// Deterministic discrete-event core: slot-granular clock, ordered event
// queue with FIFO tie-break, per-entity random streams.

#include <compare>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace csim::engine {

/// Time expressed in whole slots. One tick = one time-slot.
struct SimTime {
    std::int64_t ticks = 0;

    constexpr auto operator<=>(const SimTime&) const = default;
    constexpr SimTime operator+(std::int64_t dt) const { return SimTime{ticks + dt}; }
};

enum class EventKind : std::uint8_t {
    SlotStart,
    Beacon,
    Transmission,
    AckDeadline,
    SuperframeBoundary,
    MobilityStep,
    BleBroadcast,
};

std::string_view to_string(EventKind kind);

/// Kind-specific data. Fields a kind does not use stay at -1.
struct EventPayload {
    std::int64_t superframe = -1;
    int node = -1;
    int slot = -1;
    int frame = -1;
};

struct Event {
    SimTime time;
    std::uint64_t sequence = 0;
    EventKind kind = EventKind::SlotStart;
    EventPayload payload;
};

struct EventHandle {
    std::uint64_t sequence = 0;
};

class EventQueue {
public:
    EventHandle push(Event event);
    bool cancel(EventHandle handle);
    bool empty() const;
    /// Earliest live event; cancelled entries are discarded on the way.
    const Event& top();
    Event pop();
    std::size_t size() const { return heap_.size() - cancelled_.size(); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.sequence > b.sequence;
        }
    };
    void drop_cancelled();

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::unordered_set<std::uint64_t> cancelled_;
    std::unordered_set<std::uint64_t> live_;
};

class Simulator {
public:
    using Handler = std::function<void(const Event&)>;
    using Observer = std::function<void(const Event&)>;

    SimTime now() const { return clock_; }

    /// Throws std::logic_error when `time` is earlier than the clock.
    EventHandle schedule(SimTime time, EventKind kind, EventPayload payload = {});
    bool cancel(EventHandle handle) { return queue_.cancel(handle); }

    void on(EventKind kind, Handler handler);
    /// Called for every processed event before its handler runs.
    void observe(Observer observer) { observer_ = std::move(observer); }

    /// Processes every event with time <= end, then sets the clock to end.
    std::size_t run_until(SimTime end);

    std::size_t pending() const { return queue_.size(); }
    std::size_t processed() const { return processed_; }

private:
    SimTime clock_{};
    std::uint64_t next_sequence_ = 0;
    std::size_t processed_ = 0;
    EventQueue queue_;
    std::vector<Handler> handlers_ = std::vector<Handler>(7);
    Observer observer_;
};

enum class StreamKind : std::uint32_t {
    Coordinator = 1,
    Sensor = 2,
    IotDevice = 3,
    Mobility = 4,
    Placement = 5,
    Medium = 6,
};

/// 64-bit stream identifier built from an entity kind and index, so adding
/// an entity never shifts the streams of existing ones.
constexpr std::uint64_t stream_id(StreamKind kind, std::uint64_t index) {
    return (static_cast<std::uint64_t>(kind) << 40) | index;
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    bool bernoulli(double p);
    double gaussian();

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Seed for replication `index` of a run with base seed `base`.
std::uint64_t replication_seed(std::uint64_t base, std::uint64_t index);

}  // namespace csim::engine
