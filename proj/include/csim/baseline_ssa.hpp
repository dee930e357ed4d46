#pragma once

// SSA comparison scheme: orthogonal channels for the sensors in the pairwise
// interference sets of interfering WBANs, recomputed after every move.

#include "csim/engine.hpp"
#include "csim/metrics.hpp"
#include "csim/protocol.hpp"
#include "csim/spectrum.hpp"
#include "csim/trace.hpp"
#include "csim/world.hpp"

#include <compare>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace csim::baseline_ssa {

using spectrum::ChannelId;
using spectrum::ChannelSet;

struct SensorRef {
    int wban = 0;
    int node = 0;
    auto operator<=>(const SensorRef&) const = default;
};

struct InterferenceSet {
    std::pair<int, int> wban_pair;    // first < second
    std::vector<SensorRef> members;   // sorted
};

/// Sensors of a that reach b's coordinator plus sensors of b that reach a's.
InterferenceSet interference_set(const world::World& world, int a, int b);
/// One entry per unordered WBAN pair, empty sets included.
std::vector<InterferenceSet> build_interference_sets(const world::World& world);

struct Coloring {
    std::map<SensorRef, ChannelId> channel;
    int unprovisioned = 0;
};

/// Greedy coloring of an adjacency list: descending degree, ties by vertex
/// index, smallest free channel of g. With no free channel the vertex takes
/// the channel with fewest conflicting neighbours (random tie-break) and is
/// reported in `unprovisioned`.
std::vector<ChannelId> greedy_coloring(const std::vector<std::vector<int>>& adjacency, ChannelSet g,
                                       engine::RngStream& rng, int* unprovisioned = nullptr);

/// Conflict graph: vertices are sensors in any set, edges join co-members.
Coloring assign_orthogonal_channels(std::span<const InterferenceSet> sets, ChannelSet g, engine::RngStream& rng);

class SsaNetwork {
public:
    SsaNetwork(world::World& world, engine::Simulator& sim, protocol::ProtocolParams params, std::uint64_t seed,
               trace::TraceLog* trace = nullptr);

    void setup_network();
    void attach();
    void schedule_superframe(std::int64_t sf);
    void set_superframe_limit(std::int64_t count) { superframe_limit_ = count; }

    void begin_superframe(std::int64_t sf);
    /// Rebuilds the interference sets and the channel map for the current geometry.
    void assign_channels();
    void tdma_slot(int slot);
    void end_superframe();

    const protocol::SuperframeSchedule& schedule() const { return schedule_; }
    const std::vector<InterferenceSet>& interference_sets() const { return sets_; }
    const Coloring& coloring() const { return coloring_; }
    ChannelId sensor_channel(int wban, int node) const;
    ChannelId default_channel(int wban) const { return defaults_.at(static_cast<std::size_t>(wban)); }
    const std::vector<metrics::SuperframeSample>& samples() const { return samples_; }
    metrics::DeliveryCounters counters() const;

private:
    void record(const std::string& frame, int wban, int node, int slot, int channel, const std::string& outcome,
                std::map<std::string, std::int64_t> detail = {});

    world::World& world_;
    engine::Simulator& sim_;
    protocol::ProtocolParams params_;
    protocol::SuperframeSchedule schedule_;
    std::uint64_t seed_;
    trace::TraceLog* trace_;

    std::vector<ChannelId> defaults_;
    std::vector<engine::RngStream> crd_rng_;
    engine::RngStream medium_rng_;
    engine::RngStream coloring_rng_;
    std::vector<InterferenceSet> sets_;
    Coloring coloring_;
    std::vector<std::vector<std::deque<std::int64_t>>> queues_;
    std::vector<std::vector<std::int64_t>> next_sequence_;
    std::vector<std::vector<std::map<std::int64_t, int>>> receptions_;

    std::int64_t superframe_ = -1;
    std::int64_t superframe_limit_ = -1;
    metrics::SuperframeSample current_;
    std::vector<metrics::SuperframeSample> samples_;
    metrics::DeliveryCounters counters_;
};

}  // namespace csim::baseline_ssa
