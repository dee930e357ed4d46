#pragma once

// CSIM coordinator and sensor automata over the synchronized superframe:
// beacon, TDMA on the default channel, FCS channel selection, FBTDMA
// retransmission on the stable channel, inactive period.

#include "csim/engine.hpp"
#include "csim/metrics.hpp"
#include "csim/spectrum.hpp"
#include "csim/trace.hpp"
#include "csim/world.hpp"

#include <deque>
#include <map>
#include <optional>
#include <vector>

namespace csim::protocol {

using spectrum::ChannelId;
using spectrum::ChannelSet;

struct ProtocolParams {
    int fcs_length = 2;
    int inactive_length = 5;
    double stability_threshold = 0.9;
    spectrum::NoiseModel noise;
    /// Coordinators also announce the previous superframe's stable channel.
    bool announce_stable = true;

    void validate() const;
};

/// Slot offsets within one superframe. The FBTDMA region reserves K slots of
/// which the first |LIS| are used.
struct SuperframeSchedule {
    int k = 1;
    int fcs_length = 2;
    int inactive_length = 5;

    int period() const { return 1 + k + fcs_length + k + inactive_length; }
    int beacon_offset() const { return 0; }
    int tdma_offset(int slot) const { return 1 + slot; }
    int fcs_decision_offset() const { return 1 + k; }
    int fcs_beacon_offset() const { return k + fcs_length; }
    int fbtdma_offset(int m) const { return 1 + k + fcs_length + m; }
};

enum class SensorMode { AwaitSlot, AwaitAck, AwaitFbtdma, Sleep };

const char* to_string(SensorMode m);

struct SensorState {
    int sensor_id = 0;  // within the WBAN
    int wban_id = 0;
    int assigned_ts = 0;
    std::optional<int> assigned_imts;
    ChannelId current_channel{0};
    std::deque<std::int64_t> packet_queue;  // sequence numbers, head first
    SensorMode mode = SensorMode::AwaitSlot;
    bool beacon_decoded = false;
    std::int64_t next_sequence = 0;
};

struct CoordinatorState {
    int wban_id = 0;
    ChannelId default_channel{0};
    ChannelSet lch;
    std::vector<int> lis;
    std::optional<ChannelId> stable_channel;
    std::optional<ChannelId> previous_stable;
    /// Receptions of each sensor's packets, by sequence number.
    std::vector<std::map<std::int64_t, int>> receptions;
    bool fbtdma_failure_last = false;
    bool silent = false;
    double energy_mj = 0.0;  // filled by metrics after a run
};

class CsimNetwork {
public:
    CsimNetwork(world::World& world, engine::Simulator& sim, ProtocolParams params, std::uint64_t seed,
                trace::TraceLog* trace = nullptr);

    /// Random default channel per coordinator, sensors tuned to it, TDMA slots 0..K-1.
    void setup_network();
    /// Schedules every event of superframe `sf`; the boundary handler chains the next one.
    void schedule_superframe(std::int64_t sf);
    /// Registers the event handlers on the simulator.
    void attach();
    /// Stops chaining superframes after `count` of them.
    void set_superframe_limit(std::int64_t count) { superframe_limit_ = count; }

    void begin_superframe(std::int64_t sf);
    void ble_broadcast();
    /// Data and Ack exchange of TDMA slot `slot` for every WBAN.
    void tdma_slot(int slot);
    void ack_deadline(int wban, int slot);
    void fcs_frame();
    void fcs_beacon();
    void fbtdma_slot(int m);
    void end_superframe();

    const SuperframeSchedule& schedule() const { return schedule_; }
    const std::vector<CoordinatorState>& coordinators() const { return crds_; }
    const std::vector<std::vector<SensorState>>& sensors() const { return sensors_; }
    const std::vector<metrics::SuperframeSample>& samples() const { return samples_; }
    metrics::DeliveryCounters counters() const;
    std::int64_t cr_engagements() const { return cr_engagements_total_; }

private:
    /// Ack emission and LIS bookkeeping for one WBAN's TDMA slot.
    bool coordinator_slot(int wban, int slot, bool data_received, std::int64_t sequence);
    void release_head(int wban, int node);
    void record(const std::string& frame, int wban, int node, int slot, int channel, const std::string& outcome,
                std::map<std::string, std::int64_t> detail = {});
    std::int64_t tick() const { return sim_.now().ticks; }

    world::World& world_;
    engine::Simulator& sim_;
    ProtocolParams params_;
    SuperframeSchedule schedule_;
    std::uint64_t seed_;
    trace::TraceLog* trace_;

    std::vector<CoordinatorState> crds_;
    std::vector<std::vector<SensorState>> sensors_;
    std::vector<engine::RngStream> crd_rng_;
    engine::RngStream medium_rng_;
    std::vector<std::vector<engine::EventHandle>> ack_handles_;

    std::int64_t superframe_ = -1;
    std::int64_t superframe_limit_ = -1;
    metrics::SuperframeSample current_;
    std::vector<metrics::SuperframeSample> samples_;
    metrics::DeliveryCounters counters_;
    std::int64_t cr_engagements_total_ = 0;
};

}  // namespace csim::protocol
