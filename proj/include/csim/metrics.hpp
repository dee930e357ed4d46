#pragma once

// Observables folded from per-superframe samples: channel availability,
// channel reuse and coordinator energy.

#include "csim/spectrum.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace csim::metrics {

using spectrum::ChannelSet;

/// Per-coordinator activity driving the energy model.
struct CoordinatorActivity {
    int alerts = 0;            // BLE interference alerts received (0 or 1 per superframe)
    int cr_engagements = 0;
    int channels_scanned = 0;  // channels sensed by the CR across its engagements
};

struct SuperframeSample {
    std::int64_t superframe = 0;
    /// Channels counted as unavailable at each coordinator.
    std::vector<ChannelSet> occupied;
    /// Channels each WBAN transmitted on.
    std::vector<ChannelSet> channels_used;
    std::vector<CoordinatorActivity> activity;
};

/// Packet accounting for one scheme over a run.
struct DeliveryCounters {
    std::int64_t generated = 0;
    std::int64_t delivered = 0;   // released after exactly one reception
    std::int64_t duplicates = 0;  // released after more than one reception
    std::int64_t pending = 0;     // still queued at the sensors
    std::int64_t attempts = 0;
    std::int64_t collisions = 0;

    DeliveryCounters& operator+=(const DeliveryCounters& o);
};

/// |G - occupied| / |G|.
double availability(ChannelSet occupied);

/// Mean over superframes of the mean availability over coordinators.
double pr_avchs(std::span<const SuperframeSample> samples);

enum class ReuseDefinition {
    /// Number of WBANs divided by the number of distinct channels they use.
    WbansPerChannel,
    /// (WBAN, channel) uses divided by the number of distinct channels.
    UsesPerDistinct,
};

/// Reuse factor of one superframe; 1.0 when nothing is assigned.
double reuse_factor(std::span<const ChannelSet> channels_used, ReuseDefinition def);
double avg_reuse_factor(std::span<const SuperframeSample> samples, ReuseDefinition def);

/// Energies are in mW*slot, so dividing by elapsed slots yields mW.
struct EnergyModel {
    double e_scan = 1.0e-3;
    double e_ble_rx = 1.55e-2;
    double e_cr = 2.0e-3;
    double e_idle = 5.0e-5;  // per slot
    /// Full-band scan cadence without BLE, in slots.
    int scan_period_wo = 28;

    void validate() const;
};

/// Slot-weighted energy sums for one coordinator.
double coordinator_energy(const CoordinatorActivity& a, std::int64_t slots, const EnergyModel& m, bool ble_enabled);

/// Time-average coordinator power in mW, mean over coordinators.
double avg_energy(std::span<const SuperframeSample> samples, std::int64_t slots_per_superframe, const EnergyModel& m,
                  bool ble_enabled);

}  // namespace csim::metrics
