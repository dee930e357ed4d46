#include "csim/metrics.hpp"

#include <stdexcept>

namespace csim::metrics {

DeliveryCounters& DeliveryCounters::operator+=(const DeliveryCounters& o) {
    generated += o.generated;
    delivered += o.delivered;
    duplicates += o.duplicates;
    pending += o.pending;
    attempts += o.attempts;
    collisions += o.collisions;
    return *this;
}

double availability(ChannelSet occupied) {
    const double free = spectrum::kChannelCount - occupied.size();
    return free / spectrum::kChannelCount;
}

double pr_avchs(std::span<const SuperframeSample> samples) {
    if (samples.empty()) return 1.0;
    double total = 0.0;
    for (const auto& s : samples) {
        if (s.occupied.empty()) {
            total += 1.0;
            continue;
        }
        double acc = 0.0;
        for (auto occ : s.occupied) acc += availability(occ);
        total += acc / static_cast<double>(s.occupied.size());
    }
    return total / static_cast<double>(samples.size());
}

double reuse_factor(std::span<const ChannelSet> channels_used, ReuseDefinition def) {
    ChannelSet distinct;
    int uses = 0;
    int users = 0;
    for (auto c : channels_used) {
        distinct |= c;
        uses += c.size();
        if (!c.empty()) ++users;
    }
    if (distinct.empty()) return 1.0;
    const double d = distinct.size();
    return def == ReuseDefinition::WbansPerChannel ? users / d : uses / d;
}

double avg_reuse_factor(std::span<const SuperframeSample> samples, ReuseDefinition def) {
    if (samples.empty()) return 1.0;
    double total = 0.0;
    for (const auto& s : samples) total += reuse_factor(s.channels_used, def);
    return total / static_cast<double>(samples.size());
}

void EnergyModel::validate() const {
    if (e_scan < 0 || e_ble_rx < 0 || e_cr < 0 || e_idle < 0) {
        throw std::invalid_argument("energy: all energy constants must be non-negative");
    }
    if (scan_period_wo < 1) throw std::invalid_argument("energy: scan_period_wo must be >= 1");
}

double coordinator_energy(const CoordinatorActivity& a, std::int64_t slots, const EnergyModel& m, bool ble_enabled) {
    double e = m.e_idle * static_cast<double>(slots);
    e += (m.e_scan * a.channels_scanned) + m.e_cr * a.cr_engagements;
    if (ble_enabled) {
        e += m.e_ble_rx * a.alerts;
    } else {
        e += m.e_scan * spectrum::kChannelCount * static_cast<double>(slots / m.scan_period_wo);
    }
    return e;
}

double avg_energy(std::span<const SuperframeSample> samples, std::int64_t slots_per_superframe, const EnergyModel& m,
                  bool ble_enabled) {
    m.validate();
    if (samples.empty()) return 0.0;
    const std::size_t n = samples.front().activity.size();
    std::vector<CoordinatorActivity> totals(n);
    for (const auto& s : samples) {
        for (std::size_t i = 0; i < n && i < s.activity.size(); ++i) {
            totals[i].alerts += s.activity[i].alerts;
            totals[i].cr_engagements += s.activity[i].cr_engagements;
            totals[i].channels_scanned += s.activity[i].channels_scanned;
        }
    }
    const std::int64_t slots = slots_per_superframe * static_cast<std::int64_t>(samples.size());
    double acc = 0.0;
    for (const auto& t : totals) acc += coordinator_energy(t, slots, m, ble_enabled) / static_cast<double>(slots);
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

}  // namespace csim::metrics
