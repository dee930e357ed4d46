#pragma once

// One seeded run of one scheme: world, network automata and engine wired
// together, folded into the observables.

#include "csim/config.hpp"
#include "csim/metrics.hpp"
#include "csim/trace.hpp"

#include <cstdint>
#include <vector>

namespace csim::simulation {

struct RunResult {
    config::Scheme scheme = config::Scheme::Csim;
    std::uint64_t seed = 0;
    std::int64_t slots_per_superframe = 0;
    std::vector<metrics::SuperframeSample> samples;
    metrics::DeliveryCounters counters;
    std::size_t events_processed = 0;

    double pr_avchs = 0.0;
    double avg_rf = 0.0;
    double energy_w_mw = 0.0;   // BLE on
    double energy_wo_mw = 0.0;  // BLE off, same activity trace
};

/// Runs cfg.superframes_per_run superframes of cfg.scheme with `seed`.
RunResult run_scenario(const config::ScenarioConfig& cfg, std::uint64_t seed, trace::TraceLog* trace = nullptr);

}  // namespace csim::simulation
