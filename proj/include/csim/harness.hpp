#pragma once

// Sweeps over one axis, replicated runs, mean/std aggregation and CSV I/O.

#include "csim/config.hpp"
#include "csim/simulation.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace csim::harness {

enum class Axis { ClusterSize, SnrThreshold, SensorsPerWban, InterferenceThreshold };

const char* to_string(Axis a);
Axis axis_from_string(const std::string& s);

/// Scheme labels: "CSIM", "SSA", "CSIM-W" and "CSIM-WO" (energy with BLE on/off
/// from the same CSIM runs).
struct SweepSpec {
    std::string name;
    std::string description;
    Axis axis = Axis::ClusterSize;
    std::vector<double> values;
    config::ScenarioConfig fixed;
    std::vector<std::string> schemes;
    std::vector<std::string> metrics;  // pr_avchs, avg_rf, avg_energy_mw, delivery_ratio

    void validate() const;
};

/// Copy of `base` with the axis parameter set to `value`.
config::ScenarioConfig apply_axis(config::ScenarioConfig base, Axis axis, double value);

struct ResultRow {
    std::string axis;
    double axis_value = 0.0;
    std::string scheme;
    std::string metric;
    double mean = 0.0;
    double std = 0.0;
    int replications = 0;
    std::uint64_t seed = 0;

    bool operator==(const ResultRow&) const = default;
};

/// Scalar observable of a finished run under a scheme label.
double metric_value(const simulation::RunResult& r, const std::string& scheme, const std::string& metric);

/// Rows ordered by (axis value, scheme, metric), in the order given by the sweep.
/// `threads` <= 0 uses the hardware concurrency.
std::vector<ResultRow> run_experiment(const SweepSpec& spec, int threads = 0);

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os);
/// Throws std::runtime_error naming the path when it cannot be written.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> parse_csv(std::istream& is);

std::vector<SweepSpec> presets();
/// Throws std::invalid_argument for an unknown name.
SweepSpec preset(const std::string& name);

}  // namespace csim::harness
