#pragma once

// Scenario configuration: one JSON document with nested groups, every leaf
// addressable by a dotted key for command-line overrides.

#include "csim/metrics.hpp"
#include "csim/protocol.hpp"
#include "csim/world.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace csim::config {

enum class Scheme { Csim, Ssa };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct ScenarioConfig {
    Scheme scheme = Scheme::Csim;
    world::WorldParams world = [] {
        world::WorldParams w;
        w.n_wbans = 10;
        w.k_sensors = 10;
        return w;
    }();
    world::RadioParams radio;
    protocol::ProtocolParams protocol;
    metrics::EnergyModel energy;
    metrics::ReuseDefinition reuse = metrics::ReuseDefinition::WbansPerChannel;
    /// Share of a cluster's members that are WBANs; the rest are IoT devices.
    double wban_fraction = 0.25;
    double slot_duration_s = 1.0e-3;
    std::uint64_t seed = 1;
    int superframes_per_run = 100;
    int replications = 30;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

nlohmann::json to_json(const ScenarioConfig& c);
/// Layers `j` over the defaults; unknown keys are rejected.
ScenarioConfig from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to a config tree; the key must already exist.
void apply_override(nlohmann::json& tree, const std::string& assignment);

/// Defaults, then the optional file, then overrides in order; validated.
ScenarioConfig load(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace csim::config
