#include "csim/config.hpp"

#include <fstream>
#include <stdexcept>

namespace csim::config {

using nlohmann::json;

const char* to_string(Scheme s) { return s == Scheme::Csim ? "CSIM" : "SSA"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "CSIM") return Scheme::Csim;
    if (s == "SSA") return Scheme::Ssa;
    throw std::invalid_argument("unknown scheme: " + s);
}

void ScenarioConfig::validate() const {
    world.validate();
    radio.validate();
    protocol.validate();
    energy.validate();
    if (!(wban_fraction > 0.0 && wban_fraction <= 1.0)) {
        throw std::invalid_argument("cluster: wban_fraction must lie in (0, 1]");
    }
    if (!(slot_duration_s > 0.0)) throw std::invalid_argument("slot_duration_s must be positive");
    if (superframes_per_run < 1) throw std::invalid_argument("superframes_per_run must be >= 1");
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
}

json to_json(const ScenarioConfig& c) {
    const auto& n = c.protocol.noise;
    return json{
        {"scheme", to_string(c.scheme)},
        {"seed", c.seed},
        {"superframes_per_run", c.superframes_per_run},
        {"replications", c.replications},
        {"slot_duration_s", c.slot_duration_s},
        {"world",
         {{"n_wbans", c.world.n_wbans},
          {"k_sensors", c.world.k_sensors},
          {"body_radius_m", c.world.body_radius_m},
          {"ble_range_m", c.world.ble_range_m},
          {"occupancy_gain", c.world.occupancy_gain}}},
        {"iot",
         {{"n_devices", c.world.iot.n_devices},
          {"wideband_fraction", c.world.iot.wideband_fraction},
          {"wideband_tx_power_dbm", c.world.iot.wideband_tx_power_dbm},
          {"narrowband_tx_power_dbm", c.world.iot.narrowband_tx_power_dbm},
          {"duty_cycle", c.world.iot.duty_cycle},
          {"epoch_superframes", c.world.iot.epoch_superframes}}},
        {"radio",
         {{"tx_power_dbm", c.radio.tx_power_dbm},
          {"coordinator_tx_power_dbm", c.radio.coordinator_tx_power_dbm},
          {"snr_threshold_db", c.radio.snr_threshold_db},
          {"path_loss_exponent", c.radio.path_loss_exponent},
          {"reference_loss_db", c.radio.reference_loss_db},
          {"noise_floor_dbm", c.radio.noise_floor_dbm},
          {"collision_prob", c.radio.collision_prob},
          {"vicinity_reference_dbm", c.radio.vicinity_reference_dbm},
          {"min_distance_m", c.radio.min_distance_m}}},
        {"spectrum",
         {{"u", n.u},
          {"lambda1", n.lambda1},
          {"lambda2", n.lambda2},
          {"bandwidth_hz", n.bandwidth_hz},
          {"boost_signal_power", n.boost_signal_power},
          {"stability_threshold", c.protocol.stability_threshold}}},
        {"protocol",
         {{"fcs_length", c.protocol.fcs_length},
          {"inactive_length", c.protocol.inactive_length},
          {"announce_stable", c.protocol.announce_stable}}},
        {"energy",
         {{"e_scan", c.energy.e_scan},
          {"e_ble_rx", c.energy.e_ble_rx},
          {"e_cr", c.energy.e_cr},
          {"e_idle", c.energy.e_idle},
          {"scan_period_wo", c.energy.scan_period_wo}}},
        {"metrics",
         {{"reuse_definition",
           c.reuse == metrics::ReuseDefinition::WbansPerChannel ? "wbans-per-channel" : "uses-per-distinct"}}},
        {"cluster", {{"wban_fraction", c.wban_fraction}}},
    };
}

namespace {

void merge_checked(json& base, const json& patch, const std::string& prefix) {
    if (!patch.is_object()) throw std::invalid_argument("config: expected an object at '" + prefix + "'");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) throw std::invalid_argument("config: unknown key '" + key + "'");
        auto& slot = base[it.key()];
        if (slot.is_object()) {
            merge_checked(slot, it.value(), key);
        } else {
            if (slot.is_number() != it.value().is_number() || slot.is_string() != it.value().is_string() ||
                slot.is_boolean() != it.value().is_boolean()) {
                throw std::invalid_argument("config: wrong type for '" + key + "'");
            }
            slot = it.value();
        }
    }
}

template <class T>
T get(const json& j, const char* group, const char* key) {
    try {
        return j.at(group).at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: bad value for '") + group + "." + key + "': " + e.what());
    }
}

}  // namespace

ScenarioConfig from_json(const json& patch) {
    json j = to_json(ScenarioConfig{});
    merge_checked(j, patch, "");
    ScenarioConfig c;
    try {
        c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        c.seed = j.at("seed").get<std::uint64_t>();
        c.superframes_per_run = j.at("superframes_per_run").get<int>();
        c.replications = j.at("replications").get<int>();
        c.slot_duration_s = j.at("slot_duration_s").get<double>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.world.n_wbans = get<int>(j, "world", "n_wbans");
    c.world.k_sensors = get<int>(j, "world", "k_sensors");
    c.world.body_radius_m = get<double>(j, "world", "body_radius_m");
    c.world.ble_range_m = get<double>(j, "world", "ble_range_m");
    c.world.occupancy_gain = get<double>(j, "world", "occupancy_gain");
    c.world.iot.n_devices = get<int>(j, "iot", "n_devices");
    c.world.iot.wideband_fraction = get<double>(j, "iot", "wideband_fraction");
    c.world.iot.wideband_tx_power_dbm = get<double>(j, "iot", "wideband_tx_power_dbm");
    c.world.iot.narrowband_tx_power_dbm = get<double>(j, "iot", "narrowband_tx_power_dbm");
    c.world.iot.duty_cycle = get<double>(j, "iot", "duty_cycle");
    c.world.iot.epoch_superframes = get<int>(j, "iot", "epoch_superframes");
    c.radio.tx_power_dbm = get<double>(j, "radio", "tx_power_dbm");
    c.radio.coordinator_tx_power_dbm = get<double>(j, "radio", "coordinator_tx_power_dbm");
    c.radio.snr_threshold_db = get<double>(j, "radio", "snr_threshold_db");
    c.radio.path_loss_exponent = get<double>(j, "radio", "path_loss_exponent");
    c.radio.reference_loss_db = get<double>(j, "radio", "reference_loss_db");
    c.radio.noise_floor_dbm = get<double>(j, "radio", "noise_floor_dbm");
    c.radio.collision_prob = get<double>(j, "radio", "collision_prob");
    c.radio.vicinity_reference_dbm = get<double>(j, "radio", "vicinity_reference_dbm");
    c.radio.min_distance_m = get<double>(j, "radio", "min_distance_m");
    c.protocol.noise.u = get<int>(j, "spectrum", "u");
    c.protocol.noise.lambda1 = get<double>(j, "spectrum", "lambda1");
    c.protocol.noise.lambda2 = get<double>(j, "spectrum", "lambda2");
    c.protocol.noise.bandwidth_hz = get<double>(j, "spectrum", "bandwidth_hz");
    c.protocol.noise.boost_signal_power = get<double>(j, "spectrum", "boost_signal_power");
    c.protocol.stability_threshold = get<double>(j, "spectrum", "stability_threshold");
    c.protocol.fcs_length = get<int>(j, "protocol", "fcs_length");
    c.protocol.inactive_length = get<int>(j, "protocol", "inactive_length");
    c.protocol.announce_stable = get<bool>(j, "protocol", "announce_stable");
    c.energy.e_scan = get<double>(j, "energy", "e_scan");
    c.energy.e_ble_rx = get<double>(j, "energy", "e_ble_rx");
    c.energy.e_cr = get<double>(j, "energy", "e_cr");
    c.energy.e_idle = get<double>(j, "energy", "e_idle");
    c.energy.scan_period_wo = get<int>(j, "energy", "scan_period_wo");
    const auto reuse = get<std::string>(j, "metrics", "reuse_definition");
    if (reuse == "wbans-per-channel") {
        c.reuse = metrics::ReuseDefinition::WbansPerChannel;
    } else if (reuse == "uses-per-distinct") {
        c.reuse = metrics::ReuseDefinition::UsesPerDistinct;
    } else {
        throw std::invalid_argument("config: metrics.reuse_definition must be wbans-per-channel or uses-per-distinct");
    }
    c.wban_fraction = get<double>(j, "cluster", "wban_fraction");
    return c;
}

void apply_override(json& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must look like key.path=value: '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(part)) throw std::invalid_argument("unknown config key '" + key + "'");
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (node->is_object()) throw std::invalid_argument("config key '" + key + "' names a group");
    if (node->is_string()) {
        *node = text;
        return;
    }
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        throw std::invalid_argument("cannot parse value for '" + key + "': " + text);
    }
    if (node->is_boolean() != value.is_boolean() || node->is_number() != value.is_number()) {
        throw std::invalid_argument("wrong type for '" + key + "': " + text);
    }
    *node = value;
}

ScenarioConfig load(const std::string& path, const std::vector<std::string>& overrides) {
    json tree = to_json(ScenarioConfig{});
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config file: " + path);
        json file;
        try {
            file = json::parse(in);
        } catch (const json::exception& e) {
            throw std::invalid_argument("config file " + path + " is not valid JSON: " + e.what());
        }
        merge_checked(tree, file, "");
    }
    for (const auto& o : overrides) apply_override(tree, o);
    auto c = from_json(tree);
    c.validate();
    return c;
}

}  // namespace csim::config
