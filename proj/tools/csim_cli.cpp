// csim: run one scenario, run a sweep, or list the experiment presets.

#include "csim/config.hpp"
#include "csim/harness.hpp"
#include "csim/simulation.hpp"
#include "csim/trace.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets, std::optional<std::uint64_t> seed,
            const std::string& scheme, const std::string& trace_path, const std::string& metrics_path) {
    auto cfg = csim::config::load(config_path, sets);
    if (!scheme.empty()) cfg.scheme = csim::config::scheme_from_string(scheme);
    if (seed) cfg.seed = *seed;
    csim::trace::TraceLog log(!trace_path.empty());
    const auto r = csim::simulation::run_scenario(cfg, cfg.seed, &log);
    if (!trace_path.empty()) {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + trace_path + " for writing");
        log.write_jsonl(out);
    }
    nlohmann::ordered_json m;
    m["scheme"] = csim::config::to_string(r.scheme);
    m["seed"] = r.seed;
    m["superframes"] = r.samples.size();
    m["slots_per_superframe"] = r.slots_per_superframe;
    m["pr_avchs"] = r.pr_avchs;
    m["avg_rf"] = r.avg_rf;
    m["avg_energy_w_mw"] = r.energy_w_mw;
    m["avg_energy_wo_mw"] = r.energy_wo_mw;
    m["generated"] = r.counters.generated;
    m["delivered"] = r.counters.delivered;
    m["duplicates"] = r.counters.duplicates;
    m["pending"] = r.counters.pending;
    m["attempts"] = r.counters.attempts;
    m["collisions"] = r.counters.collisions;
    const auto text = m.dump(2);
    if (!metrics_path.empty()) {
        std::ofstream out(metrics_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + metrics_path + " for writing");
        out << text << '\n';
    }
    std::cout << text << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WBAN/IoT coexistence simulator: CSIM and SSA"};
    app.require_subcommand(1);

    std::string config_path, scheme, trace_path, metrics_path, out_path, preset_name, axis, values, schemes, metrics;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    int threads = 0;

    auto* run = app.add_subcommand("run", "run one scenario and print its metrics");
    run->add_option("-c,--config", config_path, "JSON config file");
    run->add_option("--set", sets, "override key=value (dotted keys)");
    run->add_option("--seed", seed, "seed");
    run->add_option("--scheme", scheme, "CSIM or SSA");
    run->add_option("--trace", trace_path, "write JSON-lines trace here");
    run->add_option("--metrics", metrics_path, "also write the metrics JSON here");

    auto* sweep = app.add_subcommand("sweep", "run a preset or custom sweep and write CSV");
    sweep->add_option("-p,--preset", preset_name, "exp1..exp5");
    sweep->add_option("-c,--config", config_path, "JSON config file for the fixed scenario");
    sweep->add_option("--set", sets, "override key=value (dotted keys)");
    sweep->add_option("--axis", axis, "cluster_size, snr_threshold, sensors_per_wban, interference_threshold");
    sweep->add_option("--values", values, "comma-separated axis values");
    sweep->add_option("--schemes", schemes, "comma-separated scheme labels (CSIM, SSA, CSIM-W, CSIM-WO)");
    sweep->add_option("--metrics", metrics, "comma-separated metrics");
    sweep->add_option("--seed", seed, "base seed");
    sweep->add_option("-r,--replications", reps, "replications per point");
    sweep->add_option("-j,--threads", threads, "worker threads (0 = all cores)");
    sweep->add_option("-o,--out", out_path, "CSV path (stdout when omitted)");

    app.add_subcommand("presets", "list the experiment presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, sets, seed, scheme, trace_path, metrics_path);
        if (sweep->parsed()) {
            csim::harness::SweepSpec spec;
            if (!preset_name.empty()) {
                spec = csim::harness::preset(preset_name);
                if (!config_path.empty() || !sets.empty()) {
                    nlohmann::json tree = csim::config::to_json(spec.fixed);
                    if (!config_path.empty()) {
                        auto fromfile = csim::config::load(config_path, {});
                        tree = csim::config::to_json(fromfile);
                    }
                    for (const auto& s : sets) csim::config::apply_override(tree, s);
                    spec.fixed = csim::config::from_json(tree);
                }
                if (!axis.empty()) spec.axis = csim::harness::axis_from_string(axis);
                if (!values.empty()) spec.values = parse_values(values);
            } else {
                if (axis.empty() || values.empty()) throw std::invalid_argument("sweep needs --preset or --axis with --values");
                spec.name = "custom";
                spec.axis = csim::harness::axis_from_string(axis);
                spec.values = parse_values(values);
                spec.fixed = csim::config::load(config_path, sets);
                spec.schemes = {"CSIM", "SSA"};
                spec.metrics = {"pr_avchs"};
            }
            auto split = [](const std::string& t) {
                std::vector<std::string> v;
                std::stringstream ss(t);
                std::string c;
                while (std::getline(ss, c, ',')) v.push_back(c);
                return v;
            };
            if (!schemes.empty()) spec.schemes = split(schemes);
            if (!metrics.empty()) spec.metrics = split(metrics);
            if (seed) spec.fixed.seed = *seed;
            if (reps) spec.fixed.replications = *reps;
            const auto rows = csim::harness::run_experiment(spec, threads);
            if (out_path.empty()) {
                csim::harness::write_csv(rows, std::cout);
            } else {
                csim::harness::emit_csv(rows, out_path);
            }
            return 0;
        }
        for (const auto& p : csim::harness::presets()) {
            std::cout << p.name << "\t" << csim::harness::to_string(p.axis) << "\t" << p.description << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "csim: " << e.what() << '\n';
        return 2;
    }
}
