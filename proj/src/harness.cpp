#include "csim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace csim::harness {

const char* to_string(Axis a) {
    switch (a) {
        case Axis::ClusterSize: return "cluster_size";
        case Axis::SnrThreshold: return "snr_threshold";
        case Axis::SensorsPerWban: return "sensors_per_wban";
        case Axis::InterferenceThreshold: return "interference_threshold";
    }
    return "unknown";
}

Axis axis_from_string(const std::string& s) {
    for (auto a : {Axis::ClusterSize, Axis::SnrThreshold, Axis::SensorsPerWban, Axis::InterferenceThreshold}) {
        if (s == to_string(a)) return a;
    }
    throw std::invalid_argument("unknown sweep axis: " + s);
}

namespace {

bool csim_label(const std::string& s) { return s == "CSIM" || s == "CSIM-W" || s == "CSIM-WO"; }

config::Scheme base_scheme(const std::string& label) {
    if (csim_label(label)) return config::Scheme::Csim;
    if (label == "SSA") return config::Scheme::Ssa;
    throw std::invalid_argument("unknown scheme label: " + label);
}

}  // namespace

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep: no axis values");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) throw std::invalid_argument("sweep: axis values must be strictly increasing");
    }
    if (schemes.empty()) throw std::invalid_argument("sweep: no schemes");
    for (const auto& s : schemes) base_scheme(s);
    if (metrics.empty()) throw std::invalid_argument("sweep: no metrics");
    for (const auto& m : metrics) {
        if (m != "pr_avchs" && m != "avg_rf" && m != "avg_energy_mw" && m != "delivery_ratio") {
            throw std::invalid_argument("sweep: unknown metric " + m);
        }
    }
    for (double v : values) apply_axis(fixed, axis, v).validate();
}

config::ScenarioConfig apply_axis(config::ScenarioConfig c, Axis axis, double value) {
    switch (axis) {
        case Axis::ClusterSize: {
            const int omega = static_cast<int>(std::lround(value));
            if (omega < 1) throw std::invalid_argument("cluster size must be >= 1");
            c.world.n_wbans = std::max(1, static_cast<int>(std::lround(omega * c.wban_fraction)));
            c.world.iot.n_devices = std::max(0, omega - c.world.n_wbans);
            break;
        }
        case Axis::SnrThreshold:
        case Axis::InterferenceThreshold: c.radio.snr_threshold_db = value; break;
        case Axis::SensorsPerWban: c.world.k_sensors = static_cast<int>(std::lround(value)); break;
    }
    return c;
}

double metric_value(const simulation::RunResult& r, const std::string& scheme, const std::string& metric) {
    if (metric == "pr_avchs") return r.pr_avchs;
    if (metric == "avg_rf") return r.avg_rf;
    if (metric == "avg_energy_mw") return scheme == "CSIM-WO" ? r.energy_wo_mw : r.energy_w_mw;
    if (metric == "delivery_ratio") {
        const auto& c = r.counters;
        return c.generated == 0 ? 1.0 : static_cast<double>(c.delivered + c.duplicates) / static_cast<double>(c.generated);
    }
    throw std::invalid_argument("unknown metric: " + metric);
}

std::vector<ResultRow> run_experiment(const SweepSpec& spec, int threads) {
    spec.validate();
    const int reps = spec.fixed.replications;
    // One simulation per (point, base scheme, replication); labels sharing a
    // base scheme read the same runs.
    std::vector<config::Scheme> bases;
    for (const auto& s : spec.schemes) {
        const auto b = base_scheme(s);
        if (std::find(bases.begin(), bases.end(), b) == bases.end()) bases.push_back(b);
    }
    struct Job {
        std::size_t point, base;
        int rep;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < spec.values.size(); ++p) {
        for (std::size_t b = 0; b < bases.size(); ++b) {
            for (int r = 0; r < reps; ++r) jobs.push_back({p, b, r});
        }
    }
    std::vector<simulation::RunResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed) {
            const auto i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const auto& job = jobs[i];
            try {
                auto cfg = apply_axis(spec.fixed, spec.axis, spec.values[job.point]);
                cfg.scheme = bases[job.base];
                results[i] = simulation::run_scenario(
                    cfg, engine::replication_seed(spec.fixed.seed, static_cast<std::uint64_t>(job.rep)));
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true)) error = e.what();
            }
        }
    };
    int n = threads > 0 ? threads : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    n = std::min<int>(n, static_cast<int>(jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (failed) throw std::runtime_error("sweep " + spec.name + " failed: " + error);

    std::vector<ResultRow> rows;
    for (std::size_t p = 0; p < spec.values.size(); ++p) {
        for (const auto& label : spec.schemes) {
            const auto b = static_cast<std::size_t>(
                std::find(bases.begin(), bases.end(), base_scheme(label)) - bases.begin());
            for (const auto& metric : spec.metrics) {
                std::vector<double> xs;
                for (std::size_t i = 0; i < jobs.size(); ++i) {
                    if (jobs[i].point == p && jobs[i].base == b) xs.push_back(metric_value(results[i], label, metric));
                }
                double mean = 0.0;
                for (double x : xs) mean += x;
                mean /= static_cast<double>(xs.size());
                double var = 0.0;
                for (double x : xs) var += (x - mean) * (x - mean);
                const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
                rows.push_back({to_string(spec.axis), spec.values[p], label, metric, mean, sd, reps, spec.fixed.seed});
            }
        }
    }
    return rows;
}

namespace {
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << "axis,axis_value,scheme,metric,mean,std,replications,seed\n";
    for (const auto& r : rows) {
        os << r.axis << ',' << fmt(r.axis_value) << ',' << r.scheme << ',' << r.metric << ',' << fmt(r.mean) << ','
           << fmt(r.std) << ',' << r.replications << ',' << r.seed << '\n';
    }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_csv: empty table");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(rows, out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<ResultRow> parse_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("parse_csv: missing header");
    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 8) throw std::runtime_error("parse_csv: expected 8 fields in: " + line);
        ResultRow r;
        r.axis = f[0];
        r.axis_value = std::stod(f[1]);
        r.scheme = f[2];
        r.metric = f[3];
        r.mean = std::stod(f[4]);
        r.std = std::stod(f[5]);
        r.replications = std::stoi(f[6]);
        r.seed = std::stoull(f[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

std::vector<double> steps(double first, double last, double step) {
    std::vector<double> v;
    for (double x = first; x <= last + 1e-9; x += step) v.push_back(x);
    return v;
}

}  // namespace

std::vector<SweepSpec> presets() {
    std::vector<SweepSpec> out;
    config::ScenarioConfig base;
    base.world.k_sensors = 10;
    base.world.n_wbans = 10;
    base.radio.tx_power_dbm = -10.0;
    base.radio.snr_threshold_db = -25.0;

    {
        SweepSpec s{"exp1", "Pr_AvChs vs cluster size (WBANs + IoT devices), K=10, SNR_Thr=-25 dB",
                    Axis::ClusterSize, steps(5, 60, 5), base, {"CSIM", "SSA"}, {"pr_avchs"}};
        out.push_back(s);
    }
    {
        SweepSpec s{"exp2", "Pr_AvChs vs SNR threshold, N=10, K=10", Axis::SnrThreshold, steps(-50, -10, 5), base,
                    {"CSIM", "SSA"}, {"pr_avchs"}};
        s.fixed.world.iot.n_devices = 0;
        out.push_back(s);
    }
    {
        SweepSpec s{"exp3", "Pr_AvChs vs sensors per WBAN, N=10, SNR_Thr=-25 dB", Axis::SensorsPerWban,
                    steps(2, 20, 2), base, {"CSIM", "SSA"}, {"pr_avchs"}};
        s.fixed.world.iot.n_devices = 0;
        out.push_back(s);
    }
    {
        SweepSpec s{"exp4", "avgRF vs interference threshold, N=10, K=10", Axis::InterferenceThreshold,
                    steps(-40, -5, 5), base, {"CSIM", "SSA"}, {"avg_rf"}};
        s.fixed.world.iot.n_devices = 40;
        s.fixed.world.iot.duty_cycle = 0.8;
        out.push_back(s);
    }
    {
        SweepSpec s{"exp5", "coordinator energy vs interference threshold, BLE on/off, N=10, K=10",
                    Axis::InterferenceThreshold, steps(-40, -5, 5), base, {"CSIM-W", "CSIM-WO"}, {"avg_energy_mw"}};
        s.fixed.world.iot.n_devices = 40;
        s.fixed.world.iot.duty_cycle = 0.8;
        out.push_back(s);
    }
    return out;
}

SweepSpec preset(const std::string& name) {
    for (auto& p : presets()) {
        if (p.name == name) return p;
    }
    throw std::invalid_argument("unknown preset: " + name + " (expected exp1..exp5)");
}

}  // namespace csim::harness
