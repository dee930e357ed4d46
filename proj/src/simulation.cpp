#include "csim/simulation.hpp"

#include "csim/baseline_ssa.hpp"
#include "csim/engine.hpp"
#include "csim/protocol.hpp"
#include "csim/world.hpp"

namespace csim::simulation {

namespace {

template <class Network>
RunResult drive(const config::ScenarioConfig& cfg, std::uint64_t seed, trace::TraceLog* trace) {
    world::World world(cfg.world, cfg.radio, seed);
    world.place_nodes();
    engine::Simulator sim;
    Network net(world, sim, cfg.protocol, seed, trace);
    net.setup_network();
    net.attach();
    net.set_superframe_limit(cfg.superframes_per_run);
    net.schedule_superframe(0);
    const auto period = net.schedule().period();
    sim.run_until(engine::SimTime{static_cast<std::int64_t>(cfg.superframes_per_run) * period - 1});

    RunResult r;
    r.scheme = cfg.scheme;
    r.seed = seed;
    r.slots_per_superframe = period;
    r.samples = net.samples();
    r.counters = net.counters();
    r.events_processed = sim.processed();
    r.pr_avchs = metrics::pr_avchs(r.samples);
    r.avg_rf = metrics::avg_reuse_factor(r.samples, cfg.reuse);
    r.energy_w_mw = metrics::avg_energy(r.samples, period, cfg.energy, true);
    r.energy_wo_mw = metrics::avg_energy(r.samples, period, cfg.energy, false);
    return r;
}

}  // namespace

RunResult run_scenario(const config::ScenarioConfig& cfg, std::uint64_t seed, trace::TraceLog* trace) {
    cfg.validate();
    if (cfg.scheme == config::Scheme::Csim) return drive<protocol::CsimNetwork>(cfg, seed, trace);
    return drive<baseline_ssa::SsaNetwork>(cfg, seed, trace);
}

}  // namespace csim::simulation
