#include "csim/baseline_ssa.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace csim::baseline_ssa {

using engine::EventKind;
using engine::SimTime;
using world::Link;

InterferenceSet interference_set(const world::World& world, int a, int b) {
    if (a > b) std::swap(a, b);
    InterferenceSet is;
    is.wban_pair = {a, b};
    const auto& radio = world.radio();
    for (int j = 0; j < world.sensors_per_wban(a); ++j) {
        if (world::reaches(world.sensor_tx(a, j), world.coordinator(b), radio)) is.members.push_back({a, j});
    }
    for (int j = 0; j < world.sensors_per_wban(b); ++j) {
        if (world::reaches(world.sensor_tx(b, j), world.coordinator(a), radio)) is.members.push_back({b, j});
    }
    return is;
}

std::vector<InterferenceSet> build_interference_sets(const world::World& world) {
    std::vector<InterferenceSet> out;
    const int n = world.wban_count();
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) out.push_back(interference_set(world, a, b));
    }
    return out;
}

std::vector<ChannelId> greedy_coloring(const std::vector<std::vector<int>>& adjacency, ChannelSet g,
                                       engine::RngStream& rng, int* unprovisioned) {
    if (g.empty()) throw std::invalid_argument("greedy_coloring: empty channel set");
    const int n = static_cast<int>(adjacency.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return adjacency[static_cast<std::size_t>(x)].size() > adjacency[static_cast<std::size_t>(y)].size();
    });
    std::vector<int> color(static_cast<std::size_t>(n), -1);
    const auto palette = g.members();
    int missed = 0;
    for (int v : order) {
        std::array<int, spectrum::kChannelCount> conflicts{};
        for (int u : adjacency[static_cast<std::size_t>(v)]) {
            const int c = color[static_cast<std::size_t>(u)];
            if (c >= 0) ++conflicts[static_cast<std::size_t>(c)];
        }
        int pick = -1;
        for (auto ch : palette) {
            if (conflicts[static_cast<std::size_t>(ch.index())] == 0) {
                pick = ch.index();
                break;
            }
        }
        if (pick < 0) {
            int best = std::numeric_limits<int>::max();
            std::vector<int> ties;
            for (auto ch : palette) {
                const int k = conflicts[static_cast<std::size_t>(ch.index())];
                if (k < best) {
                    best = k;
                    ties.clear();
                }
                if (k == best) ties.push_back(ch.index());
            }
            pick = ties[rng.uniform_index(ties.size())];
            ++missed;
        }
        color[static_cast<std::size_t>(v)] = pick;
    }
    if (unprovisioned) *unprovisioned = missed;
    std::vector<ChannelId> out;
    out.reserve(color.size());
    for (int c : color) out.emplace_back(c);
    return out;
}

Coloring assign_orthogonal_channels(std::span<const InterferenceSet> sets, ChannelSet g, engine::RngStream& rng) {
    std::set<SensorRef> vertices;
    for (const auto& s : sets) vertices.insert(s.members.begin(), s.members.end());
    std::vector<SensorRef> index(vertices.begin(), vertices.end());
    auto id_of = [&](const SensorRef& r) {
        return static_cast<int>(std::lower_bound(index.begin(), index.end(), r) - index.begin());
    };
    std::vector<std::vector<int>> adj(index.size());
    std::vector<int> ids;
    for (const auto& s : sets) {
        ids.clear();
        for (const auto& m : s.members) ids.push_back(id_of(m));
        for (int x : ids) {
            auto& row = adj[static_cast<std::size_t>(x)];
            for (int y : ids) {
                if (x != y) row.push_back(y);
            }
        }
    }
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    Coloring out;
    const auto colors = greedy_coloring(adj, g, rng, &out.unprovisioned);
    for (std::size_t i = 0; i < index.size(); ++i) out.channel.emplace(index[i], colors[i]);
    return out;
}

SsaNetwork::SsaNetwork(world::World& world, engine::Simulator& sim, protocol::ProtocolParams params,
                       std::uint64_t seed, trace::TraceLog* trace)
    : world_(world),
      sim_(sim),
      params_(std::move(params)),
      seed_(seed),
      trace_(trace),
      medium_rng_(seed, engine::stream_id(engine::StreamKind::Medium, 1)),
      coloring_rng_(seed, engine::stream_id(engine::StreamKind::Medium, 2)) {
    params_.validate();
}

void SsaNetwork::record(const std::string& frame, int wban, int node, int slot, int channel,
                        const std::string& outcome, std::map<std::string, std::int64_t> detail) {
    if (!trace_ || !trace_->enabled()) return;
    trace_->record({"SSA", superframe_, sim_.now().ticks, wban, node, frame, slot, channel, outcome, std::move(detail)});
}

void SsaNetwork::setup_network() {
    const int n = world_.wban_count();
    if (n == 0) throw std::invalid_argument("setup_network: no WBANs in the world");
    const int k = world_.sensors_per_wban(0);
    schedule_ = {k, params_.fcs_length, params_.inactive_length};
    defaults_.clear();
    crd_rng_.clear();
    for (int w = 0; w < n; ++w) {
        crd_rng_.emplace_back(seed_, engine::stream_id(engine::StreamKind::Coordinator, static_cast<std::uint64_t>(w)));
        defaults_.emplace_back(static_cast<int>(crd_rng_.back().uniform_index(spectrum::kChannelCount)));
        record("setup", w, -1, -1, defaults_.back().index(), "default", {{"k", k}});
    }
    queues_.assign(static_cast<std::size_t>(n), std::vector<std::deque<std::int64_t>>(static_cast<std::size_t>(k)));
    next_sequence_.assign(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
    receptions_.assign(static_cast<std::size_t>(n),
                       std::vector<std::map<std::int64_t, int>>(static_cast<std::size_t>(k)));
}

void SsaNetwork::attach() {
    sim_.on(EventKind::SuperframeBoundary, [this](const engine::Event& e) {
        begin_superframe(e.payload.superframe);
        const auto next = e.payload.superframe + 1;
        if (superframe_limit_ < 0 || next < superframe_limit_) schedule_superframe(next);
    });
    sim_.on(EventKind::MobilityStep, [this](const engine::Event& e) {
        const auto sf = e.payload.superframe;
        if (sf > 0) {
            world_.mobility_step();
            if (sf % world_.params().iot.epoch_superframes == 0) world_.redraw_iot_channels();
        }
        assign_channels();
    });
    sim_.on(EventKind::SlotStart, [this](const engine::Event& e) {
        if (e.payload.frame == 0) {
            tdma_slot(e.payload.slot);
        } else {
            end_superframe();
        }
    });
}

void SsaNetwork::schedule_superframe(std::int64_t sf) {
    const auto t0 = SimTime{sf * schedule_.period()};
    sim_.schedule(t0, EventKind::SuperframeBoundary, {sf, -1, -1, -1});
    sim_.schedule(t0, EventKind::MobilityStep, {sf, -1, -1, -1});
    for (int j = 0; j < schedule_.k; ++j) {
        sim_.schedule(t0 + schedule_.tdma_offset(j), EventKind::SlotStart, {sf, -1, j, 0});
    }
    sim_.schedule(t0 + schedule_.fbtdma_offset(schedule_.k), EventKind::SlotStart, {sf, -1, -1, 3});
}

ChannelId SsaNetwork::sensor_channel(int wban, int node) const {
    const auto it = coloring_.channel.find({wban, node});
    return it == coloring_.channel.end() ? defaults_.at(static_cast<std::size_t>(wban)) : it->second;
}

void SsaNetwork::begin_superframe(std::int64_t sf) {
    superframe_ = sf;
    const auto n = defaults_.size();
    current_ = {};
    current_.superframe = sf;
    current_.occupied.assign(n, {});
    current_.channels_used.assign(n, {});
    current_.activity.assign(n, {});
    for (std::size_t w = 0; w < n; ++w) {
        for (std::size_t j = 0; j < queues_[w].size(); ++j) {
            queues_[w][j].push_back(next_sequence_[w][j]++);
            ++counters_.generated;
        }
    }
}

void SsaNetwork::assign_channels() {
    sets_ = build_interference_sets(world_);
    coloring_ = assign_orthogonal_channels(sets_, ChannelSet::all(), coloring_rng_);
    const int n = world_.wban_count();
    for (int w = 0; w < n; ++w) {
        ChannelSet used;
        for (int j = 0; j < world_.sensors_per_wban(w); ++j) used.insert(sensor_channel(w, j));
        current_.channels_used[static_cast<std::size_t>(w)] = used;
    }
    const auto& radio = world_.radio();
    for (int a = 0; a < n; ++a) {
        const auto& me = world_.coordinator(a);
        ChannelSet occ;
        for (const auto& d : world_.iot_devices()) {
            if (world::in_vicinity(d.transmitter(), me, radio)) occ |= d.occupied_channels;
        }
        for (int b = 0; b < n; ++b) {
            if (b != a && world::in_vicinity(world_.coordinator_tx(b), me, radio)) {
                occ |= current_.channels_used[static_cast<std::size_t>(b)];
            }
        }
        for (const auto& is : sets_) {
            if (is.wban_pair.first != a && is.wban_pair.second != a) continue;
            for (const auto& m : is.members) occ.insert(coloring_.channel.at(m));
        }
        current_.occupied[static_cast<std::size_t>(a)] = occ;
    }
    record("assign", -1, -1, -1, -1, "coloring",
           {{"vertices", static_cast<std::int64_t>(coloring_.channel.size())}, {"unprovisioned", coloring_.unprovisioned}});
}

void SsaNetwork::tdma_slot(int slot) {
    world_.advance_activity(sim_.now());
    std::vector<Link> links;
    std::vector<int> owners;
    for (std::size_t w = 0; w < defaults_.size(); ++w) {
        if (queues_[w][static_cast<std::size_t>(slot)].empty()) continue;
        const int wi = static_cast<int>(w);
        links.push_back({world_.sensor_tx(wi, slot), world_.coordinator(wi), sensor_channel(wi, slot), wi});
        owners.push_back(wi);
    }
    const auto data = world::resolve_concurrent(world_, links, medium_rng_);
    std::vector<Link> acks;
    std::vector<int> ack_owners;
    for (std::size_t i = 0; i < owners.size(); ++i) {
        const int w = owners[i];
        auto& q = queues_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)];
        const bool ok = data[i].outcome == world::Outcome::Success;
        ++counters_.attempts;
        record("tdma-data", w, slot, slot, links[i].channel.index(), ok ? "success" : "collision", {{"seq", q.front()}});
        if (!ok) {
            ++counters_.collisions;
            continue;
        }
        ++receptions_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)][q.front()];
        acks.push_back({world_.coordinator_tx(w), world_.sensor(w, slot), links[i].channel, w});
        ack_owners.push_back(w);
    }
    const auto ack_results = world::resolve_concurrent(world_, acks, medium_rng_);
    for (std::size_t i = 0; i < ack_owners.size(); ++i) {
        const int w = ack_owners[i];
        const bool ok = ack_results[i].outcome == world::Outcome::Success;
        record("tdma-ack", w, -1, slot, acks[i].channel.index(), ok ? "success" : "lost");
        if (!ok) continue;
        auto& q = queues_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)];
        auto& log = receptions_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)];
        const auto it = log.find(q.front());
        if (it->second > 1) {
            ++counters_.duplicates;
        } else {
            ++counters_.delivered;
        }
        log.erase(it);
        q.pop_front();
    }
}

void SsaNetwork::end_superframe() { samples_.push_back(current_); }

metrics::DeliveryCounters SsaNetwork::counters() const {
    auto c = counters_;
    c.pending = 0;
    for (const auto& w : queues_) {
        for (const auto& q : w) c.pending += static_cast<std::int64_t>(q.size());
    }
    return c;
}

}  // namespace csim::baseline_ssa
