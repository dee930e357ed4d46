#include "csim/protocol.hpp"

#include <stdexcept>

namespace csim::protocol {

using engine::EventKind;
using engine::EventPayload;
using engine::SimTime;
using world::Link;

namespace {
enum Frame { kTdma = 0, kFcs = 1, kFbtdma = 2, kInactive = 3 };
}

void ProtocolParams::validate() const {
    if (fcs_length < 1) throw std::invalid_argument("protocol: fcs_length must be >= 1");
    if (inactive_length < 0) throw std::invalid_argument("protocol: inactive_length must be >= 0");
    if (!(stability_threshold >= 0.0 && stability_threshold <= 1.0)) {
        throw std::invalid_argument("protocol: stability_threshold must lie in [0, 1]");
    }
    noise.validate();
}

const char* to_string(SensorMode m) {
    switch (m) {
        case SensorMode::AwaitSlot: return "await-slot";
        case SensorMode::AwaitAck: return "await-ack";
        case SensorMode::AwaitFbtdma: return "await-fbtdma";
        case SensorMode::Sleep: return "sleep";
    }
    return "unknown";
}

CsimNetwork::CsimNetwork(world::World& world, engine::Simulator& sim, ProtocolParams params, std::uint64_t seed,
                         trace::TraceLog* trace)
    : world_(world),
      sim_(sim),
      params_(std::move(params)),
      seed_(seed),
      trace_(trace),
      medium_rng_(seed, engine::stream_id(engine::StreamKind::Medium, 0)) {
    params_.validate();
}

void CsimNetwork::record(const std::string& frame, int wban, int node, int slot, int channel,
                         const std::string& outcome, std::map<std::string, std::int64_t> detail) {
    if (!trace_ || !trace_->enabled()) return;
    trace_->record({"CSIM", superframe_, tick(), wban, node, frame, slot, channel, outcome, std::move(detail)});
}

void CsimNetwork::setup_network() {
    const int n = world_.wban_count();
    if (n == 0) throw std::invalid_argument("setup_network: no WBANs in the world");
    const int k = world_.sensors_per_wban(0);
    for (int w = 1; w < n; ++w) {
        if (world_.sensors_per_wban(w) != k) throw std::invalid_argument("setup_network: WBANs differ in K");
    }
    schedule_ = {k, params_.fcs_length, params_.inactive_length};
    crds_.clear();
    sensors_.clear();
    crd_rng_.clear();
    ack_handles_.assign(static_cast<std::size_t>(n), std::vector<engine::EventHandle>(static_cast<std::size_t>(k)));
    for (int w = 0; w < n; ++w) {
        crd_rng_.emplace_back(seed_, engine::stream_id(engine::StreamKind::Coordinator, static_cast<std::uint64_t>(w)));
        CoordinatorState c;
        c.wban_id = w;
        c.default_channel = ChannelId(static_cast<int>(crd_rng_.back().uniform_index(spectrum::kChannelCount)));
        c.receptions.resize(static_cast<std::size_t>(k));
        std::vector<SensorState> ss;
        for (int j = 0; j < k; ++j) {
            SensorState s;
            s.sensor_id = j;
            s.wban_id = w;
            s.assigned_ts = j;
            s.current_channel = c.default_channel;
            s.mode = SensorMode::Sleep;
            ss.push_back(std::move(s));
        }
        record("setup", w, -1, -1, c.default_channel.index(), "default", {{"k", k}});
        crds_.push_back(std::move(c));
        sensors_.push_back(std::move(ss));
    }
}

void CsimNetwork::attach() {
    sim_.on(EventKind::SuperframeBoundary, [this](const engine::Event& e) {
        begin_superframe(e.payload.superframe);
        const auto next = e.payload.superframe + 1;
        if (superframe_limit_ < 0 || next < superframe_limit_) schedule_superframe(next);
    });
    sim_.on(EventKind::MobilityStep, [this](const engine::Event& e) {
        const auto sf = e.payload.superframe;
        if (sf == 0) return;
        world_.mobility_step();
        if (sf % world_.params().iot.epoch_superframes == 0) world_.redraw_iot_channels();
    });
    sim_.on(EventKind::BleBroadcast, [this](const engine::Event&) { ble_broadcast(); });
    sim_.on(EventKind::SlotStart, [this](const engine::Event& e) {
        switch (e.payload.frame) {
            case kTdma: tdma_slot(e.payload.slot); break;
            case kFcs: fcs_frame(); break;
            case kFbtdma: fbtdma_slot(e.payload.slot); break;
            case kInactive: end_superframe(); break;
            default: throw std::logic_error("unknown frame in slot event");
        }
    });
    sim_.on(EventKind::Beacon, [this](const engine::Event& e) {
        if (e.payload.frame == kFcs) fcs_beacon();
    });
    sim_.on(EventKind::AckDeadline, [this](const engine::Event& e) { ack_deadline(e.payload.node, e.payload.slot); });
}

void CsimNetwork::schedule_superframe(std::int64_t sf) {
    const auto t0 = SimTime{sf * schedule_.period()};
    const int k = schedule_.k;
    sim_.schedule(t0, EventKind::SuperframeBoundary, {sf, -1, -1, -1});
    sim_.schedule(t0, EventKind::MobilityStep, {sf, -1, -1, -1});
    sim_.schedule(t0, EventKind::BleBroadcast, {sf, -1, -1, -1});
    sim_.schedule(t0 + schedule_.beacon_offset(), EventKind::Beacon, {sf, -1, -1, kTdma});
    for (int j = 0; j < k; ++j) sim_.schedule(t0 + schedule_.tdma_offset(j), EventKind::SlotStart, {sf, -1, j, kTdma});
    sim_.schedule(t0 + schedule_.fcs_decision_offset(), EventKind::SlotStart, {sf, -1, -1, kFcs});
    sim_.schedule(t0 + schedule_.fcs_beacon_offset(), EventKind::Beacon, {sf, -1, -1, kFcs});
    for (int m = 0; m < k; ++m) {
        sim_.schedule(t0 + schedule_.fbtdma_offset(m), EventKind::SlotStart, {sf, -1, m, kFbtdma});
    }
    sim_.schedule(t0 + schedule_.fbtdma_offset(k), EventKind::SlotStart, {sf, -1, -1, kInactive});
}

void CsimNetwork::begin_superframe(std::int64_t sf) {
    superframe_ = sf;
    const auto n = crds_.size();
    current_ = {};
    current_.superframe = sf;
    current_.occupied.assign(n, {});
    current_.channels_used.assign(n, {});
    current_.activity.assign(n, {});
    for (std::size_t w = 0; w < n; ++w) {
        auto& c = crds_[w];
        c.lis.clear();
        c.previous_stable = c.stable_channel;
        c.stable_channel.reset();
        c.silent = false;
        if (c.fbtdma_failure_last) current_.activity[w].alerts = 1;
        c.fbtdma_failure_last = false;
        for (auto& s : sensors_[w]) {
            s.packet_queue.push_back(s.next_sequence++);
            ++counters_.generated;
            s.mode = SensorMode::AwaitSlot;
            s.current_channel = c.default_channel;
            s.assigned_imts.reset();
            s.beacon_decoded = false;
        }
    }
}

void CsimNetwork::ble_broadcast() {
    const auto n = crds_.size();
    std::vector<ChannelSet> announced(n);
    for (std::size_t w = 0; w < n; ++w) {
        announced[w] = spectrum::singleton(crds_[w].default_channel);
        if (params_.announce_stable && crds_[w].previous_stable) announced[w].insert(*crds_[w].previous_stable);
    }
    const auto ann = world_.emit_ble_announcements(sim_.now(), announced);
    for (std::size_t w = 0; w < n; ++w) {
        auto& c = crds_[w];
        c.lch = world_.lch_for(static_cast<int>(w), ann, announced[w]);
        current_.occupied[w] = c.lch;
        record("ble", static_cast<int>(w), -1, -1, -1, "lch", {{"lch_mask", c.lch.mask()}, {"lch_size", c.lch.size()}});
    }
}

bool CsimNetwork::coordinator_slot(int wban, int slot, bool data_received, std::int64_t sequence) {
    auto& c = crds_[static_cast<std::size_t>(wban)];
    if (!data_received) {
        c.lis.push_back(slot);
        return false;
    }
    ++c.receptions[static_cast<std::size_t>(slot)][sequence];
    return true;
}

void CsimNetwork::release_head(int wban, int node) {
    auto& s = sensors_[static_cast<std::size_t>(wban)][static_cast<std::size_t>(node)];
    auto& log = crds_[static_cast<std::size_t>(wban)].receptions[static_cast<std::size_t>(node)];
    const auto seq = s.packet_queue.front();
    s.packet_queue.pop_front();
    const auto it = log.find(seq);
    const int count = it == log.end() ? 0 : it->second;
    if (count > 1) {
        ++counters_.duplicates;
    } else {
        ++counters_.delivered;
    }
    if (it != log.end()) log.erase(it);
}

void CsimNetwork::tdma_slot(int slot) {
    world_.advance_activity(sim_.now());
    std::vector<Link> links;
    std::vector<int> owners;
    for (std::size_t w = 0; w < crds_.size(); ++w) {
        auto& s = sensors_[w][static_cast<std::size_t>(slot)];
        if (s.packet_queue.empty()) continue;
        s.mode = SensorMode::AwaitAck;
        links.push_back({world_.sensor_tx(static_cast<int>(w), slot), world_.coordinator(static_cast<int>(w)),
                         crds_[w].default_channel, static_cast<int>(w)});
        owners.push_back(static_cast<int>(w));
    }
    const auto data = world::resolve_concurrent(world_, links, medium_rng_);

    std::vector<Link> acks;
    std::vector<int> ack_owners;
    for (std::size_t i = 0; i < owners.size(); ++i) {
        const int w = owners[i];
        auto& s = sensors_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)];
        const bool ok = data[i].outcome == world::Outcome::Success;
        ++counters_.attempts;
        if (!ok) ++counters_.collisions;
        const auto seq = s.packet_queue.front();
        ack_handles_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)] =
            sim_.schedule(sim_.now(), EventKind::AckDeadline, {superframe_, w, slot, kTdma});
        const bool acked = coordinator_slot(w, slot, ok, seq);
        const auto& log = crds_[static_cast<std::size_t>(w)].receptions[static_cast<std::size_t>(slot)];
        const auto rec = log.find(seq);
        record("tdma-data", w, slot, slot, links[i].channel.index(), ok ? "success" : "collision",
               {{"seq", seq}, {"receptions", rec == log.end() ? 0 : rec->second}});
        if (acked) {
            acks.push_back({world_.coordinator_tx(w), world_.sensor(w, slot), crds_[static_cast<std::size_t>(w)].default_channel, w});
            ack_owners.push_back(w);
        }
    }
    const auto ack_results = world::resolve_concurrent(world_, acks, medium_rng_);
    for (std::size_t i = 0; i < ack_owners.size(); ++i) {
        const int w = ack_owners[i];
        const bool ok = ack_results[i].outcome == world::Outcome::Success;
        record("tdma-ack", w, -1, slot, acks[i].channel.index(), ok ? "success" : "lost");
        if (!ok) continue;
        release_head(w, slot);
        sensors_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)].mode = SensorMode::Sleep;
        sim_.cancel(ack_handles_[static_cast<std::size_t>(w)][static_cast<std::size_t>(slot)]);
    }
}

void CsimNetwork::ack_deadline(int wban, int slot) {
    auto& s = sensors_[static_cast<std::size_t>(wban)][static_cast<std::size_t>(slot)];
    if (s.mode == SensorMode::AwaitAck) s.mode = SensorMode::AwaitFbtdma;
}

void CsimNetwork::fcs_frame() {
    world_.advance_activity(sim_.now());
    for (std::size_t w = 0; w < crds_.size(); ++w) {
        auto& c = crds_[w];
        const int wi = static_cast<int>(w);
        if (c.lis.empty()) {
            record("fcs-decision", wi, -1, -1, -1, "idle", {{"lis", 0}});
            continue;
        }
        current_.activity[w].alerts = 1;
        const auto us = spectrum::compute_us(ChannelSet::all(), c.lch, c.default_channel);
        auto& rng = crd_rng_[w];
        int cr = 0;
        int sensed = 0;
        if (!us.empty()) {
            const auto members = us.members();
            c.stable_channel = members[rng.uniform_index(members.size())];
        } else {
            std::vector<ChannelId> candidates;
            for (auto ch : c.lch.members()) {
                if (ch != c.default_channel) candidates.push_back(ch);
            }
            spectrum::NoiseModel model = params_.noise;
            for (int ch = 0; ch < spectrum::kChannelCount; ++ch) {
                model.scale[static_cast<std::size_t>(ch)] = world_.expected_noise_scale(wi, ChannelId(ch));
            }
            const auto result = spectrum::select_stable_channel(
                candidates, model, params_.stability_threshold,
                [&](ChannelId ch) { return world_.noise_samples(wi, ch, model.u, rng); });
            cr = 1;
            sensed = result.channels_sensed;
            ++current_.activity[w].cr_engagements;
            current_.activity[w].channels_scanned += sensed;
            ++cr_engagements_total_;
            c.stable_channel = result.channel;
            c.silent = !result.channel.has_value();
        }
        for (std::size_t m = 0; m < c.lis.size(); ++m) {
            sensors_[w][static_cast<std::size_t>(c.lis[m])].assigned_imts = static_cast<int>(m);
        }
        record("fcs-decision", wi, -1, -1, c.stable_channel ? c.stable_channel->index() : -1,
               c.silent ? "silent" : (cr ? "cr" : "us"),
               {{"lis", static_cast<std::int64_t>(c.lis.size())}, {"us_size", us.size()}, {"cr", cr}, {"sensed", sensed}});
    }
}

void CsimNetwork::fcs_beacon() {
    world_.advance_activity(sim_.now());
    std::vector<Link> links;
    std::vector<std::pair<int, int>> rx;
    for (std::size_t w = 0; w < crds_.size(); ++w) {
        const auto& c = crds_[w];
        if (c.lis.empty() || !c.stable_channel) continue;
        for (int node : c.lis) {
            links.push_back({world_.coordinator_tx(static_cast<int>(w)), world_.sensor(static_cast<int>(w), node),
                             c.default_channel, static_cast<int>(w)});
            rx.emplace_back(static_cast<int>(w), node);
        }
    }
    const auto results = world::resolve_concurrent(world_, links, medium_rng_);
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const auto [w, node] = rx[i];
        auto& s = sensors_[static_cast<std::size_t>(w)][static_cast<std::size_t>(node)];
        s.beacon_decoded = results[i].outcome == world::Outcome::Success;
        if (s.beacon_decoded) s.current_channel = *crds_[static_cast<std::size_t>(w)].stable_channel;
        record("fcs-beacon", w, node, -1, links[i].channel.index(), s.beacon_decoded ? "decoded" : "missed");
    }
}

void CsimNetwork::fbtdma_slot(int m) {
    std::vector<Link> links;
    std::vector<int> owners;
    bool any_scheduled = false;
    for (std::size_t w = 0; w < crds_.size(); ++w) {
        auto& c = crds_[w];
        if (static_cast<std::size_t>(m) >= c.lis.size() || !c.stable_channel) continue;
        any_scheduled = true;
        const int node = c.lis[static_cast<std::size_t>(m)];
        const auto& s = sensors_[w][static_cast<std::size_t>(node)];
        if (!s.beacon_decoded || s.mode != SensorMode::AwaitFbtdma) {
            // nothing arrives in this backup slot
            c.fbtdma_failure_last = true;
            continue;
        }
        links.push_back({world_.sensor_tx(static_cast<int>(w), node), world_.coordinator(static_cast<int>(w)),
                         *c.stable_channel, static_cast<int>(w)});
        owners.push_back(static_cast<int>(w));
    }
    if (!any_scheduled) return;
    world_.advance_activity(sim_.now());
    const auto data = world::resolve_concurrent(world_, links, medium_rng_);
    std::vector<Link> acks;
    std::vector<std::pair<int, int>> ack_rx;
    for (std::size_t i = 0; i < owners.size(); ++i) {
        const int w = owners[i];
        auto& c = crds_[static_cast<std::size_t>(w)];
        const int node = c.lis[static_cast<std::size_t>(m)];
        const auto seq = sensors_[static_cast<std::size_t>(w)][static_cast<std::size_t>(node)].packet_queue.front();
        const bool ok = data[i].outcome == world::Outcome::Success;
        ++counters_.attempts;
        record("fbtdma-data", w, node, m, links[i].channel.index(), ok ? "success" : "collision", {{"seq", seq}});
        if (!ok) {
            ++counters_.collisions;
            c.fbtdma_failure_last = true;
            continue;
        }
        ++c.receptions[static_cast<std::size_t>(node)][seq];
        acks.push_back({world_.coordinator_tx(w), world_.sensor(w, node), *c.stable_channel, w});
        ack_rx.emplace_back(w, node);
    }
    const auto ack_results = world::resolve_concurrent(world_, acks, medium_rng_);
    for (std::size_t i = 0; i < ack_rx.size(); ++i) {
        const auto [w, node] = ack_rx[i];
        const bool ok = ack_results[i].outcome == world::Outcome::Success;
        record("fbtdma-ack", w, node, m, acks[i].channel.index(), ok ? "success" : "lost");
        if (!ok) continue;
        release_head(w, node);
        sensors_[static_cast<std::size_t>(w)][static_cast<std::size_t>(node)].mode = SensorMode::Sleep;
    }
}

void CsimNetwork::end_superframe() {
    for (std::size_t w = 0; w < crds_.size(); ++w) {
        const auto& c = crds_[w];
        current_.channels_used[w] = spectrum::singleton(c.default_channel);
        if (c.stable_channel) current_.channels_used[w].insert(*c.stable_channel);
        for (auto& s : sensors_[w]) {
            if (s.mode != SensorMode::Sleep) s.mode = SensorMode::AwaitSlot;  // carried over
            s.assigned_imts.reset();
        }
    }
    samples_.push_back(current_);
}

metrics::DeliveryCounters CsimNetwork::counters() const {
    auto c = counters_;
    c.pending = 0;
    for (const auto& ss : sensors_) {
        for (const auto& s : ss) c.pending += static_cast<std::int64_t>(s.packet_queue.size());
    }
    return c;
}

}  // namespace csim::protocol
