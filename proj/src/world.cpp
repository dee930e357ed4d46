#include "csim/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csim::world {

using engine::RngStream;
using engine::StreamKind;
using engine::stream_id;

bool Position::in_bounds() const {
    return x >= 0.0 && x <= kSpaceX && y >= 0.0 && y <= kSpaceY && z >= 0.0 && z <= kSpaceZ;
}

double distance(const Position& a, const Position& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void RadioParams::validate() const {
    if (!(path_loss_exponent > 0.0)) throw std::invalid_argument("radio: path_loss_exponent must be positive");
    if (!(collision_prob >= 0.0 && collision_prob <= 1.0)) {
        throw std::invalid_argument("radio: collision_prob must lie in [0, 1]");
    }
    if (!(min_distance_m > 0.0)) throw std::invalid_argument("radio: min_distance_m must be positive");
}

void IotParams::validate() const {
    if (n_devices < 0) throw std::invalid_argument("iot: n_devices must be non-negative");
    if (!(wideband_fraction >= 0.0 && wideband_fraction <= 1.0)) {
        throw std::invalid_argument("iot: wideband_fraction must lie in [0, 1]");
    }
    if (!(duty_cycle >= 0.0 && duty_cycle <= 1.0)) throw std::invalid_argument("iot: duty_cycle must lie in [0, 1]");
    if (epoch_superframes < 1) throw std::invalid_argument("iot: epoch_superframes must be >= 1");
}

void WorldParams::validate() const {
    if (n_wbans < 1) throw std::invalid_argument("world: n_wbans must be positive");
    if (k_sensors < 1) throw std::invalid_argument("world: k_sensors must be positive");
    if (!(body_radius_m > 0.0 && body_radius_m < kSpaceZ / 2.0)) {
        throw std::invalid_argument("world: body_radius_m must lie in (0, 2)");
    }
    if (!(ble_range_m > 0.0)) throw std::invalid_argument("world: ble_range_m must be positive");
    if (!(occupancy_gain >= 0.0)) throw std::invalid_argument("world: occupancy_gain must be non-negative");
    iot.validate();
}

double received_power_dbm(const Position& tx, const Position& rx, double tx_power_dbm, const RadioParams& params) {
    const double d = std::max(distance(tx, rx), params.min_distance_m);
    return tx_power_dbm - params.reference_loss_db - 10.0 * params.path_loss_exponent * std::log10(d);
}

double received_power_dbm(const Position& tx, const Position& rx, const RadioParams& params) {
    return received_power_dbm(tx, rx, params.tx_power_dbm, params);
}

namespace {
double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
}  // namespace

double sinr_db(const Transmitter& signal, const Position& rx, std::span<const Transmitter> interferers,
               const RadioParams& params) {
    double noise_mw = dbm_to_mw(params.noise_floor_dbm);
    for (const auto& i : interferers) noise_mw += dbm_to_mw(received_power_dbm(i.position, rx, i.tx_power_dbm, params));
    return received_power_dbm(signal.position, rx, signal.tx_power_dbm, params) - 10.0 * std::log10(noise_mw);
}

LinkResult transmission_outcome(const Transmitter& tx, const Position& rx, std::span<const Transmitter> interferers,
                                const RadioParams& params, RngStream& rng) {
    LinkResult r;
    r.sinr_db = sinr_db(tx, rx, interferers, params);
    if (r.sinr_db >= params.snr_threshold_db) return r;
    r.outcome = rng.bernoulli(params.collision_prob) ? Outcome::Collision : Outcome::Success;
    return r;
}

std::vector<LinkResult> resolve_concurrent(const World& world, std::span<const Link> links, RngStream& rng) {
    std::vector<LinkResult> out;
    out.reserve(links.size());
    std::vector<Transmitter> interferers;
    std::vector<int> seen;
    for (const auto& l : links) {
        interferers = world.active_iot_on(l.channel);
        seen.clear();
        for (const auto& o : links) {
            if (o.group == l.group || o.channel != l.channel) continue;
            if (std::find(seen.begin(), seen.end(), o.group) != seen.end()) continue;  // one emission per group
            seen.push_back(o.group);
            interferers.push_back(o.tx);
        }
        out.push_back(transmission_outcome(l.tx, l.rx, interferers, world.radio(), rng));
    }
    return out;
}

bool in_vicinity(const Transmitter& source, const Position& coordinator, const RadioParams& params) {
    return received_power_dbm(source.position, coordinator, source.tx_power_dbm, params) >=
           params.vicinity_reference_dbm + params.snr_threshold_db;
}

bool reaches(const Transmitter& source, const Position& receiver, const RadioParams& params) {
    return received_power_dbm(source.position, receiver, source.tx_power_dbm, params) >=
           params.noise_floor_dbm - params.snr_threshold_db;
}

ChannelSet wifi_block(int block) {
    // Wi-Fi 1 -> ZigBee 11..14, Wi-Fi 6 -> 16..19, Wi-Fi 11 -> 21..24
    static constexpr int kFirst[] = {0, 5, 10};
    const int first = kFirst[block];
    return ChannelSet::range(first, first + 3);
}

World::World(WorldParams params, RadioParams radio, std::uint64_t seed)
    : params_(std::move(params)), radio_(radio), seed_(seed) {}

World World::scripted(RadioParams radio, double body_radius_m, std::uint64_t seed) {
    WorldParams p;
    p.n_wbans = 0;
    p.k_sensors = 0;
    p.body_radius_m = body_radius_m;
    return World(p, radio, seed);
}

std::vector<Position> World::draw_offsets(RngStream& rng, int k) const {
    const double r = params_.body_radius_m;
    std::vector<Position> out;
    out.reserve(static_cast<std::size_t>(k));
    while (static_cast<int>(out.size()) < k) {
        Position o{rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r)};
        if (distance(o, Position{}) <= r) out.push_back(o);
    }
    return out;
}

Position World::draw_coordinator(RngStream& rng, std::span<const Position> offsets) const {
    // Uniform over the positions that keep every sensor inside the room.
    double lo[3] = {0.0, 0.0, 0.0};
    double hi[3] = {kSpaceX, kSpaceY, kSpaceZ};
    for (const auto& o : offsets) {
        const double c[3] = {o.x, o.y, o.z};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::max(lo[a], -c[a]);
            hi[a] = std::min(hi[a], (a == 0 ? kSpaceX : a == 1 ? kSpaceY : kSpaceZ) - c[a]);
        }
    }
    return {rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]), rng.uniform(lo[2], hi[2])};
}

void World::place_nodes() {
    params_.validate();
    coordinators_.clear();
    sensor_offsets_.clear();
    iot_.clear();
    mobility_rng_.clear();
    iot_rng_.clear();
    for (int w = 0; w < params_.n_wbans; ++w) {
        RngStream rng(seed_, stream_id(StreamKind::Placement, static_cast<std::uint64_t>(w)));
        auto offsets = draw_offsets(rng, params_.k_sensors);
        coordinators_.push_back(draw_coordinator(rng, offsets));
        sensor_offsets_.push_back(std::move(offsets));
        mobility_rng_.emplace_back(seed_, stream_id(StreamKind::Mobility, static_cast<std::uint64_t>(w)));
    }
    const auto& ip = params_.iot;
    for (int d = 0; d < ip.n_devices; ++d) {
        RngStream rng(seed_, stream_id(StreamKind::Placement, (1ULL << 20) + static_cast<std::uint64_t>(d)));
        IotDevice dev;
        dev.id = d;
        dev.position = {rng.uniform(0.0, kSpaceX), rng.uniform(0.0, kSpaceY), rng.uniform(0.0, kSpaceZ)};
        dev.wideband = rng.bernoulli(ip.wideband_fraction);
        dev.tx_power_dbm = dev.wideband ? ip.wideband_tx_power_dbm : ip.narrowband_tx_power_dbm;
        dev.duty_cycle = ip.duty_cycle;
        iot_.push_back(dev);
        iot_rng_.emplace_back(seed_, stream_id(StreamKind::IotDevice, static_cast<std::uint64_t>(d)));
    }
    active_.assign(iot_.size(), false);
    redraw_iot_channels();
}

void World::mobility_step() {
    for (int w = 0; w < wban_count(); ++w) {
        coordinators_[w] = draw_coordinator(mobility_rng_.at(w), sensor_offsets_[w]);
    }
}

void World::redraw_iot_channels() {
    for (std::size_t d = 0; d < iot_.size(); ++d) {
        auto& rng = iot_rng_.at(d);
        if (iot_[d].wideband) {
            iot_[d].occupied_channels = wifi_block(static_cast<int>(rng.uniform_index(3)));
        } else {
            iot_[d].occupied_channels = spectrum::singleton(ChannelId(static_cast<int>(rng.uniform_index(16))));
        }
    }
}

void World::advance_activity(engine::SimTime tick) {
    if (activity_tick_ && *activity_tick_ == tick) return;
    activity_tick_ = tick;
    for (std::size_t d = 0; d < iot_.size(); ++d) active_[d] = iot_rng_.at(d).bernoulli(iot_[d].duty_cycle);
}

std::vector<Transmitter> World::active_iot_on(ChannelId channel) const {
    std::vector<Transmitter> out;
    for (std::size_t d = 0; d < iot_.size(); ++d) {
        if (active_[d] && iot_[d].occupied_channels.contains(channel)) out.push_back(iot_[d].transmitter());
    }
    return out;
}

int World::add_wban(const Position& coordinator, std::vector<Position> sensor_offsets) {
    coordinators_.push_back(coordinator);
    sensor_offsets_.push_back(std::move(sensor_offsets));
    const auto w = static_cast<std::uint64_t>(coordinators_.size() - 1);
    mobility_rng_.emplace_back(seed_, stream_id(StreamKind::Mobility, w));
    params_.n_wbans = wban_count();
    return static_cast<int>(w);
}

int World::add_iot_device(IotDevice device) {
    device.id = static_cast<int>(iot_.size());
    iot_.push_back(device);
    iot_rng_.emplace_back(seed_, stream_id(StreamKind::IotDevice, static_cast<std::uint64_t>(device.id)));
    active_.push_back(false);
    activity_tick_.reset();
    params_.iot.n_devices = static_cast<int>(iot_.size());
    return device.id;
}

std::vector<BleAnnouncement> World::emit_ble_announcements(engine::SimTime time,
                                                           std::span<const ChannelSet> wban_channels) const {
    if (wban_channels.size() != coordinators_.size()) {
        throw std::invalid_argument("emit_ble_announcements: one channel set per WBAN required");
    }
    std::vector<BleAnnouncement> out;
    out.reserve(coordinators_.size() + iot_.size());
    for (int w = 0; w < wban_count(); ++w) {
        out.push_back({{AnnouncementSource::Kind::Coordinator, w}, wban_channels[w], time, coordinator_tx(w)});
    }
    for (const auto& d : iot_) {
        out.push_back({{AnnouncementSource::Kind::Iot, d.id}, d.occupied_channels, time, d.transmitter()});
    }
    return out;
}

ChannelSet World::lch_for(int wban, std::span<const BleAnnouncement> announcements, ChannelSet own) const {
    const Position& me = coordinator(wban);
    ChannelSet lch;
    for (const auto& a : announcements) {
        if (a.source == AnnouncementSource{AnnouncementSource::Kind::Coordinator, wban}) continue;
        if (distance(a.transmitter.position, me) > params_.ble_range_m) continue;
        if (!in_vicinity(a.transmitter, me, radio_)) continue;
        lch |= a.channels_in_use;
    }
    return lch - own;
}

std::vector<double> World::noise_samples(int wban, ChannelId channel, int u, RngStream& rng) const {
    const Position& me = coordinator(wban);
    int active = 0;
    for (std::size_t d = 0; d < iot_.size(); ++d) {
        if (active_[d] && iot_[d].occupied_channels.contains(channel) && in_vicinity(iot_[d].transmitter(), me, radio_)) {
            ++active;
        }
    }
    const double scale = 1.0 + params_.occupancy_gain * active;
    std::vector<double> samples(static_cast<std::size_t>(2 * u));
    for (auto& s : samples) s = scale * rng.gaussian();
    return samples;
}

double World::expected_noise_scale(int wban, ChannelId channel) const {
    const Position& me = coordinator(wban);
    double expected = 0.0;
    for (const auto& d : iot_) {
        if (d.occupied_channels.contains(channel) && in_vicinity(d.transmitter(), me, radio_)) expected += d.duty_cycle;
    }
    return 1.0 + params_.occupancy_gain * expected;
}

}  // namespace csim::world
