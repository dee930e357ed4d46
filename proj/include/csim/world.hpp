#pragma once

// Physical scenario: placement in a 10 x 10 x 4 m room, rigid-body WBAN
// mobility, log-distance propagation, SINR decisions, background IoT
// occupancy and BLE channel announcements.

#include "csim/engine.hpp"
#include "csim/spectrum.hpp"

#include <optional>
#include <span>
#include <vector>

namespace csim::world {

using spectrum::ChannelId;
using spectrum::ChannelSet;

inline constexpr double kSpaceX = 10.0;
inline constexpr double kSpaceY = 10.0;
inline constexpr double kSpaceZ = 4.0;

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool in_bounds() const;
    Position operator+(const Position& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Position operator-(const Position& o) const { return {x - o.x, y - o.y, z - o.z}; }
    bool operator==(const Position&) const = default;
};

double distance(const Position& a, const Position& b);

struct RadioParams {
    double tx_power_dbm = -10.0;  // body sensors
    double coordinator_tx_power_dbm = -10.0;
    /// SINR decision threshold in dB; also the interference-range knob.
    double snr_threshold_db = -25.0;
    double path_loss_exponent = 3.0;
    double reference_loss_db = 40.0;
    double noise_floor_dbm = -95.0;
    /// Probability that a below-threshold reception is actually lost.
    double collision_prob = 1.0;
    /// A device is in a coordinator's vicinity when its received power is at
    /// least this level plus snr_threshold_db.
    double vicinity_reference_dbm = -30.0;
    double min_distance_m = 0.1;

    void validate() const;  // throws std::invalid_argument
};

struct Transmitter {
    Position position;
    double tx_power_dbm = -10.0;
};

/// Coincident positions use params.min_distance_m.
double received_power_dbm(const Position& tx, const Position& rx, double tx_power_dbm, const RadioParams& params);
/// Uses params.tx_power_dbm.
double received_power_dbm(const Position& tx, const Position& rx, const RadioParams& params);

double sinr_db(const Transmitter& signal, const Position& rx, std::span<const Transmitter> interferers,
               const RadioParams& params);

enum class Outcome { Success, Collision };

struct LinkResult {
    Outcome outcome = Outcome::Success;
    double sinr_db = 0.0;
};

/// Success iff SINR >= snr_threshold_db; a failing reception is lost with
/// probability collision_prob (one draw from `rng` in that case).
LinkResult transmission_outcome(const Transmitter& tx, const Position& rx, std::span<const Transmitter> interferers,
                                const RadioParams& params, engine::RngStream& rng);

/// One directed transmission in a slot. Links sharing a `group` carry the same
/// emission (a broadcast heard by several receivers) and never interfere with
/// each other.
struct Link {
    Transmitter tx;
    Position rx;
    ChannelId channel{0};
    int group = 0;
};

class World;

/// Resolves every link of one slot against the other groups' co-channel
/// emissions plus the IoT devices active on that channel.
std::vector<LinkResult> resolve_concurrent(const World& world, std::span<const Link> links, engine::RngStream& rng);

/// Transmitter is in the coordinator's interference vicinity.
bool in_vicinity(const Transmitter& source, const Position& coordinator, const RadioParams& params);

/// SSA sensitivity test: received power at least noise_floor - snr_threshold_db,
/// so raising the threshold widens reach.
bool reaches(const Transmitter& source, const Position& receiver, const RadioParams& params);

struct IotParams {
    int n_devices = 0;
    /// Share of devices that are wide-band (Wi-Fi-like, one 4-channel block).
    double wideband_fraction = 0.5;
    double wideband_tx_power_dbm = 20.0;
    double narrowband_tx_power_dbm = 0.0;
    double duty_cycle = 0.5;
    /// Channel sets are redrawn every this many superframes.
    int epoch_superframes = 20;

    void validate() const;
};

struct IotDevice {
    int id = 0;
    Position position;
    ChannelSet occupied_channels;
    double duty_cycle = 0.5;
    double tx_power_dbm = 0.0;
    bool wideband = false;

    Transmitter transmitter() const { return {position, tx_power_dbm}; }
};

/// ZigBee channels 11..26 overlapped by Wi-Fi channels 1, 6 and 11.
ChannelSet wifi_block(int block);

struct AnnouncementSource {
    enum class Kind { Coordinator, Iot } kind = Kind::Coordinator;
    int index = 0;
    bool operator==(const AnnouncementSource&) const = default;
};

struct BleAnnouncement {
    AnnouncementSource source;
    ChannelSet channels_in_use;
    engine::SimTime emitted_at;
    Transmitter transmitter;
};

struct WorldParams {
    int n_wbans = 1;
    int k_sensors = 1;
    double body_radius_m = 1.0;
    double ble_range_m = 100.0;
    /// Noise amplitude gain per active nearby transmitter on a channel.
    double occupancy_gain = 2.0;
    IotParams iot;

    void validate() const;
};

class World {
public:
    World(WorldParams params, RadioParams radio, std::uint64_t seed);

    /// Empty world for scripted scenarios; entities are added explicitly.
    static World scripted(RadioParams radio, double body_radius_m = 1.0, std::uint64_t seed = 1);

    const WorldParams& params() const { return params_; }
    const RadioParams& radio() const { return radio_; }
    RadioParams& radio() { return radio_; }

    /// Coordinators uniform in the room, sensors within body_radius of them,
    /// IoT devices uniform in the room.
    void place_nodes();
    /// Every coordinator resamples its position; its sensors move rigidly.
    void mobility_step();
    /// Redraws IoT channel sets (called on epoch boundaries).
    void redraw_iot_channels();
    /// Draws per-device activity for a tick; repeated calls for the same tick are no-ops.
    void advance_activity(engine::SimTime tick);

    int wban_count() const { return static_cast<int>(coordinators_.size()); }
    int sensors_per_wban(int wban) const { return static_cast<int>(sensor_offsets_.at(wban).size()); }
    const Position& coordinator(int wban) const { return coordinators_.at(wban); }
    Position sensor(int wban, int j) const { return coordinators_.at(wban) + sensor_offsets_.at(wban).at(j); }
    const Position& sensor_offset(int wban, int j) const { return sensor_offsets_.at(wban).at(j); }
    const std::vector<IotDevice>& iot_devices() const { return iot_; }
    bool iot_active(int device) const { return active_.at(device); }

    Transmitter sensor_tx(int wban, int j) const { return {sensor(wban, j), radio_.tx_power_dbm}; }
    Transmitter coordinator_tx(int wban) const { return {coordinator(wban), radio_.coordinator_tx_power_dbm}; }

    /// Active IoT transmitters on `channel` during the current tick.
    std::vector<Transmitter> active_iot_on(ChannelId channel) const;

    // Scripted construction.
    int add_wban(const Position& coordinator, std::vector<Position> sensor_offsets);
    int add_iot_device(IotDevice device);
    void set_coordinator(int wban, const Position& p) { coordinators_.at(wban) = p; }
    void set_iot_channels(int device, ChannelSet channels) { iot_.at(device).occupied_channels = channels; }
    void set_iot_position(int device, const Position& p) { iot_.at(device).position = p; }

    /// One announcement per coordinator (its channels in use) and per IoT device.
    std::vector<BleAnnouncement> emit_ble_announcements(engine::SimTime time,
                                                        std::span<const ChannelSet> wban_channels) const;
    /// Union of channels announced by other sources within BLE range and in
    /// this coordinator's vicinity, minus its own channels.
    ChannelSet lch_for(int wban, std::span<const BleAnnouncement> announcements, ChannelSet own) const;

    /// 2u noise samples on `channel` at `wban`'s coordinator; amplitude grows
    /// with the number of currently active vicinity transmitters on it.
    std::vector<double> noise_samples(int wban, ChannelId channel, int u, engine::RngStream& rng) const;
    /// Expected amplitude scale from vicinity devices' duty cycles.
    double expected_noise_scale(int wban, ChannelId channel) const;

private:
    std::vector<Position> draw_offsets(engine::RngStream& rng, int k) const;
    Position draw_coordinator(engine::RngStream& rng, std::span<const Position> offsets) const;

    WorldParams params_;
    RadioParams radio_;
    std::uint64_t seed_;
    std::vector<Position> coordinators_;
    std::vector<std::vector<Position>> sensor_offsets_;
    std::vector<IotDevice> iot_;
    std::vector<engine::RngStream> mobility_rng_;
    std::vector<engine::RngStream> iot_rng_;
    std::vector<bool> active_;
    std::optional<engine::SimTime> activity_tick_;
};

}  // namespace csim::world
