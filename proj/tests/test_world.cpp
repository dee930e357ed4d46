#include "catch_amalgamated.hpp"

#include "csim/world.hpp"

#include <cmath>

using namespace csim::world;
using csim::engine::RngStream;
using csim::engine::SimTime;
using csim::spectrum::ChannelId;
using csim::spectrum::ChannelSet;
using Catch::Approx;

namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

// Log-distance oracle written from the propagation formula.
double rx_oracle(double tx_dbm, double d) { return tx_dbm - 40.0 - 30.0 * std::log10(d); }

IotDevice iot(int id, Position p, ChannelSet ch, double tx = 0.0, double duty = 1.0) {
    IotDevice d;
    d.id = id;
    d.position = p;
    d.occupied_channels = ch;
    d.tx_power_dbm = tx;
    d.duty_cycle = duty;
    return d;
}

}  // namespace

TEST_CASE("path loss examples") {
    RadioParams r;
    REQUIRE(received_power_dbm({0, 0, 0}, {1, 0, 0}, r) == Approx(-50.0));
    REQUIRE(received_power_dbm({0, 0, 0}, {10, 0, 0}, r) == Approx(-80.0));
    REQUIRE(received_power_dbm({1, 1, 1}, {1, 1, 1}, r) == Approx(rx_oracle(-10.0, 0.1)));
    REQUIRE(received_power_dbm({0, 0, 0}, {0, 3, 4}, 0.0, r) == Approx(rx_oracle(0.0, 5.0)));
    double prev = 0.0;
    for (double d = 0.2; d < 15.0; d += 0.3) {
        const double p = received_power_dbm({0, 0, 0}, {d, 0, 0}, r);
        if (d > 0.2) REQUIRE(p < prev);
        prev = p;
    }
}

TEST_CASE("radio parameter validation") {
    RadioParams r;
    r.path_loss_exponent = -1;
    REQUIRE_THROWS_AS(r.validate(), std::invalid_argument);
    RadioParams q;
    q.collision_prob = 1.5;
    REQUIRE_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("hand computed sinr") {
    RadioParams r;
    Transmitter sig{{0, 0, 0}, -10.0};
    std::vector<Transmitter> interf{{{3, 0, 0}, 0.0}};
    const double s = dbm_to_mw(rx_oracle(-10.0, 1.0));
    const double i = dbm_to_mw(rx_oracle(0.0, 2.0));
    const double n = dbm_to_mw(-95.0);
    REQUIRE(sinr_db(sig, {1, 0, 0}, interf, r) == Approx(10.0 * std::log10(s / (i + n))).epsilon(1e-12));
    REQUIRE(sinr_db(sig, {1, 0, 0}, {}, r) == Approx(-50.0 + 95.0));

    RngStream rng(1, 1);
    REQUIRE(transmission_outcome(sig, {1, 0, 0}, {}, r, rng).outcome == Outcome::Success);
    std::vector<Transmitter> loud{{{1.05, 0, 0}, 20.0}};
    REQUIRE(transmission_outcome(sig, {1, 0, 0}, loud, r, rng).outcome == Outcome::Collision);
    r.collision_prob = 0.0;
    REQUIRE(transmission_outcome(sig, {1, 0, 0}, loud, r, rng).outcome == Outcome::Success);
}

TEST_CASE("adding an interferer never turns a collision into success") {
    RadioParams r;
    RngStream g(11, 2);
    auto pick = [&] { return Position{g.uniform(0, 10), g.uniform(0, 10), g.uniform(0, 4)}; };
    for (int trial = 0; trial < 500; ++trial) {
        Transmitter sig{pick(), -10.0};
        const Position rx = pick();
        std::vector<Transmitter> set;
        double last = sinr_db(sig, rx, set, r);
        for (int k = 0; k < 6; ++k) {
            set.push_back({pick(), g.uniform(-10, 20)});
            const double now = sinr_db(sig, rx, set, r);
            REQUIRE(now <= last + 1e-12);
            last = now;
        }
    }
}

TEST_CASE("concurrent links interfere across groups only") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({2, 2, 2}, {{0.5, 0, 0}, {-0.5, 0, 0}});
    w.add_wban({2.5, 2, 2}, {{0.5, 0, 0}});
    RngStream rng(1, 1);
    std::vector<Link> one{{w.sensor_tx(0, 0), w.coordinator(0), ChannelId(3), 0},
                          {w.coordinator_tx(0), w.sensor(0, 1), ChannelId(3), 0}};
    for (const auto& r : resolve_concurrent(w, one, rng)) REQUIRE(r.outcome == Outcome::Success);

    std::vector<Link> two{{w.sensor_tx(0, 0), w.coordinator(0), ChannelId(3), 0},
                          {w.sensor_tx(1, 0), w.coordinator(1), ChannelId(3), 1}};
    const auto res = resolve_concurrent(w, two, rng);
    Transmitter i1 = w.sensor_tx(1, 0);
    REQUIRE(res[0].sinr_db == Approx(sinr_db(w.sensor_tx(0, 0), w.coordinator(0), std::span(&i1, 1), w.radio())));

    two[1].channel = ChannelId(4);
    for (const auto& r : resolve_concurrent(w, two, rng)) REQUIRE(r.sinr_db == Approx(-50.0 - 30 * std::log10(0.5) + 95));
}

TEST_CASE("iot devices interfere on their channels when active") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({5, 5, 2}, {{0.5, 0, 0}});
    w.add_iot_device(iot(0, {5.2, 5, 2}, wifi_block(1), 20.0, 1.0));
    w.advance_activity(SimTime{0});
    REQUIRE(w.iot_active(0));
    REQUIRE(w.active_iot_on(ChannelId(6)).size() == 1);
    REQUIRE(w.active_iot_on(ChannelId(4)).empty());
    RngStream rng(2, 2);
    std::vector<Link> on{{w.sensor_tx(0, 0), w.coordinator(0), ChannelId(6), 0}};
    REQUIRE(resolve_concurrent(w, on, rng)[0].outcome == Outcome::Collision);
    on[0].channel = ChannelId(9);
    REQUIRE(resolve_concurrent(w, on, rng)[0].outcome == Outcome::Success);
    REQUIRE(wifi_block(0) == ChannelSet::range(0, 3));
    REQUIRE(wifi_block(2) == ChannelSet::range(10, 13));
}

TEST_CASE("placement respects the room and the body radius") {
    WorldParams p;
    p.n_wbans = 4;
    p.k_sensors = 6;
    p.iot.n_devices = 10;
    World w(p, RadioParams{}, 5);
    w.place_nodes();
    REQUIRE(w.wban_count() == 4);
    for (int b = 0; b < 4; ++b) {
        REQUIRE(w.coordinator(b).in_bounds());
        for (int j = 0; j < 6; ++j) {
            REQUIRE(w.sensor(b, j).in_bounds());
            REQUIRE(distance(w.sensor(b, j), w.coordinator(b)) <= 1.0 + 1e-12);
        }
    }
    for (const auto& d : w.iot_devices()) {
        REQUIRE(d.position.in_bounds());
        REQUIRE(d.occupied_channels.size() == (d.wideband ? 4 : 1));
    }
}

TEST_CASE("coordinator positions average to the room centre") {
    WorldParams p;
    p.k_sensors = 2;
    const int n = 10000;
    double sx = 0, sy = 0, sz = 0;
    for (int s = 1; s <= n; ++s) {
        World w(p, RadioParams{}, static_cast<std::uint64_t>(s));
        w.place_nodes();
        sx += w.coordinator(0).x;
        sy += w.coordinator(0).y;
        sz += w.coordinator(0).z;
    }
    // 4 sigma of a uniform on the full span bounds the sub-box spread too
    const double tol_xy = 4.0 * (10.0 / std::sqrt(12.0)) / std::sqrt(n);
    const double tol_z = 4.0 * (4.0 / std::sqrt(12.0)) / std::sqrt(n);
    REQUIRE(std::abs(sx / n - 5.0) < tol_xy);
    REQUIRE(std::abs(sy / n - 5.0) < tol_xy);
    REQUIRE(std::abs(sz / n - 2.0) < tol_z);
}

TEST_CASE("mobility is rigid and seeded") {
    WorldParams p;
    p.n_wbans = 3;
    p.k_sensors = 4;
    World a(p, RadioParams{}, 9), b(p, RadioParams{}, 9), c(p, RadioParams{}, 10);
    a.place_nodes();
    b.place_nodes();
    c.place_nodes();
    for (int step = 0; step < 50; ++step) {
        std::vector<Position> before;
        for (int j = 0; j < 4; ++j) before.push_back(a.sensor(1, j) - a.coordinator(1));
        a.mobility_step();
        b.mobility_step();
        c.mobility_step();
        for (int j = 0; j < 4; ++j) {
            const auto off = a.sensor(1, j) - a.coordinator(1);
            REQUIRE(distance(off, before[static_cast<std::size_t>(j)]) < 1e-12);
            REQUIRE(a.sensor(1, j).in_bounds());
        }
        REQUIRE(a.coordinator(2) == b.coordinator(2));
    }
    REQUIRE_FALSE(a.coordinator(0) == c.coordinator(0));
}

TEST_CASE("lch examples") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({5, 5, 2}, {{0.3, 0, 0}});
    w.add_wban({5.5, 5, 2}, {{0.3, 0, 0}});
    std::vector<ChannelSet> used{{3}, {7}};
    auto ann = w.emit_ble_announcements(SimTime{0}, used);
    REQUIRE(ann.size() == 2);
    REQUIRE(w.lch_for(0, ann, used[0]) == ChannelSet{7});
    REQUIRE(w.lch_for(1, ann, used[1]) == ChannelSet{3});

    auto lone = World::scripted(RadioParams{});
    lone.add_wban({5, 5, 2}, {{0.3, 0, 0}});
    std::vector<ChannelSet> u1{{3}};
    REQUIRE(lone.lch_for(0, lone.emit_ble_announcements(SimTime{0}, u1), u1[0]).empty());

    // devices covering every channel next to the coordinator
    for (int c = 0; c < 16; ++c) lone.add_iot_device(iot(c, {5.5, 5, 2}, ChannelSet{c}));
    const auto lch = lone.lch_for(0, lone.emit_ble_announcements(SimTime{0}, u1), u1[0]);
    REQUIRE((lch | u1[0]) == ChannelSet::all());
    REQUIRE_FALSE(lch.contains(ChannelId(3)));
}

TEST_CASE("lch equals the filtered union of announcements") {
    WorldParams p;
    p.n_wbans = 6;
    p.k_sensors = 2;
    p.iot.n_devices = 12;
    for (double thr : {-40.0, -25.0, -10.0}) {
        RadioParams r;
        r.snr_threshold_db = thr;
        World w(p, r, 21);
        w.place_nodes();
        std::vector<ChannelSet> used;
        for (int b = 0; b < 6; ++b) used.push_back(ChannelSet{(b * 5) % 16});
        const auto ann = w.emit_ble_announcements(SimTime{0}, used);
        for (int b = 0; b < 6; ++b) {
            ChannelSet expect;
            const auto me = w.coordinator(b);
            for (int o = 0; o < 6; ++o) {
                if (o != b && rx_oracle(-10.0, std::max(0.1, distance(w.coordinator(o), me))) >= -30.0 + thr) {
                    expect |= used[static_cast<std::size_t>(o)];
                }
            }
            for (const auto& d : w.iot_devices()) {
                if (rx_oracle(d.tx_power_dbm, std::max(0.1, distance(d.position, me))) >= -30.0 + thr) {
                    expect |= d.occupied_channels;
                }
            }
            REQUIRE(w.lch_for(b, ann, used[static_cast<std::size_t>(b)]) == expect - used[static_cast<std::size_t>(b)]);
        }
    }
}

TEST_CASE("ble range cuts announcements") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({0, 0, 0}, {{0.1, 0, 0}});
    w.add_wban({0.5, 0, 0}, {{0.1, 0, 0}});
    std::vector<ChannelSet> used{{1}, {2}};
    const auto ann = w.emit_ble_announcements(SimTime{3}, used);
    REQUIRE(ann[0].emitted_at.ticks == 3);
    REQUIRE(w.lch_for(0, ann, used[0]) == ChannelSet{2});
}

TEST_CASE("noise samples scale with active vicinity devices") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({5, 5, 2}, {{0.3, 0, 0}});
    w.add_iot_device(iot(0, {5.5, 5, 2}, ChannelSet{4}, 0.0, 1.0));
    w.add_iot_device(iot(1, {5.6, 5, 2}, ChannelSet{4}, 0.0, 0.25));
    REQUIRE(w.expected_noise_scale(0, ChannelId(4)) == Approx(1.0 + 2.0 * 1.25));
    REQUIRE(w.expected_noise_scale(0, ChannelId(5)) == 1.0);
    w.advance_activity(SimTime{0});
    RngStream a(4, 4), b(4, 4);
    const auto s = w.noise_samples(0, ChannelId(4), 3, a);
    REQUIRE(s.size() == 6);
    const int active = 1 + (w.iot_active(1) ? 1 : 0);
    for (double x : s) REQUIRE(x == Approx((1.0 + 2.0 * active) * b.gaussian()));
}

TEST_CASE("activity draws are idempotent per tick") {
    auto w = World::scripted(RadioParams{});
    for (int d = 0; d < 20; ++d) w.add_iot_device(iot(d, {1, 1, 1}, ChannelSet{1}, 0.0, 0.5));
    w.advance_activity(SimTime{5});
    std::vector<bool> first;
    for (int d = 0; d < 20; ++d) first.push_back(w.iot_active(d));
    w.advance_activity(SimTime{5});
    for (int d = 0; d < 20; ++d) REQUIRE(w.iot_active(d) == first[static_cast<std::size_t>(d)]);
}
