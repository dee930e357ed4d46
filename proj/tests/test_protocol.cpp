#include "catch_amalgamated.hpp"

#include "csim/protocol.hpp"

#include <boost/math/distributions/chi_squared.hpp>

using namespace csim::protocol;
using csim::engine::Simulator;
using csim::engine::SimTime;
using csim::trace::TraceLog;
using csim::trace::TraceRecord;
using csim::world::IotDevice;
using csim::world::Position;
using csim::world::RadioParams;
using csim::world::World;

namespace {

const Position kFar{9.5, 9.5, 3.5};

IotDevice device(Position p, ChannelSet ch, double tx, double duty) {
    IotDevice d;
    d.position = p;
    d.occupied_channels = ch;
    d.tx_power_dbm = tx;
    d.duty_cycle = duty;
    return d;
}

std::vector<Position> row(int k) {
    std::vector<Position> out;
    for (int j = 0; j < k; ++j) out.push_back({0.1 * (j + 1), 0.2, 0.0});
    return out;
}

std::vector<TraceRecord> frames(const TraceLog& log, const std::string& frame) {
    std::vector<TraceRecord> out;
    for (const auto& r : log.records()) {
        if (r.frame == frame) out.push_back(r);
    }
    return out;
}

// Runs the TDMA frame by hand; the jammer sits on the default channel next to
// the coordinator during the listed slots.
void tdma_with_jammer(CsimNetwork& net, Simulator& sim, World& w, int jammer, const std::vector<int>& hits) {
    const auto c = w.coordinator(0);
    for (int j = 0; j < net.schedule().k; ++j) {
        const bool hit = std::find(hits.begin(), hits.end(), j) != hits.end();
        w.set_iot_position(jammer, hit ? Position{c.x + 0.05, c.y, c.z} : kFar);
        net.tdma_slot(j);
        sim.run_until(sim.now());
    }
    w.set_iot_position(jammer, kFar);
}

}  // namespace

TEST_CASE("setup tunes every sensor to its coordinator") {
    csim::world::WorldParams p;
    p.n_wbans = 3;
    p.k_sensors = 4;
    World w(p, RadioParams{}, 4);
    w.place_nodes();
    Simulator sim;
    TraceLog log;
    CsimNetwork net(w, sim, {}, 4, &log);
    net.setup_network();
    REQUIRE(frames(log, "setup").size() == 3);
    for (int b = 0; b < 3; ++b) {
        std::vector<int> ts;
        for (const auto& s : net.sensors()[static_cast<std::size_t>(b)]) {
            REQUIRE(s.current_channel == net.coordinators()[static_cast<std::size_t>(b)].default_channel);
            ts.push_back(s.assigned_ts);
        }
        REQUIRE(ts == std::vector<int>{0, 1, 2, 3});
    }
    REQUIRE(net.schedule().period() == 1 + 4 + 2 + 4 + 5);
}

TEST_CASE("default channels are uniform over seeds") {
    std::vector<int> hist(16, 0);
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        auto w = World::scripted(RadioParams{});
        w.add_wban({5, 5, 2}, row(1));
        Simulator sim;
        CsimNetwork net(w, sim, {}, static_cast<std::uint64_t>(s + 1));
        net.setup_network();
        ++hist[static_cast<std::size_t>(net.coordinators()[0].default_channel.index())];
    }
    double chi2 = 0.0;
    for (int h : hist) chi2 += (h - n / 16.0) * (h - n / 16.0) / (n / 16.0);
    REQUIRE(boost::math::cdf(boost::math::complement(boost::math::chi_squared(15), chi2)) > 0.01);
}

TEST_CASE("clean superframes deliver everything in TDMA") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({5, 5, 2}, row(5));
    Simulator sim;
    TraceLog log;
    CsimNetwork net(w, sim, {}, 7, &log);
    net.setup_network();
    net.attach();
    net.set_superframe_limit(3);
    net.schedule_superframe(0);
    sim.run_until(SimTime{3 * net.schedule().period() - 1});
    REQUIRE(net.samples().size() == 3);
    const auto c = net.counters();
    REQUIRE(c.generated == 15);
    REQUIRE(c.delivered == 15);
    REQUIRE(c.pending == 0);
    for (const auto& r : frames(log, "fcs-decision")) REQUIRE(r.outcome == "idle");
    for (const auto& s : net.samples()) {
        REQUIRE(s.activity[0].alerts == 0);
        REQUIRE(s.channels_used[0].size() == 1);
    }
    // data precedes its ack in each slot
    const auto data = frames(log, "tdma-data");
    const auto acks = frames(log, "tdma-ack");
    REQUIRE(data.size() == 15);
    REQUIRE(acks.size() == 15);
    for (std::size_t i = 0; i < data.size(); ++i) REQUIRE(data[i].tick == acks[i].tick);
}

TEST_CASE("lost ack leads to a duplicate on the retry") {
    RadioParams r;
    r.snr_threshold_db = -10.0;
    auto w = World::scripted(r);
    w.add_wban({1, 5, 2}, {{0.9, 0, 0}});
    Simulator sim;
    CsimNetwork net(w, sim, {}, 3);
    net.setup_network();
    net.attach();
    const auto d = net.coordinators()[0].default_channel;
    // close to the sensor, farther from the coordinator
    const int jam = w.add_iot_device(device({2.4, 5, 2}, ChannelSet{d.index()}, 0.0, 1.0));

    net.begin_superframe(0);
    net.ble_broadcast();
    net.tdma_slot(0);
    sim.run_until(sim.now());
    REQUIRE(net.coordinators()[0].lis.empty());
    REQUIRE(net.sensors()[0][0].mode == SensorMode::AwaitFbtdma);
    REQUIRE(net.sensors()[0][0].packet_queue.size() == 1);
    net.fcs_frame();
    net.end_superframe();
    REQUIRE(net.sensors()[0][0].mode == SensorMode::AwaitSlot);

    w.set_iot_position(jam, kFar);
    net.begin_superframe(1);
    net.ble_broadcast();
    net.tdma_slot(0);
    sim.run_until(sim.now());
    const auto c = net.counters();
    REQUIRE(c.generated == 2);
    REQUIRE(c.duplicates == 1);
    REQUIRE(c.delivered == 0);
    REQUIRE(c.pending == 1);
    REQUIRE(net.sensors()[0][0].mode == SensorMode::Sleep);
}

TEST_CASE("lis order and backup slots follow the failures") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({2, 5, 2}, row(6));
    Simulator sim;
    TraceLog log;
    CsimNetwork net(w, sim, {}, 11, &log);
    net.setup_network();
    net.attach();
    const auto d = net.coordinators()[0].default_channel;
    const int jam = w.add_iot_device(device(kFar, ChannelSet{d.index()}, 20.0, 1.0));

    net.begin_superframe(0);
    net.ble_broadcast();
    tdma_with_jammer(net, sim, w, jam, {2, 5});
    REQUIRE(net.coordinators()[0].lis == std::vector<int>{2, 5});

    net.fcs_frame();
    const auto& crd = net.coordinators()[0];
    REQUIRE(crd.stable_channel.has_value());
    REQUIRE(*crd.stable_channel != d);
    REQUIRE_FALSE(crd.lch.contains(*crd.stable_channel));
    REQUIRE(net.sensors()[0][2].assigned_imts == 0);
    REQUIRE(net.sensors()[0][5].assigned_imts == 1);
    REQUIRE(frames(log, "fcs-decision").back().outcome == "us");

    net.fcs_beacon();
    for (int m = 0; m < 6; ++m) net.fbtdma_slot(m);
    const auto fb = frames(log, "fbtdma-data");
    REQUIRE(fb.size() == 2);
    REQUIRE(fb[0].node == 2);
    REQUIRE(fb[0].slot == 0);
    REQUIRE(fb[1].node == 5);
    REQUIRE(fb[1].slot == 1);
    REQUIRE(fb[0].channel == crd.stable_channel->index());
    net.end_superframe();
    REQUIRE(net.counters().delivered == 6);
    REQUIRE(net.samples()[0].activity[0].alerts == 1);
    REQUIRE(net.samples()[0].channels_used[0].size() == 2);
}

TEST_CASE("full lch engages cognitive radio") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({2, 5, 2}, row(3));
    Simulator sim;
    TraceLog log;
    CsimNetwork net(w, sim, {}, 5, &log);
    net.setup_network();
    net.attach();
    const auto d = net.coordinators()[0].default_channel;
    for (int c = 0; c < 16; ++c) {
        if (c != d.index()) w.add_iot_device(device({2.5, 5, 2}, ChannelSet{c}, 0.0, 0.0));
    }
    const int jam = w.add_iot_device(device(kFar, ChannelSet{d.index()}, 20.0, 1.0));

    net.begin_superframe(0);
    net.ble_broadcast();
    REQUIRE((net.coordinators()[0].lch | csim::spectrum::singleton(d)) == ChannelSet::all());
    tdma_with_jammer(net, sim, w, jam, {1});
    net.fcs_frame();
    const auto dec = frames(log, "fcs-decision").back();
    REQUIRE(dec.outcome == "cr");
    REQUIRE(dec.detail.at("us_size") == 0);
    REQUIRE(dec.detail.at("sensed") >= 1);
    REQUIRE(net.cr_engagements() == 1);
    REQUIRE(net.coordinators()[0].stable_channel.has_value());
    net.fcs_beacon();
    net.fbtdma_slot(0);
    net.end_superframe();
    REQUIRE(net.counters().delivered == 3);
    REQUIRE(net.samples()[0].activity[0].cr_engagements == 1);
    REQUIRE(net.samples()[0].activity[0].channels_scanned == dec.detail.at("sensed"));
}

TEST_CASE("no stable channel keeps the coordinator silent") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({2, 5, 2}, row(2));
    Simulator sim;
    TraceLog log;
    CsimNetwork net(w, sim, {}, 5, &log);
    net.setup_network();
    net.attach();
    const auto d = net.coordinators()[0].default_channel;
    for (int c = 0; c < 16; ++c) {
        if (c != d.index()) w.add_iot_device(device({2.5, 5, 2}, ChannelSet{c}, 0.0, 1.0));
    }
    const int jam = w.add_iot_device(device(kFar, ChannelSet{d.index()}, 20.0, 1.0));
    net.begin_superframe(0);
    net.ble_broadcast();
    tdma_with_jammer(net, sim, w, jam, {0});
    net.fcs_frame();
    REQUIRE(frames(log, "fcs-decision").back().outcome == "silent");
    REQUIRE(net.coordinators()[0].silent);
    net.fcs_beacon();
    net.fbtdma_slot(0);
    REQUIRE(frames(log, "fcs-beacon").empty());
    REQUIRE(frames(log, "fbtdma-data").empty());
    net.end_superframe();
    REQUIRE(net.counters().pending == 1);
    REQUIRE(net.sensors()[0][0].mode == SensorMode::AwaitSlot);
}

TEST_CASE("failed backup slot raises an alert next superframe") {
    auto w = World::scripted(RadioParams{});
    w.add_wban({2, 5, 2}, row(2));
    Simulator sim;
    TraceLog log;
    CsimNetwork net(w, sim, {}, 13, &log);
    net.setup_network();
    net.attach();
    const auto d = net.coordinators()[0].default_channel;
    const int jam = w.add_iot_device(device(kFar, ChannelSet{d.index()}, 20.0, 1.0));

    net.begin_superframe(0);
    net.ble_broadcast();
    tdma_with_jammer(net, sim, w, jam, {0});
    net.fcs_frame();
    net.fcs_beacon();
    // the jammer hops onto the stable channel after the beacon
    w.set_iot_channels(jam, csim::spectrum::singleton(*net.coordinators()[0].stable_channel));
    w.set_iot_position(jam, {2.05, 5, 2});
    net.fbtdma_slot(0);
    REQUIRE(frames(log, "fbtdma-data").back().outcome == "collision");
    net.end_superframe();

    w.set_iot_position(jam, kFar);
    net.begin_superframe(1);
    net.ble_broadcast();
    tdma_with_jammer(net, sim, w, jam, {});
    net.fcs_frame();
    net.end_superframe();
    REQUIRE(net.coordinators()[0].lis.empty());
    REQUIRE(net.samples()[1].activity[0].alerts == 1);
    const auto c = net.counters();
    REQUIRE(c.generated == 4);
    REQUIRE(c.delivered + c.duplicates + c.pending == 4);
    REQUIRE(c.pending == 1);  // one carried packet queued behind the new one
}

TEST_CASE("an idle device does not perturb other streams") {
    auto run = [](bool extra) {
        auto w = World::scripted(RadioParams{});
        w.add_wban({2, 5, 2}, row(3));
        w.add_wban({2.6, 5, 2}, row(3));
        w.add_iot_device(device({2.3, 5, 2}, ChannelSet::all(), 10.0, 0.5));
        if (extra) w.add_iot_device(device({9, 9, 3}, ChannelSet{}, 0.0, 0.5));
        Simulator sim;
        TraceLog log;
        CsimNetwork net(w, sim, {}, 17, &log);
        net.setup_network();
        net.attach();
        net.set_superframe_limit(20);
        net.schedule_superframe(0);
        sim.run_until(SimTime{20 * net.schedule().period() - 1});
        std::vector<std::string> lines;
        for (const auto& r : log.records()) lines.push_back(csim::trace::to_json_line(r));
        return lines;
    };
    const auto a = run(false);
    REQUIRE(a == run(false));
    REQUIRE(a == run(true));
}

TEST_CASE("protocol parameter validation") {
    ProtocolParams p;
    p.fcs_length = 0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    ProtocolParams q;
    q.stability_threshold = 1.5;
    REQUIRE_THROWS_AS(q.validate(), std::invalid_argument);
    auto w = World::scripted(RadioParams{});
    Simulator sim;
    CsimNetwork net(w, sim, {}, 1);
    REQUIRE_THROWS(net.setup_network());
}
