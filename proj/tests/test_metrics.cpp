#include "catch_amalgamated.hpp"

#include "csim/metrics.hpp"

#include <set>

using namespace csim::metrics;
using csim::spectrum::ChannelId;
using Catch::Approx;

namespace {
SuperframeSample sample(std::vector<ChannelSet> occ, std::vector<ChannelSet> used) {
    SuperframeSample s;
    s.occupied = std::move(occ);
    s.channels_used = std::move(used);
    s.activity.resize(s.occupied.size());
    return s;
}
}  // namespace

TEST_CASE("availability examples") {
    REQUIRE(availability({}) == 1.0);
    REQUIRE(availability(ChannelSet{1, 2, 3, 4}) == 0.75);
    REQUIRE(availability(ChannelSet::all()) == 0.0);
}

TEST_CASE("pr_avchs averages coordinators then superframes") {
    std::vector<SuperframeSample> s{sample({{}, ChannelSet::range(0, 7)}, {{0}, {1}}),
                                    sample({ChannelSet::all(), ChannelSet::all()}, {{0}, {1}})};
    REQUIRE(pr_avchs(s) == Approx((0.75 + 0.0) / 2.0));
}

TEST_CASE("reuse factor examples") {
    const std::vector<ChannelSet> distinct{{1}, {2}, {3}, {4}};
    REQUIRE(reuse_factor(distinct, ReuseDefinition::WbansPerChannel) == 1.0);
    REQUIRE(reuse_factor(distinct, ReuseDefinition::UsesPerDistinct) == 1.0);
    const std::vector<ChannelSet> paired{{1}, {1}, {2}, {2}};
    REQUIRE(reuse_factor(paired, ReuseDefinition::WbansPerChannel) == 2.0);
    REQUIRE(reuse_factor(paired, ReuseDefinition::UsesPerDistinct) == 2.0);
    const std::vector<ChannelSet> wide{{1, 2}, {1}};
    REQUIRE(reuse_factor(wide, ReuseDefinition::WbansPerChannel) == 1.0);
    REQUIRE(reuse_factor(wide, ReuseDefinition::UsesPerDistinct) == 1.5);
    REQUIRE(reuse_factor({}, ReuseDefinition::UsesPerDistinct) == 1.0);
}

TEST_CASE("average reuse matches a brute force recount") {
    std::vector<SuperframeSample> s{
        sample({{}, {}, {}}, {{0}, {0}, {5}}),
        sample({{}, {}, {}}, {{0, 3}, {3}, {3}}),
        sample({{}, {}, {}}, {{9}, {8}, {7}}),
    };
    double want_w = 0.0, want_u = 0.0;
    for (const auto& sf : s) {
        std::set<int> distinct;
        int uses = 0;
        for (const auto& set : sf.channels_used) {
            for (auto c : set.members()) {
                distinct.insert(c.index());
                ++uses;
            }
        }
        want_w += static_cast<double>(sf.channels_used.size()) / static_cast<double>(distinct.size());
        want_u += static_cast<double>(uses) / static_cast<double>(distinct.size());
    }
    REQUIRE(avg_reuse_factor(s, ReuseDefinition::WbansPerChannel) == Approx(want_w / 3.0));
    REQUIRE(avg_reuse_factor(s, ReuseDefinition::UsesPerDistinct) == Approx(want_u / 3.0));
}

TEST_CASE("energy hand sums") {
    EnergyModel m;
    CoordinatorActivity a{3, 2, 5};
    const std::int64_t slots = 280;
    const double on = m.e_idle * slots + m.e_ble_rx * 3 + m.e_scan * 5 + m.e_cr * 2;
    const double off = m.e_idle * slots + m.e_scan * 5 + m.e_cr * 2 + m.e_scan * 16 * (280.0 / 28.0);
    REQUIRE(coordinator_energy(a, slots, m, true) == Approx(on));
    REQUIRE(coordinator_energy(a, slots, m, false) == Approx(off));

    CoordinatorActivity quiet;
    REQUIRE(coordinator_energy(quiet, slots, m, true) == Approx(m.e_idle * slots));
    REQUIRE(coordinator_energy(quiet, slots, m, false) > coordinator_energy(quiet, slots, m, true));

    std::vector<SuperframeSample> s(10, sample({{}, {}}, {{0}, {1}}));
    s[0].activity[0].alerts = 1;
    s[4].activity[0] = {1, 1, 2};
    const double w0 = coordinator_energy({2, 1, 2}, 280, m, true) / 280.0;
    const double w1 = coordinator_energy({}, 280, m, true) / 280.0;
    REQUIRE(avg_energy(s, 28, m, true) == Approx((w0 + w1) / 2.0));
}

TEST_CASE("energy model validation") {
    EnergyModel m;
    m.e_scan = -1.0;
    REQUIRE_THROWS(m.validate());
    EnergyModel p;
    p.scan_period_wo = 0;
    REQUIRE_THROWS(p.validate());
}

TEST_CASE("delivery counters add up") {
    DeliveryCounters a{5, 3, 1, 1, 7, 2};
    DeliveryCounters b{1, 1, 0, 0, 1, 0};
    a += b;
    REQUIRE(a.generated == 6);
    REQUIRE(a.delivered == 4);
    REQUIRE(a.attempts == 8);
    REQUIRE(a.collisions == 2);
}
