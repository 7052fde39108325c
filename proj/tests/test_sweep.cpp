// Outcome maps over (D, s_in) grids, zone thresholds, grid construction.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "chemostat/sweep.hpp"
#include "helpers.hpp"

using namespace chemostat;
using Catch::Matchers::WithinAbs;

TEST_CASE("zone thresholds of the canonical roster", "[sweep]") {
    Scenario sc = testers::canonical();
    ZoneThresholds zt = zone_thresholds(sc, 0.5);
    REQUIRE(zt.t1.has_value());
    CHECK(*zt.t1 == 0.0);
    REQUIRE(zt.t2.has_value());
    CHECK_THAT(*zt.t2, WithinAbs(2.0, 1e-12));  // best free level 1 plus capacity 1
}

TEST_CASE("zone thresholds degrade gracefully", "[sweep]") {
    // attached species too weak: no lower threshold, upper one collapses to
    // the free subsistence level
    Scenario weak;
    weak.D = 0.5;
    weak.s_in = 3.0;
    weak.c_species.push_back({"C", {0.4, 1.0}});
    weak.m_species.push_back({"M", {1.0, 1.0}});
    ZoneThresholds zt = zone_thresholds(weak, 0.5);
    CHECK_FALSE(zt.t1.has_value());
    REQUIRE(zt.t2.has_value());
    CHECK_THAT(*zt.t2, WithinAbs(1.0, 1e-12));

    // no free species at all: no upper threshold
    Scenario only_c = testers::single_c();
    ZoneThresholds zc = zone_thresholds(only_c, 0.5);
    REQUIRE(zc.t1.has_value());
    CHECK(*zc.t1 == 0.0);
    CHECK_FALSE(zc.t2.has_value());
}

TEST_CASE("zone thresholds demand exactly one attached species", "[sweep]") {
    CHECK_THROWS_AS(zone_thresholds(testers::single_m(), 0.5), std::invalid_argument);
    Scenario two = testers::single_c();
    two.c_species.push_back({"C2", {1.5, 1.0}});
    CHECK_THROWS_AS(zone_thresholds(two, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(zone_thresholds(testers::single_c(), 0.0), std::invalid_argument);
}

TEST_CASE("grid construction, linear and logarithmic", "[sweep]") {
    auto lin = make_grid({1.0, 3.0, 5, false});
    REQUIRE(lin.size() == 5);
    CHECK(lin == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});

    auto lg = make_grid({0.1, 10.0, 3, true});
    REQUIRE(lg.size() == 3);
    CHECK(lg.front() == 0.1);
    CHECK_THAT(lg[1], WithinAbs(1.0, 1e-12));
    CHECK(lg.back() == 10.0);

    CHECK(make_grid({2.0, 9.0, 1, false}) == std::vector<double>{2.0});

    CHECK_THROWS_AS(make_grid({1.0, 2.0, 0, false}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({0.0, 2.0, 3, false}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({2.0, 1.0, 3, false}), std::invalid_argument);
}

TEST_CASE("outcome map of the canonical roster along the feed axis", "[sweep]") {
    Scenario sc = testers::canonical();
    OutcomeMap map = outcome_map(sc, {0.5}, {0.5, 1.0, 1.5, 2.5, 3.0});
    REQUIRE(map.cells.size() == 5);
    CHECK(map.zones_apply);

    const std::vector<std::vector<std::string>> want_survivors = {
        {"C"}, {"C"}, {"C"}, {"C", "Q"}, {"C", "Q"}};
    const std::vector<int> want_zone = {2, 2, 2, 3, 3};
    const std::vector<double> want_s_star = {0.25, 0.5, 0.75, 1.0, 1.0};
    for (size_t i = 0; i < 5; ++i) {
        const OutcomeCell& cell = map.at(0, i);
        INFO("feed " << cell.s_in);
        CHECK(cell.survivors == want_survivors[i]);
        CHECK(cell.zone == want_zone[i]);
        CHECK_THAT(cell.s_star, WithinAbs(want_s_star[i], 1e-12));
        CHECK_FALSE(cell.degenerate);
        CHECK(cell.flags.empty());
    }
}

TEST_CASE("the upper zone boundary is closed: ties go to the attached species",
          "[sweep]") {
    Scenario sc = testers::canonical();
    OutcomeMap map = outcome_map(sc, {0.5}, {2.0});  // exactly at t2
    const OutcomeCell& cell = map.at(0, 0);
    CHECK(cell.winner == WinnerClass::Y);
    CHECK(cell.zone == 2);
    CHECK(cell.degenerate);  // family minima tie at this cell
    CHECK(cell.survivors == std::vector<std::string>{"C"});
}

TEST_CASE("zone labels agree with the thresholds across a grid", "[sweep]") {
    Scenario sc = testers::canonical();
    std::vector<double> d_grid = {0.3, 0.5, 0.7};
    std::vector<double> s_grid = {0.5, 1.0, 1.5, 2.5, 3.0};
    OutcomeMap map = outcome_map(sc, d_grid, s_grid);
    for (size_t i = 0; i < d_grid.size(); ++i) {
        ZoneThresholds zt = zone_thresholds(sc, d_grid[i]);
        REQUIRE(zt.t2.has_value());
        for (size_t j = 0; j < s_grid.size(); ++j) {
            const OutcomeCell& cell = map.at(i, j);
            if (std::abs(cell.s_in - *zt.t2) < 1e-9) continue;  // boundary cell
            INFO("D " << cell.D << " feed " << cell.s_in << " t2 " << *zt.t2);
            CHECK(cell.zone == (cell.s_in <= *zt.t2 ? 2 : 3));
        }
    }
}

TEST_CASE("washout cells report the feed itself and no survivors", "[sweep]") {
    Scenario sc = testers::canonical();
    OutcomeMap map = outcome_map(sc, {2.0}, {1.0, 3.0});
    for (size_t j = 0; j < 2; ++j) {
        const OutcomeCell& cell = map.at(0, j);
        CHECK(cell.winner == WinnerClass::None);
        CHECK(cell.zone == 1);
        CHECK(cell.s_star == cell.s_in);
        CHECK(cell.survivors.empty());
    }
}

TEST_CASE("zone labels are withheld off the one-attached roster", "[sweep]") {
    OutcomeMap map = outcome_map(testers::single_m(), {0.5}, {3.0});
    CHECK_FALSE(map.zones_apply);
    CHECK(map.at(0, 0).zone == 0);
    CHECK(map.at(0, 0).winner == WinnerClass::X);
}

TEST_CASE("hypothesis violations mark cells degenerate with flags", "[sweep]") {
    Scenario sc;
    sc.D = 0.5;
    sc.s_in = 3.0;
    sc.m_species.push_back({"A", {1.0, 2.0}});
    sc.m_species.push_back({"B", {1.0, 2.0}});
    OutcomeMap map = outcome_map(sc, {0.5}, {3.0});
    const OutcomeCell& cell = map.at(0, 0);
    CHECK(cell.degenerate);
    REQUIRE_FALSE(cell.flags.empty());
    CHECK(cell.flags[0] == "H6:A,B");
    // the outcome is still computed
    CHECK(cell.winner == WinnerClass::X);
    CHECK_THAT(cell.s_star, WithinAbs(2.0, 1e-12));
}

TEST_CASE("near-washout cells are flagged degenerate", "[sweep]") {
    // feed exactly at the winning subsistence level
    Scenario sc = testers::single_m(1.0, 1.0, 0.5, 3.0);  // subsistence 1
    OutcomeMap map = outcome_map(sc, {0.5}, {1.0 + 5e-10});
    CHECK(map.at(0, 0).degenerate);
}

TEST_CASE("outcome map validates its grids", "[sweep]") {
    Scenario sc = testers::canonical();
    CHECK_THROWS_AS(outcome_map(sc, {}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(outcome_map(sc, {0.5}, {}), std::invalid_argument);
    CHECK_THROWS_AS(outcome_map(sc, {0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(outcome_map(sc, {0.5}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(outcome_map(sc, {0.5, 0.3}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(outcome_map(sc, {0.5}, {2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("sweeps are identical for any thread count", "[sweep]") {
    Scenario sc = testers::canonical();
    auto d = make_grid({0.2, 0.8, 7, false});
    auto s = make_grid({0.5, 4.0, 9, false});
    OutcomeMap one = outcome_map(sc, d, s, 1);
    OutcomeMap four = outcome_map(sc, d, s, 4);
    REQUIRE(one.cells.size() == four.cells.size());
    for (size_t c = 0; c < one.cells.size(); ++c) {
        CHECK(one.cells[c].D == four.cells[c].D);
        CHECK(one.cells[c].s_in == four.cells[c].s_in);
        CHECK(one.cells[c].s_star == four.cells[c].s_star);
        CHECK(one.cells[c].winner == four.cells[c].winner);
        CHECK(one.cells[c].zone == four.cells[c].zone);
        CHECK(one.cells[c].survivors == four.cells[c].survivors);
        CHECK(one.cells[c].degenerate == four.cells[c].degenerate);
        CHECK(one.cells[c].flags == four.cells[c].flags);
    }
}

TEST_CASE("the thread-count environment cap is honored", "[sweep]") {
    setenv("CHEMOSTAT_THREADS", "2", 1);
    CHECK(detail::sweep_thread_count(8, 100) == 2);
    unsetenv("CHEMOSTAT_THREADS");
    CHECK(detail::sweep_thread_count(8, 100) == 8);
    CHECK(detail::sweep_thread_count(8, 3) == 3);  // never more threads than cells
    CHECK(detail::sweep_thread_count(1, 100) == 1);
}
