// Equilibrium enumeration and the lowest-subsistence outcome rule.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "chemostat/equilibria.hpp"
#include "helpers.hpp"

using namespace chemostat;
using Catch::Matchers::WithinAbs;

namespace {
const Equilibrium* find_class(const std::vector<Equilibrium>& eqs, EqClass cls) {
    for (const auto& e : eqs)
        if (e.cls == cls) return &e;
    return nullptr;
}
}  // namespace

TEST_CASE("family subsistence levels of the canonical scenario", "[equilibria]") {
    FamilyValues f = family_subsistence(testers::canonical());
    CHECK_THAT(f.s_x, WithinAbs(2.0, 1e-15));
    CHECK_THAT(f.s_y, WithinAbs(1.5, 1e-15));
    CHECK_THAT(f.s_z, WithinAbs(1.0, 1e-15));
    CHECK(f.x_index == 0);
    CHECK(f.z_index == 0);
    CHECK(f.guild == std::vector<int>{0});
}

TEST_CASE("families that cannot reach below the feed report the feed itself",
          "[equilibria]") {
    Scenario sc = testers::single_m(1.0, 2.0, 0.5, 1.5);  // subsistence 2 > feed 1.5
    FamilyValues f = family_subsistence(sc);
    CHECK(f.s_x == 1.5);
    CHECK(f.x_index == -1);
    CHECK(f.s_y == 1.5);
    CHECK(f.s_z == 1.5);
}

TEST_CASE("guild subsistence level from the closed form", "[equilibria]") {
    Scenario sc = testers::canonical();
    CHECK_THAT(guild_subsistence(sc, {0}), WithinAbs(1.5, 1e-15));
    CHECK(guild_subsistence(sc, {}) == 3.0);
    Scenario weak = testers::single_c(0.4);  // beta_max below dilution
    CHECK(guild_subsistence(weak, {0}) == 3.0);
}

TEST_CASE("canonical scenario enumerates one equilibrium per class", "[equilibria]") {
    Scenario sc = testers::canonical();
    auto eqs = enumerate_equilibria(sc);
    REQUIRE(eqs.size() == 6);

    const auto* e0 = find_class(eqs, EqClass::E0);
    REQUIRE(e0);
    CHECK(e0->state.s == 3.0);
    CHECK(e0->survivors.empty());
    CHECK_THAT(e0->state.q[0], WithinAbs(1.25, 1e-12));  // store slaved to the feed level

    const auto* ex = find_class(eqs, EqClass::Ex);
    REQUIRE(ex);
    CHECK_THAT(ex->state.s, WithinAbs(2.0, 1e-15));
    CHECK_THAT(ex->state.x[0], WithinAbs(1.0, 1e-15));
    CHECK(ex->state.y[0] == 0.0);
    CHECK_THAT(ex->state.q[0], WithinAbs(7.0 / 6.0, 1e-12));
    CHECK(ex->survivors == std::vector<std::string>{"M"});

    const auto* ez = find_class(eqs, EqClass::Ez);
    REQUIRE(ez);
    CHECK_THAT(ez->state.s, WithinAbs(1.0, 1e-15));
    CHECK_THAT(ez->state.q[0], WithinAbs(1.0, 1e-15));
    CHECK_THAT(ez->state.z[0], WithinAbs(2.0, 1e-15));
    CHECK(ez->survivors == std::vector<std::string>{"Q"});

    const auto* ey = find_class(eqs, EqClass::Ey);
    REQUIRE(ey);
    CHECK_THAT(ey->state.s, WithinAbs(1.5, 1e-15));
    CHECK_THAT(ey->state.y[0], WithinAbs(1.5, 1e-15));
    CHECK(ey->survivors == std::vector<std::string>{"C"});

    const auto* ezy = find_class(eqs, EqClass::Ezy);
    REQUIRE(ezy);
    CHECK_THAT(ezy->state.s, WithinAbs(1.0, 1e-15));
    CHECK_THAT(ezy->state.y[0], WithinAbs(1.0, 1e-15));
    CHECK_THAT(ezy->state.z[0], WithinAbs(1.0, 1e-15));
    CHECK_THAT(ezy->state.q[0], WithinAbs(1.0, 1e-15));
    CHECK(ezy->in_positive_orthant);
    CHECK(ezy->survivors == std::vector<std::string>{"C", "Q"});
}

TEST_CASE("mixed equilibria with negative biomass are kept but tagged", "[equilibria]") {
    auto eqs = enumerate_equilibria(testers::canonical());
    const auto* exy = find_class(eqs, EqClass::Exy);
    REQUIRE(exy);
    CHECK_THAT(exy->state.x[0], WithinAbs(-1.0, 1e-15));  // feed cannot carry both
    CHECK_FALSE(exy->in_positive_orthant);
    CHECK(exy->survivors == std::vector<std::string>{"C"});
}

TEST_CASE("every enumerated equilibrium sits on the mass-balance surface",
          "[equilibria]") {
    for (const auto& eq : enumerate_equilibria(testers::canonical())) {
        CHECK_THAT(total_mass(eq.state), WithinAbs(3.0, 1e-12));
    }
}

TEST_CASE("enumeration is sorted by class, then substrate, then index", "[equilibria]") {
    auto eqs = enumerate_equilibria(testers::canonical());
    std::vector<EqClass> order;
    for (const auto& e : eqs) order.push_back(e.cls);
    CHECK(order == std::vector<EqClass>{EqClass::E0, EqClass::Ex, EqClass::Ez,
                                        EqClass::Ey, EqClass::Exy, EqClass::Ezy});
}

TEST_CASE("non-viable species produce no equilibria of their own", "[equilibria]") {
    Scenario sc = testers::single_m(1.0, 2.0, 0.5, 1.5);
    auto eqs = enumerate_equilibria(sc);
    REQUIRE(eqs.size() == 1);
    CHECK(eqs[0].cls == EqClass::E0);
}

TEST_CASE("attached subsets enumerate on request", "[equilibria]") {
    Scenario sc;
    sc.D = 0.5;
    sc.s_in = 3.0;
    sc.c_species.push_back({"C1", {1.0, 1.0}});  // capacity slope 1
    sc.c_species.push_back({"C2", {2.0, 1.0}});  // capacity slope 3

    auto just_guild = enumerate_equilibria(sc);
    REQUIRE(just_guild.size() == 2);  // washout plus the full guild
    const auto* full = find_class(just_guild, EqClass::Ey);
    REQUIRE(full);
    CHECK_THAT(full->state.s, WithinAbs(0.6, 1e-15));
    CHECK_THAT(full->state.y[0], WithinAbs(0.6, 1e-15));
    CHECK_THAT(full->state.y[1], WithinAbs(1.8, 1e-15));

    EnumerateOptions opts;
    opts.all_subsets = true;
    auto all = enumerate_equilibria(sc, opts);
    REQUIRE(all.size() == 4);  // washout, {C1}, {C2}, {C1, C2}
    std::vector<double> levels;
    for (const auto& e : all)
        if (e.cls == EqClass::Ey) levels.push_back(e.state.s);
    std::sort(levels.begin(), levels.end());
    REQUIRE(levels.size() == 3);
    CHECK_THAT(levels[0], WithinAbs(0.6, 1e-15));
    CHECK_THAT(levels[1], WithinAbs(0.75, 1e-15));
    CHECK_THAT(levels[2], WithinAbs(1.5, 1e-15));
}

TEST_CASE("subset enumeration refuses oversized rosters", "[equilibria]") {
    Scenario sc;
    sc.D = 0.5;
    sc.s_in = 3.0;
    for (int j = 0; j < 13; ++j)
        sc.c_species.push_back({"C" + std::to_string(j), {1.0, 1.0 + j}});
    EnumerateOptions opts;
    opts.all_subsets = true;
    CHECK_THROWS_AS(enumerate_equilibria(sc, opts), std::invalid_argument);
}

TEST_CASE("quota species wins the canonical scenario with the guild attached",
          "[equilibria]") {
    Prediction p = predict_outcome(testers::canonical());
    CHECK_FALSE(p.washout);
    CHECK(p.winner == WinnerClass::Z);
    CHECK_THAT(p.s_star, WithinAbs(1.0, 1e-15));
    CHECK(p.e_star.cls == EqClass::Ezy);
    CHECK_THAT(p.e_star.state.s, WithinAbs(1.0, 1e-15));
    CHECK_THAT(p.e_star.state.y[0], WithinAbs(1.0, 1e-15));
    CHECK_THAT(p.e_star.state.z[0], WithinAbs(1.0, 1e-15));
    CHECK(p.survivors == std::vector<std::string>{"C", "Q"});
    CHECK(p.compliant == std::vector<std::string>{"C", "Q"});
}

TEST_CASE("attached guild wins exact ties", "[equilibria]") {
    Scenario sc = testers::canonical();
    sc.s_in = 2.0;  // guild level 1 collides with the quota level 1
    Prediction p = predict_outcome(sc);
    CHECK(p.winner == WinnerClass::Y);
    CHECK(p.e_star.cls == EqClass::Ey);
    CHECK_THAT(p.s_star, WithinAbs(1.0, 1e-15));
    CHECK(p.survivors == std::vector<std::string>{"C"});
}

TEST_CASE("free species below the guild level wins with the guild attached",
          "[equilibria]") {
    Scenario sc = testers::canonical();
    sc.m_species[0].growth.K_s = 0.5;  // subsistence drops to 0.5
    Prediction p = predict_outcome(sc);
    CHECK(p.winner == WinnerClass::X);
    CHECK(p.e_star.cls == EqClass::Exy);
    CHECK_THAT(p.s_star, WithinAbs(0.5, 1e-15));
    CHECK_THAT(p.e_star.state.x[0], WithinAbs(2.0, 1e-15));
    CHECK_THAT(p.e_star.state.y[0], WithinAbs(0.5, 1e-15));
    CHECK(p.survivors == std::vector<std::string>{"M", "C"});
    CHECK(p.compliant == std::vector<std::string>{"M", "C"});
}

TEST_CASE("free species alone wins without attached companions", "[equilibria]") {
    Scenario sc = testers::single_m(1.0, 1.0, 0.5, 3.0);
    Prediction p = predict_outcome(sc);
    CHECK(p.winner == WinnerClass::X);
    CHECK(p.e_star.cls == EqClass::Ex);
    CHECK_THAT(p.s_star, WithinAbs(1.0, 1e-15));
    CHECK_THAT(p.e_star.state.x[0], WithinAbs(2.0, 1e-15));
    CHECK(p.survivors == std::vector<std::string>{"M"});
}

TEST_CASE("washout prediction when nothing is viable", "[equilibria]") {
    Scenario sc = testers::canonical();
    sc.D = 2.0;
    Prediction p = predict_outcome(sc);
    CHECK(p.washout);
    CHECK(p.winner == WinnerClass::None);
    CHECK(p.s_star == 3.0);
    CHECK(p.e_star.cls == EqClass::E0);
    CHECK(p.survivors.empty());
    CHECK(p.compliant.empty());
}

TEST_CASE("compliance checks equality for free species, threshold for attached",
          "[equilibria]") {
    Scenario sc = testers::canonical();
    CHECK(is_compliant(sc.m_species[0], 0.5, 2.0));
    CHECK(is_compliant(sc.m_species[0], 0.5, 2.0 + 5e-10));
    CHECK_FALSE(is_compliant(sc.m_species[0], 0.5, 1.9));
    CHECK(is_compliant(sc.c_species[0], 0.5, 0.1));
    CHECK_FALSE(is_compliant(sc.c_species[0], 1.5, 0.1));  // not viable at that dilution
    CHECK(is_compliant(sc.q_species[0], 0.5, 1.0));
    CHECK_FALSE(is_compliant(sc.q_species[0], 0.5, 1.1));
}

TEST_CASE("class names render for reports", "[equilibria]") {
    CHECK(to_string(EqClass::E0) == "E0");
    CHECK(to_string(EqClass::Exy) == "Exy");
    CHECK(to_string(WinnerClass::None) == "none");
    CHECK(to_string(WinnerClass::Y) == "Y");
}
