// Jacobians (analytic vs finite difference) and equilibrium classification.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chemostat/equilibria.hpp"
#include "chemostat/integrate.hpp"
#include "chemostat/stability.hpp"
#include "helpers.hpp"

using namespace chemostat;
using Catch::Matchers::WithinAbs;

namespace {

const Equilibrium& fetch(const std::vector<Equilibrium>& eqs, EqClass cls) {
    for (const auto& e : eqs)
        if (e.cls == cls) return e;
    throw std::logic_error("class not enumerated");
}

// central finite-difference Jacobian of the full vector field
Matrix fd_full(const Scenario& sc, const State& st, double h = 1e-6) {
    auto base = flatten(st);
    const int n = static_cast<int>(base.size());
    Matrix J(n);
    for (int j = 0; j < n; ++j) {
        auto vp = base, vm = base;
        vp[j] += h;
        vm[j] -= h;
        auto fp = flatten(rhs(sc, unflatten(sc, vp)));
        auto fm = flatten(rhs(sc, unflatten(sc, vm)));
        for (int i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
    }
    return J;
}

void check_close(const Matrix& a, const Matrix& b, double tol) {
    REQUIRE(a.n == b.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) {
            INFO("entry (" << i << ", " << j << ")");
            CHECK_THAT(a(i, j), WithinAbs(b(i, j), tol * std::max(1.0, std::abs(b(i, j)))));
        }
}

}  // namespace

TEST_CASE("surface Jacobian of the canonical winner, entry by entry", "[stability]") {
    Scenario sc = testers::canonical();
    State st;
    st.s = 1.0;
    st.x = {0.0};
    st.y = {1.0};
    st.z = {1.0};
    st.q = {1.0};
    auto jac = jacobian_on_surface(sc, st);
    REQUIRE(jac.m.n == 4);
    CHECK(jac.labels == std::vector<std::string>{"x:M", "y:C", "z:Q", "q:Q"});

    const double want[4][4] = {
        {-1.0 / 6.0, 0.0, 0.0, 0.0},
        {-0.25, -0.5, -0.25, -0.25},
        {0.0, 0.0, 0.0, 0.5},
        {-0.25, -0.25, -0.25, -1.25},
    };
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            INFO("entry (" << i << ", " << j << ")");
            CHECK_THAT(jac.m(i, j), WithinAbs(want[i][j], 1e-14));
        }
}

TEST_CASE("surface Jacobian matches finite differences at a generic point",
          "[stability]") {
    Scenario sc = testers::canonical();
    State st;
    st.x = {0.5};
    st.y = {0.6};
    st.z = {0.5};
    st.q = {0.8};
    st.s = 3.0 - 0.5 - 0.6 - 0.5 * 0.8;
    auto jac = jacobian_on_surface(sc, st);

    // differentiate the vector field along the surface: s absorbs the mass change
    const double h = 1e-6;
    auto field = [&sc](double x, double y, double z, double q) {
        State v;
        v.x = {x};
        v.y = {y};
        v.z = {z};
        v.q = {q};
        v.s = 3.0 - x - y - q * z;
        State d = rhs(sc, v);
        return std::array<double, 4>{d.x[0], d.y[0], d.z[0], d.q[0]};
    };
    double w[4] = {0.5, 0.6, 0.5, 0.8};
    for (int j = 0; j < 4; ++j) {
        double wp[4], wm[4];
        for (int t = 0; t < 4; ++t) wp[t] = wm[t] = w[t];
        wp[j] += h;
        wm[j] -= h;
        auto fp = field(wp[0], wp[1], wp[2], wp[3]);
        auto fm = field(wm[0], wm[1], wm[2], wm[3]);
        for (int i = 0; i < 4; ++i) {
            INFO("entry (" << i << ", " << j << ")");
            CHECK_THAT(jac.m(i, j), WithinAbs((fp[i] - fm[i]) / (2.0 * h), 1e-7));
        }
    }
}

TEST_CASE("surface Jacobian rejects off-surface states", "[stability]") {
    Scenario sc = testers::canonical();
    State st;
    st.s = 2.0;  // mass 4, feed is 3
    st.x = {1.0};
    st.y = {0.5};
    st.z = {0.5};
    st.q = {1.0};
    CHECK_THROWS_AS(jacobian_on_surface(sc, st), std::invalid_argument);
}

TEST_CASE("full Jacobian matches finite differences", "[stability]") {
    Scenario sc = testers::canonical();
    State st;
    st.s = 0.7;
    st.x = {0.3};
    st.y = {0.4};
    st.z = {0.25};
    st.q = {0.9};
    auto jac = jacobian_full(sc, st);
    REQUIRE(jac.m.n == 5);
    CHECK(jac.labels[0] == "s");
    check_close(jac.m, fd_full(sc, st), 1e-5);
}

TEST_CASE("full Jacobian matches finite differences with a saturating quota law",
          "[stability]") {
    Scenario sc;
    sc.D = 0.4;
    sc.s_in = 2.0;
    sc.m_species.push_back({"M", {1.2, 0.8}});
    sc.q_species.push_back({"Q", {1.0, 1.0}, CaperonMeyerGrowth{2.0, 0.5, 0.25}});
    State st;
    st.s = 0.6;
    st.x = {0.5};
    st.z = {0.3};
    st.q = {0.9};
    auto jac = jacobian_full(sc, st);
    check_close(jac.m, fd_full(sc, st), 1e-5);
}

TEST_CASE("full spectrum is the surface spectrum plus the dilution mode",
          "[stability]") {
    Scenario sc = testers::canonical();
    auto eqs = enumerate_equilibria(sc);
    const auto& ex = fetch(eqs, EqClass::Ex);
    auto full = eigenvalues(jacobian_full(sc, ex.state).m);
    REQUIRE(full.size() == 5);
    // hand values: -1 (store), -1/2 (dilution), -1/8 (winner), 1/14 and 1/2 (invaders)
    const double want[5] = {-1.0, -0.5, -0.125, 1.0 / 14.0, 0.5};
    for (int i = 0; i < 5; ++i) {
        CHECK_THAT(full[i].real(), WithinAbs(want[i], 1e-9));
        CHECK_THAT(full[i].imag(), WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("bare-washout spectrum peels entirely into analytic entries", "[stability]") {
    Scenario sc = testers::canonical();
    auto eqs = enumerate_equilibria(sc);
    auto rep = classify_equilibrium(sc, fetch(eqs, EqClass::E0));
    CHECK(rep.classification == StabilityClass::Unstable);
    REQUIRE(rep.spectrum.size() == 4);
    for (const auto& e : rep.spectrum) CHECK(e.source.rfind("analytic:", 0) == 0);

    auto find = [&rep](const std::string& src) {
        for (const auto& e : rep.spectrum)
            if (e.source == src) return e.value.real();
        throw std::logic_error("missing " + src);
    };
    CHECK_THAT(find("analytic:x:M"), WithinAbs(0.1, 1e-14));
    CHECK_THAT(find("analytic:y:C"), WithinAbs(0.5, 1e-14));
    CHECK_THAT(find("analytic:z:Q"), WithinAbs(0.1, 1e-14));
    CHECK_THAT(find("analytic:q:Q"), WithinAbs(-1.0, 1e-14));
}

TEST_CASE("single-species equilibria classify by invasion eigenvalues", "[stability]") {
    Scenario sc = testers::canonical();
    auto eqs = enumerate_equilibria(sc);

    auto ex = classify_equilibrium(sc, fetch(eqs, EqClass::Ex));
    CHECK(ex.classification == StabilityClass::Unstable);

    auto ez = classify_equilibrium(sc, fetch(eqs, EqClass::Ez));
    CHECK(ez.classification == StabilityClass::Unstable);
    // the surviving store block is [[0, 1], [-1/4, -3/2]]
    std::vector<double> numeric;
    for (const auto& e : ez.spectrum)
        if (e.source == "numeric") numeric.push_back(e.value.real());
    std::sort(numeric.begin(), numeric.end());
    REQUIRE(numeric.size() == 2);
    CHECK_THAT(numeric[0], WithinAbs((-3.0 - std::sqrt(5.0)) / 4.0, 1e-12));
    CHECK_THAT(numeric[1], WithinAbs((-3.0 + std::sqrt(5.0)) / 4.0, 1e-12));

    auto ey = classify_equilibrium(sc, fetch(eqs, EqClass::Ey));
    CHECK(ey.classification == StabilityClass::Unstable);
    for (const auto& e : ey.spectrum) {
        if (e.source == "numeric") CHECK_THAT(e.value.real(), WithinAbs(-0.5, 1e-12));
        if (e.source == "analytic:z:Q")
            CHECK_THAT(e.value.real(), WithinAbs(6.0 / 11.0 - 0.5, 1e-12));
    }
}

TEST_CASE("the predicted winner is the only stable equilibrium", "[stability]") {
    Scenario sc = testers::canonical();
    int stable = 0;
    for (const auto& eq : enumerate_equilibria(sc)) {
        if (!eq.in_positive_orthant) continue;
        auto rep = classify_equilibrium(sc, eq);
        if (rep.classification == StabilityClass::Stable) {
            ++stable;
            CHECK(eq.cls == EqClass::Ezy);
            // slowest mode (sqrt(21) - 5) / 8, well clear of the axis
            double slowest = -1e9;
            for (const auto& e : rep.spectrum) slowest = std::max(slowest, e.value.real());
            CHECK_THAT(slowest, WithinAbs((std::sqrt(21.0) - 5.0) / 8.0, 1e-10));
        }
    }
    CHECK(stable == 1);
}

TEST_CASE("classification refuses points outside the positive orthant", "[stability]") {
    Scenario sc = testers::canonical();
    auto eqs = enumerate_equilibria(sc);
    const auto& exy = fetch(eqs, EqClass::Exy);
    REQUIRE_FALSE(exy.in_positive_orthant);
    CHECK_THROWS_AS(classify_equilibrium(sc, exy), std::invalid_argument);
}

TEST_CASE("near-coincident subsistence levels classify as marginal", "[stability]") {
    Scenario sc;
    sc.D = 0.5;
    sc.s_in = 3.0;
    sc.m_species.push_back({"M", {1.0, 1.0 + 1e-8}});  // subsistence 1 + 1e-8
    sc.q_species.push_back({"Q", {1.0, 1.0}, DroopGrowth{1.0, 0.5}});  // subsistence 1
    auto eqs = enumerate_equilibria(sc);
    auto rep = classify_equilibrium(sc, fetch(eqs, EqClass::Ez));
    CHECK(rep.classification == StabilityClass::Marginal);
}

TEST_CASE("a wider axis tolerance turns slow modes marginal", "[stability]") {
    Scenario sc = testers::canonical();
    auto eqs = enumerate_equilibria(sc);
    const auto& ezy = fetch(eqs, EqClass::Ezy);
    CHECK(classify_equilibrium(sc, ezy, 1e-2).classification == StabilityClass::Stable);
    CHECK(classify_equilibrium(sc, ezy, 6e-2).classification == StabilityClass::Marginal);
    CHECK(to_string(StabilityClass::Marginal) == "Marginal");
    CHECK(to_string(StabilityClass::Stable) == "Stable");
    CHECK(to_string(StabilityClass::Unstable) == "Unstable");
}
