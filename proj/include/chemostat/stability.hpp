// Jacobian assembly and equilibrium classification.
//
// Analysis runs on the reduced system obtained by substituting
// s = s_in - sum x - sum y - sum q z, i.e. the dynamics restricted to the
// invariant mass-balance surface; its coordinates are [x, y, z, q]. The full
// Jacobian (with the s row) adds exactly one eigenvalue, -D, on top of the
// reduced spectrum at any equilibrium.
//
// Classification peels analytic eigenvalues off first: a species absent from
// an equilibrium contributes a rank-one row or column, so its eigenvalue is
// available in closed form (x: alpha(s)-D; y: beta(s,0)-D; z: gamma(q)-D and
// the quota column -f'(q)). The surviving block is handled numerically.
#pragma once

#include <complex>
#include <string>
#include <vector>

#include "chemostat/equilibria.hpp"
#include "chemostat/linalg.hpp"
#include "chemostat/mappings.hpp"
#include "chemostat/scenario.hpp"

namespace chemostat {

struct LabeledJacobian {
    Matrix m;
    std::vector<std::string> labels;  // coordinate names, "x:<id>" etc.
};

// Jacobian of the reduced (surface) system at a state with total mass s_in.
// The state must be in normalized units; off-surface states are rejected
// because the reduction is only valid there.
inline LabeledJacobian jacobian_on_surface(const Scenario& scenario, const State& st) {
    Scenario sc = normalize(scenario);
    if (st.x.size() != sc.m_species.size() || st.y.size() != sc.c_species.size() ||
        st.z.size() != sc.q_species.size() || st.q.size() != sc.q_species.size())
        throw std::invalid_argument("state does not match scenario dimensions");
    if (std::abs(total_mass(st) - sc.s_in) >= 1e-8)
        throw std::invalid_argument("state is off the mass-balance surface");

    const int nx = sc.n_x(), ny = sc.n_y(), nz = sc.n_z();
    const int N = nx + ny + 2 * nz;
    const double D = sc.D;

    double s = sc.s_in;
    for (int i = 0; i < nx; ++i) s -= st.x[i];
    for (int j = 0; j < ny; ++j) s -= st.y[j];
    for (int k = 0; k < nz; ++k) s -= st.q[k] * st.z[k];

    auto ix = [](int i) { return i; };
    auto iy = [nx](int j) { return nx + j; };
    auto iz = [nx, ny](int k) { return nx + ny + k; };
    auto iq = [nx, ny, nz](int k) { return nx + ny + nz + k; };

    LabeledJacobian out;
    out.m = Matrix(N);
    out.labels.resize(N);
    for (int i = 0; i < nx; ++i) out.labels[ix(i)] = "x:" + sc.m_species[i].id;
    for (int j = 0; j < ny; ++j) out.labels[iy(j)] = "y:" + sc.c_species[j].id;
    for (int k = 0; k < nz; ++k) {
        out.labels[iz(k)] = "z:" + sc.q_species[k].id;
        out.labels[iq(k)] = "q:" + sc.q_species[k].id;
    }
    Matrix& J = out.m;

    for (int i = 0; i < nx; ++i) {
        double a = monod_rate(sc.m_species[i].growth, s);
        double da = monod_slope(sc.m_species[i].growth, s);
        double common = -da * st.x[i];  // every coordinate lowers s by its mass
        for (int l = 0; l < nx; ++l) J(ix(i), ix(l)) = common + (l == i ? a - D : 0.0);
        for (int j = 0; j < ny; ++j) J(ix(i), iy(j)) = common;
        for (int k = 0; k < nz; ++k) {
            J(ix(i), iz(k)) = common * st.q[k];
            J(ix(i), iq(k)) = common * st.z[k];
        }
    }

    for (int j = 0; j < ny; ++j) {
        const auto& g = sc.c_species[j].growth;
        double b = contois_rate(g, s, st.y[j]);
        double bs = contois_ds(g, s, st.y[j]);
        double by = contois_dy(g, s, st.y[j]);
        double common = -bs * st.y[j];
        for (int i = 0; i < nx; ++i) J(iy(j), ix(i)) = common;
        for (int l = 0; l < ny; ++l)
            J(iy(j), iy(l)) = common + (l == j ? b - D + by * st.y[j] : 0.0);
        for (int k = 0; k < nz; ++k) {
            J(iy(j), iz(k)) = common * st.q[k];
            J(iy(j), iq(k)) = common * st.z[k];
        }
    }

    for (int k = 0; k < nz; ++k) {
        const auto& g = sc.q_species[k].growth;
        J(iz(k), iz(k)) = quota_rate(g, st.q[k]) - D;
        J(iz(k), iq(k)) = quota_slope(g, st.q[k]) * st.z[k];
    }

    for (int k = 0; k < nz; ++k) {
        double dr = mm_slope(sc.q_species[k].uptake, s);
        for (int i = 0; i < nx; ++i) J(iq(k), ix(i)) = -dr;
        for (int j = 0; j < ny; ++j) J(iq(k), iy(j)) = -dr;
        for (int l = 0; l < nz; ++l) {
            J(iq(k), iz(l)) = -dr * st.q[l];
            J(iq(k), iq(l)) = -dr * st.z[l] -
                              (l == k ? quota_drain_slope(sc.q_species[k].growth, st.q[k]) : 0.0);
        }
    }
    return out;
}

// Jacobian of the full model, coordinates [s, x, y, z, q]. At an equilibrium
// its spectrum is the surface spectrum plus the eigenvalue -D.
inline LabeledJacobian jacobian_full(const Scenario& scenario, const State& st) {
    Scenario sc = normalize(scenario);
    if (st.x.size() != sc.m_species.size() || st.y.size() != sc.c_species.size() ||
        st.z.size() != sc.q_species.size() || st.q.size() != sc.q_species.size())
        throw std::invalid_argument("state does not match scenario dimensions");

    const int nx = sc.n_x(), ny = sc.n_y(), nz = sc.n_z();
    const int N = 1 + nx + ny + 2 * nz;
    const double D = sc.D;
    const double s = st.s;

    auto ix = [](int i) { return 1 + i; };
    auto iy = [nx](int j) { return 1 + nx + j; };
    auto iz = [nx, ny](int k) { return 1 + nx + ny + k; };
    auto iq = [nx, ny, nz](int k) { return 1 + nx + ny + nz + k; };

    LabeledJacobian out;
    out.m = Matrix(N);
    out.labels.resize(N);
    out.labels[0] = "s";
    for (int i = 0; i < nx; ++i) out.labels[ix(i)] = "x:" + sc.m_species[i].id;
    for (int j = 0; j < ny; ++j) out.labels[iy(j)] = "y:" + sc.c_species[j].id;
    for (int k = 0; k < nz; ++k) {
        out.labels[iz(k)] = "z:" + sc.q_species[k].id;
        out.labels[iq(k)] = "q:" + sc.q_species[k].id;
    }
    Matrix& J = out.m;

    J(0, 0) = -D;
    for (int i = 0; i < nx; ++i) {
        double a = monod_rate(sc.m_species[i].growth, s);
        double da = monod_slope(sc.m_species[i].growth, s);
        J(0, 0) -= da * st.x[i];
        J(0, ix(i)) = -a;
        J(ix(i), 0) = da * st.x[i];
        J(ix(i), ix(i)) = a - D;
    }
    for (int j = 0; j < ny; ++j) {
        const auto& g = sc.c_species[j].growth;
        double b = contois_rate(g, s, st.y[j]);
        double bs = contois_ds(g, s, st.y[j]);
        double by = contois_dy(g, s, st.y[j]);
        J(0, 0) -= bs * st.y[j];
        J(0, iy(j)) = -b - by * st.y[j];
        J(iy(j), 0) = bs * st.y[j];
        J(iy(j), iy(j)) = b - D + by * st.y[j];
    }
    for (int k = 0; k < nz; ++k) {
        const auto& sp = sc.q_species[k];
        double r = mm_rate(sp.uptake, s);
        double dr = mm_slope(sp.uptake, s);
        J(0, 0) -= dr * st.z[k];
        J(0, iz(k)) = -r;
        J(iz(k), iz(k)) = quota_rate(sp.growth, st.q[k]) - D;
        J(iz(k), iq(k)) = quota_slope(sp.growth, st.q[k]) * st.z[k];
        J(iq(k), 0) = dr;
        J(iq(k), iq(k)) = -quota_drain_slope(sp.growth, st.q[k]);
    }
    return out;
}

enum class StabilityClass { Stable, Unstable, Marginal };

inline std::string to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::Stable: return "Stable";
        case StabilityClass::Unstable: return "Unstable";
        case StabilityClass::Marginal: return "Marginal";
    }
    return "?";
}

struct EigenPair {
    std::complex<double> value;
    std::string source;  // "analytic:x:<id>" etc., or "numeric"
};

struct StabilityReport {
    StabilityClass classification = StabilityClass::Marginal;
    std::vector<EigenPair> spectrum;  // of the surface system
    double tol_eig = kDefaultTolEig;
};

// Classifies an equilibrium by the surface spectrum: eigenvalues of absent
// species peel off analytically, the surviving block goes through the dense
// solver. Marginal flags eigenvalues within tol_eig of the imaginary axis,
// the numeric shadow of a near-violated distinctness hypothesis.
inline StabilityReport classify_equilibrium(const Scenario& scenario, const Equilibrium& eq,
                                            double tol_eig = kDefaultTolEig) {
    if (!eq.in_positive_orthant)
        throw std::invalid_argument("cannot classify an equilibrium outside the positive orthant");
    Scenario sc = normalize(scenario);
    const State& st = eq.state;
    const double s = st.s;

    StabilityReport rep;
    rep.tol_eig = tol_eig;

    Scenario reduced;
    reduced.D = sc.D;
    reduced.s_in = sc.s_in;
    State rst;
    rst.s = s;

    for (int i = 0; i < sc.n_x(); ++i) {
        if (st.x[i] > 0.0) {
            reduced.m_species.push_back(sc.m_species[i]);
            rst.x.push_back(st.x[i]);
        } else {
            rep.spectrum.push_back({{monod_rate(sc.m_species[i].growth, s) - sc.D, 0.0},
                                    "analytic:x:" + sc.m_species[i].id});
        }
    }
    for (int j = 0; j < sc.n_y(); ++j) {
        if (st.y[j] > 0.0) {
            reduced.c_species.push_back(sc.c_species[j]);
            rst.y.push_back(st.y[j]);
        } else {
            rep.spectrum.push_back({{contois_rate(sc.c_species[j].growth, s, 0.0) - sc.D, 0.0},
                                    "analytic:y:" + sc.c_species[j].id});
        }
    }
    for (int k = 0; k < sc.n_z(); ++k) {
        if (st.z[k] > 0.0) {
            reduced.q_species.push_back(sc.q_species[k]);
            rst.z.push_back(st.z[k]);
            rst.q.push_back(st.q[k]);
        } else {
            const auto& sp = sc.q_species[k];
            rep.spectrum.push_back({{quota_rate(sp.growth, st.q[k]) - sc.D, 0.0},
                                    "analytic:z:" + sp.id});
            rep.spectrum.push_back({{-quota_drain_slope(sp.growth, st.q[k]), 0.0},
                                    "analytic:q:" + sp.id});
        }
    }

    if (rst.dim() > 1) {
        LabeledJacobian jac = jacobian_on_surface(reduced, rst);
        for (const auto& ev : eigenvalues(jac.m)) rep.spectrum.push_back({ev, "numeric"});
    }

    bool any_marginal = false, any_positive = false;
    for (const auto& e : rep.spectrum) {
        double re = e.value.real();
        if (std::abs(re) <= tol_eig) any_marginal = true;
        else if (re > tol_eig) any_positive = true;
    }
    rep.classification = any_marginal ? StabilityClass::Marginal
                        : any_positive ? StabilityClass::Unstable
                                       : StabilityClass::Stable;
    return rep;
}

}  // namespace chemostat
