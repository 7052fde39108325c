// Adaptive integration of the full model with invariant monitors.
//
// The stepper is the Dormand-Prince 5(4) embedded pair with PI step-size
// control and the standard quartic dense-output interpolant; coefficients
// are the published ones. The system is non-stiff at the parameter scales
// handled here, so an explicit pair with error control is sufficient.
//
// Monitors per sample: total mass M (which must follow an exact exponential
// law), the substrate lower-bound estimate L (non-decreasing once the state
// reaches the mass-balance surface), and the residual of the mass law.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chemostat/equilibria.hpp"
#include "chemostat/mappings.hpp"
#include "chemostat/scenario.hpp"

namespace chemostat {

namespace detail {

// Model right-hand side on the flat layout [s, x, y, z, q]. With clamp set,
// domain-limited arguments (s, y, q) are evaluated at max(value, 0) so that
// integrator stages may transiently poke below zero without throwing; the
// linear biomass factors keep their raw values.
inline void rhs_flat(const Scenario& sc, const double* v, double* dv, bool clamp) {
    const int nx = sc.n_x(), ny = sc.n_y(), nz = sc.n_z();
    const double* x = v + 1;
    const double* y = v + 1 + nx;
    const double* z = v + 1 + nx + ny;
    const double* q = v + 1 + nx + ny + nz;
    double* dx = dv + 1;
    double* dy = dv + 1 + nx;
    double* dz = dv + 1 + nx + ny;
    double* dq = dv + 1 + nx + ny + nz;

    double s = v[0];
    if (clamp && s < 0.0) s = 0.0;

    double ds = sc.D * (sc.s_in - s);
    for (int i = 0; i < nx; ++i) {
        double a = monod_rate(sc.m_species[i].growth, s);
        ds -= a * x[i];
        dx[i] = (a - sc.D) * x[i];
    }
    for (int j = 0; j < ny; ++j) {
        double yj = y[j];
        if (clamp && yj < 0.0) yj = 0.0;
        if (yj > 0.0) {
            double b = contois_rate(sc.c_species[j].growth, s, yj);
            ds -= b * y[j];
            dy[j] = (b - sc.D) * y[j];
        } else {
            // beta times zero biomass: no substrate drain, no growth
            dy[j] = 0.0;
        }
    }
    for (int k = 0; k < nz; ++k) {
        double qk = q[k];
        if (clamp && qk < 0.0) qk = 0.0;
        double r = mm_rate(sc.q_species[k].uptake, s);
        ds -= r * z[k];
        dz[k] = (quota_rate(sc.q_species[k].growth, qk) - sc.D) * z[k];
        dq[k] = r - quota_drain(sc.q_species[k].growth, qk);
    }
    dv[0] = ds;
}

}  // namespace detail

// Model right-hand side at a nonnegative state. Attached-species rates are
// skipped at zero biomass (they enter multiplied by it), which keeps the
// undefined Contois origin out of reach.
inline State rhs(const Scenario& scenario, const State& st) {
    const Scenario& sc = is_normalized(scenario) ? scenario : normalize(scenario);
    if (st.x.size() != sc.m_species.size() || st.y.size() != sc.c_species.size() ||
        st.z.size() != sc.q_species.size() || st.q.size() != sc.q_species.size())
        throw std::invalid_argument("state does not match scenario dimensions");
    std::vector<double> v = flatten(st);
    for (double c : v)
        if (!std::isfinite(c)) throw std::domain_error("state has non-finite components");
    std::vector<double> dv(v.size());
    detail::rhs_flat(sc, v.data(), dv.data(), false);
    return unflatten(sc, dv);
}

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double t_max = 200.0;
    double max_step = 10.0;
    double sample_dt = 0.0;  // <= 0 picks min(1, t_max/2000)
};

struct MonitorSample {
    double M = 0.0;
    double L = 0.0;
    double mass_residual = 0.0;  // M minus the analytic exponential law
    bool on_surface = false;     // |M - s_in| < 1e-6
    bool q_in_band = false;      // every quota strictly inside (Q0, Q^m)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;  // normalized units
    std::vector<MonitorSample> monitors;
    double s_star = 0.0;  // reference level used by the L monitor
    bool stiff_failure = false;
    double t_reached = 0.0;
    long n_accepted = 0;
    long n_rejected = 0;
    long n_rhs = 0;
};

// L(t): a certified lower bound for where the substrate is headed. Every
// quota and every positive attached biomass points back at a substrate
// level; the running minimum of those levels, s itself, and s_star is
// non-decreasing once the state lies on the mass-balance surface.
inline double monitor_L(const Scenario& scenario, const State& st, double s_star) {
    const Scenario& sc = is_normalized(scenario) ? scenario : normalize(scenario);
    double L = std::min(st.s, s_star);
    for (int k = 0; k < sc.n_z(); ++k)
        L = std::min(L, substrate_for_quota(sc.q_species[k], clamp_quota(sc.q_species[k], st.q[k])));
    for (int j = 0; j < sc.n_y(); ++j) {
        auto v = substrate_for_attached(sc.c_species[j], sc.D, st.y[j]);
        if (v) L = std::min(L, *v);
    }
    return L;
}

// Integrates from a nonnegative initial state, sampling the dense output on
// a fixed grid. On step-size underflow the partial trajectory is returned
// with stiff_failure set.
inline Trajectory integrate(const Scenario& scenario, const State& init,
                            IntegratorOptions opts = {}) {
    if (!(opts.rel_tol > 0.0 && opts.rel_tol <= 1e-2) ||
        !(opts.abs_tol > 0.0 && opts.abs_tol <= 1e-2))
        throw std::invalid_argument("tolerances must lie in (0, 1e-2]");
    if (!(opts.t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
    if (!(opts.max_step > 0.0)) throw std::invalid_argument("max_step must be positive");

    Scenario sc = normalize(scenario);
    if (init.x.size() != sc.m_species.size() || init.y.size() != sc.c_species.size() ||
        init.z.size() != sc.q_species.size() || init.q.size() != sc.q_species.size())
        throw std::invalid_argument("initial state does not match scenario dimensions");
    std::vector<double> y = flatten(init);
    for (double c : y)
        if (!std::isfinite(c) || c < 0.0)
            throw std::invalid_argument("initial state must be finite and nonnegative");

    const double sample_dt = opts.sample_dt > 0.0 ? opts.sample_dt : std::min(1.0, opts.t_max / 2000.0);
    const int n = static_cast<int>(y.size());

    Trajectory traj;
    {
        FamilyValues fam = family_subsistence(sc);
        traj.s_star = std::min({fam.s_x, fam.s_y, fam.s_z});
    }
    const double M0 = total_mass(init);

    std::vector<double> q_lo(sc.n_z()), q_hi(sc.n_z());
    for (int k = 0; k < sc.n_z(); ++k) {
        q_lo[k] = min_quota(sc.q_species[k].growth);
        q_hi[k] = quota_ceiling(sc.q_species[k]);
    }

    auto emit = [&](double t, const std::vector<double>& v) {
        State st = unflatten(sc, v);
        MonitorSample mon;
        mon.M = total_mass(st);
        mon.mass_residual = mon.M - (sc.s_in + (M0 - sc.s_in) * std::exp(-sc.D * t));
        mon.on_surface = std::abs(mon.M - sc.s_in) < 1e-6;
        mon.q_in_band = true;
        for (int k = 0; k < sc.n_z(); ++k)
            if (!(st.q[k] > q_lo[k] && st.q[k] < q_hi[k])) mon.q_in_band = false;
        mon.L = monitor_L(sc, st, traj.s_star);
        traj.times.push_back(t);
        traj.states.push_back(std::move(st));
        traj.monitors.push_back(mon);
    };

    long n_rhs = 0;
    auto f = [&sc, &n_rhs](const double* v, double* dv) {
        detail::rhs_flat(sc, v, dv, true);
        ++n_rhs;
    };

    // Dormand-Prince 5(4) tableau
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output weights
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> ynew(n), ytmp(n);
    std::vector<double> rc1(n), rc2(n), rc3(n), rc4(n), rc5(n);

    emit(0.0, y);
    f(y.data(), k1.data());

    // starting step size: compare solution and derivative scales, then probe
    double h;
    {
        double d0 = 0.0, d1n = 0.0;
        for (int i = 0; i < n; ++i) {
            double sci = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sci) * (y[i] / sci);
            d1n += (k1[i] / sci) * (k1[i] / sci);
        }
        d0 = std::sqrt(d0 / n);
        d1n = std::sqrt(d1n / n);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, opts.t_max);
        for (int i = 0; i < n; ++i) ytmp[i] = std::max(y[i] + h0 * k1[i], 0.0);
        f(ytmp.data(), k2.data());
        double d2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double sci = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
            double dd = (k2[i] - k1[i]) / sci;
            d2 += dd * dd;
        }
        d2 = std::sqrt(d2 / n) / h0;
        double dmax = std::max(d1n, d2);
        double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        h = std::min({100.0 * h0, h1, opts.max_step, opts.t_max});
    }

    const double safe = 0.9, beta = 0.04;
    const double expo1 = 0.2 - beta * 0.75;
    const double fac_shrink = 0.1, fac_grow = 5.0;  // clamps on step-size ratio
    double facold = 1e-4;
    double t = 0.0;
    bool last_rejected = false;
    long next_sample = 1;

    while (t < opts.t_max) {
        h = std::min(h, opts.max_step);
        if (h < 1e-13 * std::max(1.0, t)) {
            traj.stiff_failure = true;
            break;
        }
        bool last = false;
        if (t + 1.01 * h >= opts.t_max) {  // stretch slightly rather than leave a sliver
            h = opts.t_max - t;
            last = true;
        }

        auto stage = [&](std::vector<double>& k, auto&&... terms) {
            // ytmp = y + h * (sum of coeff*stage terms), evaluated pairwise
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                ((acc += terms.first * terms.second[i]), ...);
                ytmp[i] = y[i] + h * acc;
            }
            f(ytmp.data(), k.data());
        };
        using P = std::pair<double, const std::vector<double>&>;
        stage(k2, P{a21, k1});
        stage(k3, P{a31, k1}, P{a32, k2});
        stage(k4, P{a41, k1}, P{a42, k2}, P{a43, k3});
        stage(k5, P{a51, k1}, P{a52, k2}, P{a53, k3}, P{a54, k4});
        stage(k6, P{a61, k1}, P{a62, k2}, P{a63, k3}, P{a64, k4}, P{a65, k5});
        for (int i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(ynew.data(), k7.data());

        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
            double sci = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sci) * (ei / sci);
        }
        err = std::sqrt(err / n);

        double fac11 = std::pow(err, expo1);
        if (err <= 1.0) {
            // negative overshoot: clamp if within abs_tol, otherwise retry smaller
            double worst = 0.0;
            for (int i = 0; i < n; ++i) worst = std::min(worst, ynew[i]);
            if (worst < -opts.abs_tol) {
                ++traj.n_rejected;
                last_rejected = true;
                h *= 0.5;
                continue;
            }
            bool clamped = false;
            for (int i = 0; i < n; ++i) {
                if (ynew[i] < 0.0) {
                    ynew[i] = 0.0;
                    clamped = true;
                }
            }
            if (clamped) f(ynew.data(), k7.data());  // keep the FSAL stage consistent

            // dense output over (t, t+h]
            bool rcont_ready = false;
            while (static_cast<double>(next_sample) * sample_dt <= t + h * (1.0 + 1e-12)) {
                double ts = static_cast<double>(next_sample) * sample_dt;
                if (ts > opts.t_max * (1.0 + 1e-12)) break;
                if (!rcont_ready) {
                    for (int i = 0; i < n; ++i) {
                        rc1[i] = y[i];
                        rc2[i] = ynew[i] - y[i];
                        rc3[i] = h * k1[i] - rc2[i];
                        rc4[i] = rc2[i] - h * k7[i] - rc3[i];
                        rc5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                      d6 * k6[i] + d7 * k7[i]);
                    }
                    rcont_ready = true;
                }
                double theta = std::clamp((ts - t) / h, 0.0, 1.0);
                double theta1 = 1.0 - theta;
                for (int i = 0; i < n; ++i) {
                    double v = rc1[i] +
                               theta * (rc2[i] + theta1 * (rc3[i] + theta * (rc4[i] + theta1 * rc5[i])));
                    ytmp[i] = std::max(v, 0.0);  // interpolation may undershoot by O(err)
                }
                emit(ts, ytmp);
                ++next_sample;
            }

            t = last ? opts.t_max : t + h;
            y.swap(ynew);
            k1.swap(k7);
            ++traj.n_accepted;

            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(1.0 / fac_grow, std::min(1.0 / fac_shrink, fac / safe));
            double hnew = h / fac;
            facold = std::max(err, 1e-4);
            if (last_rejected) hnew = std::min(hnew, h);
            last_rejected = false;
            h = hnew;
        } else {
            ++traj.n_rejected;
            last_rejected = true;
            h = h / std::min(1.0 / fac_shrink, fac11 / safe);
        }
    }

    traj.t_reached = t;
    if (traj.times.empty() || traj.times.back() < t - 1e-12 * std::max(1.0, t)) emit(t, y);
    traj.n_rhs = n_rhs;
    return traj;
}

struct BoundBreach {
    std::string what;  // which bound, and for which species
    double t;
    double value;
    double limit;
};

struct BoundsReport {
    bool ok = true;
    std::vector<BoundBreach> breaches;
    double mass_cap = 0.0;
    double substrate_floor = 0.0;
    std::vector<double> z_caps;
};

// Checks the a-priori bounds that hold for exact solutions: the mass cap
// M <= max(M(0), s_in), per-species z caps, eventual containment of each
// quota in (Q0, Q^m), and the positive substrate floor. Breaches indicate
// integrator tolerance failures, not model behavior.
inline BoundsReport check_bounds(const Scenario& scenario, const Trajectory& traj) {
    if (traj.times.empty()) throw std::invalid_argument("empty trajectory");
    Scenario sc = normalize(scenario);
    BoundsReport rep;
    const double slack = 1e-8;

    const State& st0 = traj.states.front();
    const double m_cap = std::max(total_mass(st0), sc.s_in);
    rep.mass_cap = m_cap;

    // z_k is eventually dominated by total mass over the equilibrium quota;
    // species that cannot reach growth D keep only their initial level.
    rep.z_caps.resize(sc.n_z());
    for (int k = 0; k < sc.n_z(); ++k) {
        const auto& g = sc.q_species[k].growth;
        double cap = st0.z[k];
        if (growth_sup(g) > sc.D) cap = std::max(cap, m_cap / quota_rate_inverse(g, sc.D));
        rep.z_caps[k] = cap;
    }

    // substrate floor: solve phi(s) = D*s_in/2 where phi bounds ds/dt from
    // below using the worst-case biomass levels
    {
        std::vector<double> q_caps(sc.n_z());
        for (int k = 0; k < sc.n_z(); ++k) {
            double fed = quota_drain_inverse(sc.q_species[k].growth,
                                             mm_rate(sc.q_species[k].uptake, m_cap));
            q_caps[k] = std::max(fed, st0.q[k]);
        }
        (void)q_caps;  // quotas are bounded but do not enter phi
        auto phi = [&sc, m_cap, &rep](double s) {
            double v = sc.D * (sc.s_in - s);
            for (const auto& sp : sc.m_species) v -= monod_rate(sp.growth, s) * m_cap;
            for (const auto& sp : sc.c_species)
                v -= contois_rate(sp.growth, s, m_cap) * m_cap;
            for (int k = 0; k < sc.n_z(); ++k)
                v -= mm_rate(sc.q_species[k].uptake, s) * rep.z_caps[k];
            return v - sc.D * sc.s_in / 2.0;
        };
        rep.substrate_floor = solve_decreasing(phi, 0.0, sc.s_in);
    }

    auto breach = [&rep](const std::string& what, double t, double v, double lim) {
        rep.breaches.push_back({what, t, v, lim});
        rep.ok = false;
    };

    const size_t nsamp = traj.times.size();
    for (size_t i = 0; i < nsamp; ++i) {
        double M = traj.monitors[i].M;
        if (M > m_cap * (1.0 + slack)) {
            breach("total mass above cap", traj.times[i], M, m_cap);
            break;
        }
    }
    for (int k = 0; k < sc.n_z(); ++k) {
        for (size_t i = 0; i < nsamp; ++i) {
            double z = traj.states[i].z[k];
            if (z > rep.z_caps[k] * (1.0 + slack) + 1e-12) {
                breach("z above cap: " + sc.q_species[k].id, traj.times[i], z, rep.z_caps[k]);
                break;
            }
        }
    }

    // quota containment: the band is absorbing, so the suffix of samples from
    // the last outside excursion onward must reach the end strictly inside
    for (int k = 0; k < sc.n_z(); ++k) {
        double lo = min_quota(sc.q_species[k].growth);
        double hi = quota_ceiling(sc.q_species[k]);
        double band = hi - lo;
        size_t last_out = nsamp;  // sentinel: never outside
        for (size_t i = 0; i < nsamp; ++i) {
            double q = traj.states[i].q[k];
            if (!(q > lo - 1e-9 * band && q < hi + 1e-9 * band)) last_out = i;
        }
        if (last_out == nsamp - 1)
            breach("quota never settles in (Q0, Q^m): " + sc.q_species[k].id,
                   traj.times[last_out], traj.states[last_out].q[k], lo);
    }

    // substrate floor: once s first clears the floor it must stay above it
    {
        double floor = rep.substrate_floor;
        size_t first_above = nsamp;
        for (size_t i = 0; i < nsamp; ++i) {
            if (traj.states[i].s >= floor) {
                first_above = i;
                break;
            }
        }
        for (size_t i = first_above; i < nsamp; ++i) {
            if (traj.states[i].s < floor * (1.0 - 1e-6)) {
                breach("substrate below floor", traj.times[i], traj.states[i].s, floor);
                break;
            }
        }
    }
    return rep;
}

struct ConvergenceResult {
    bool converged = false;
    std::optional<double> t_converged;  // start of the settled window + window length
    double terminal_distance = 0.0;     // sup-norm at the last sample
    // Slaved-coordinate consistency at the limit: quotas sit at the level the
    // terminal substrate dictates, positive attached biomass at its capacity.
    bool slaved_consistent = false;
    double tol = 0.0;
    double window = 0.0;
};

// A trajectory converged to the target when its sup-norm distance stays
// within tol over a full trailing window. t_converged marks the end of the
// earliest such window.
inline ConvergenceResult detect_convergence(const Scenario& scenario, const Trajectory& traj,
                                            const Equilibrium& target, double tol,
                                            double window) {
    if (traj.times.empty()) throw std::invalid_argument("empty trajectory");
    Scenario sc = normalize(scenario);
    ConvergenceResult res;
    res.tol = tol;
    res.window = window;

    std::vector<double> tv = flatten(target.state);
    const size_t nsamp = traj.times.size();
    size_t first_ok = nsamp;  // start of the settled suffix
    double dist_last = 0.0;
    for (size_t i = 0; i < nsamp; ++i) {
        std::vector<double> v = flatten(traj.states[i]);
        double d = 0.0;
        for (size_t c = 0; c < v.size(); ++c) d = std::max(d, std::abs(v[c] - tv[c]));
        if (d > tol)
            first_ok = nsamp;
        else if (first_ok == nsamp)
            first_ok = i;
        if (i + 1 == nsamp) dist_last = d;
    }
    res.terminal_distance = dist_last;
    if (first_ok < nsamp && traj.times.back() - traj.times[first_ok] >= window * (1.0 - 1e-12)) {
        res.converged = true;
        res.t_converged = traj.times[first_ok] + window;
    }

    if (res.converged) {
        const State& end = traj.states.back();
        double s0 = target.state.s;
        res.slaved_consistent = true;
        for (int k = 0; k < sc.n_z(); ++k)
            if (std::abs(end.q[k] - equilibrium_quota(sc.q_species[k], s0)) > tol)
                res.slaved_consistent = false;
        for (int j = 0; j < sc.n_y(); ++j)
            if (end.y[j] > tol &&
                std::abs(end.y[j] - attached_capacity(sc.c_species[j], sc.D, s0)) > tol)
                res.slaved_consistent = false;
    }
    return res;
}

}  // namespace chemostat
