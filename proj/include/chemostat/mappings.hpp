// Scalar mappings between substrate, quota, and attached-biomass levels.
//
// Quota species: uptake rho(s) fills the store, growth drains it at
// f(q) = gamma(q) * q. At fixed substrate the quota relaxes to the unique
// solution of f(q) = rho(s), written equilibrium_quota(s); its inverse
// substrate_for_quota recovers the substrate level a quota value points at.
// Attached species: at fixed s > invasion threshold the biomass relaxes to
// attached_capacity(s), the level where the Contois rate equals dilution.
// In functions below a std::optional return uses nullopt for "+infinity";
// callers compare explicitly instead of pushing INF through arithmetic.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "chemostat/rates.hpp"
#include "chemostat/rootfind.hpp"
#include "chemostat/scenario.hpp"

namespace chemostat {

// f(q) = gamma(q) * q, the rate at which growth consumes stored quota.
// Zero up to Q0, then strictly increasing and unbounded.
inline double quota_drain(const QuotaGrowth& g, double q) {
    return quota_rate(g, q) * q;
}

inline double quota_drain_slope(const QuotaGrowth& g, double q) {
    if (q <= min_quota(g)) return 0.0;
    return quota_slope(g, q) * q + quota_rate(g, q);
}

// Unique q >= Q0 with quota_drain(q) = v, for v >= 0. Closed form for Droop;
// bracketed bisection with a Newton polish otherwise.
inline double quota_drain_inverse(const QuotaGrowth& g, double v) {
    if (v < 0.0 || std::isnan(v) || std::isinf(v))
        throw std::domain_error("quota drain inverse needs finite v >= 0");
    double q0 = min_quota(g);
    if (v == 0.0) return q0;
    if (const auto* droop = std::get_if<DroopGrowth>(&g))
        return q0 + v / droop->gamma_bar;  // f(q) = gamma_bar * (q - Q0)

    auto fn = [&g, v](double q) { return quota_drain(g, q) - v; };
    auto dfn = [&g](double q) { return quota_drain_slope(g, q); };
    double hi = expand_upper(fn, q0, q0 + v / growth_sup(g), 0.0);
    return solve_increasing(fn, q0, hi, dfn);
}

// Q(s): quota the store settles at when the substrate is held at s.
// Strictly increasing from Q0 (s -> 0) toward quota_ceiling (s -> inf);
// s <= 0 returns the limiting value Q0.
inline double equilibrium_quota(const QSpecies& sp, double s) {
    if (s <= 0.0) return min_quota(sp.growth);
    return quota_drain_inverse(sp.growth, mm_rate(sp.uptake, s));
}

// Q^m: least upper bound of reachable equilibrium quotas, f^{-1}(rho_max).
inline double quota_ceiling(const QSpecies& sp) {
    return quota_drain_inverse(sp.growth, sp.uptake.rho_max);
}

// Clamps a transient quota into the open band (Q0, Q^m) where the inverse
// mapping is defined. Trajectories may start outside the band; after a
// finite transient they stay strictly inside, so the clamp only matters
// early on.
inline double clamp_quota(const QSpecies& sp, double q, double eps = 1e-12) {
    if (std::isnan(q)) throw std::domain_error("quota must be a number");
    double lo = min_quota(sp.growth) * (1.0 + eps);
    double hi = quota_ceiling(sp) * (1.0 - eps);
    if (hi < lo) hi = lo;  // degenerate band, pathological parameters
    return std::clamp(q, lo, hi);
}

// Inverse of equilibrium_quota, defined on the open band (Q0, Q^m).
// Callers with transient quotas clamp first (clamp_quota).
inline double substrate_for_quota(const QSpecies& sp, double q) {
    if (std::isnan(q)) throw std::domain_error("quota must be a number");
    if (q <= min_quota(sp.growth) || q >= quota_ceiling(sp))
        throw std::domain_error("quota outside the reachable band (Q0, Q^m)");
    double v = std::min(quota_drain(sp.growth, q), sp.uptake.rho_max * (1.0 - 1e-15));
    return mm_inverse(sp.uptake, v);
}

// Y(s): attached biomass the Contois species settles at when the substrate
// is held at s; 0 when the species cannot hold on (beta(s, 0) <= D).
inline double attached_capacity(const CSpecies& sp, double D, double s) {
    if (s < 0.0 || std::isnan(s)) throw std::domain_error("substrate must be nonnegative");
    if (s == 0.0 || sp.growth.beta_max <= D) return 0.0;
    // beta(s, y) = D  <=>  y = s (beta_max - D) / (K_s D)
    return s * (sp.growth.beta_max - D) / (sp.growth.K_s * D);
}

// S^y(y): substrate level that holds the attached biomass steady at y;
// nullopt means no finite level suffices (beta_max <= D). At y = 0 this is
// the infimum over positive biomass, the invasion threshold.
inline std::optional<double> substrate_for_attached(const CSpecies& sp, double D, double y) {
    if (y < 0.0 || std::isnan(y)) throw std::domain_error("biomass must be nonnegative");
    if (sp.growth.beta_max <= D) return std::nullopt;
    return y * sp.growth.K_s * D / (sp.growth.beta_max - D);
}

}  // namespace chemostat
