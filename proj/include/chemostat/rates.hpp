// Growth and uptake rate families for the three competitor classes.
//
// M-species grow on free substrate (Monod), C-species grow attached with
// density-dependent saturation (Contois), Q-species store an internal quota
// (Michaelis-Menten uptake feeding a Droop or Caperon-Meyer growth law).
// All rates are zero at zero substrate and strictly increasing where defined.
#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>

namespace chemostat {

struct MonodGrowth {
    double alpha_max;  // supremum growth rate
    double K_s;        // half-saturation substrate level
};

struct ContoisGrowth {
    double beta_max;
    double K_s;  // half saturation occurs at s = K_s * y
};

struct MMUptake {
    double rho_max;
    double K_s;
};

struct DroopGrowth {
    double gamma_bar;  // asymptotic rate as the quota grows
    double Q0;         // subsistence quota, growth stops at or below it
};

struct CaperonMeyerGrowth {
    double gamma_bar;
    double Q0;
    double K_q;  // half saturation of the quota surplus q - Q0
};

using QuotaGrowth = std::variant<DroopGrowth, CaperonMeyerGrowth>;

inline void require_nonnegative_substrate(double s) {
    if (s < 0.0 || std::isnan(s)) throw std::domain_error("substrate must be nonnegative");
}

// ---- Monod ----

inline double monod_rate(const MonodGrowth& g, double s) {
    require_nonnegative_substrate(s);
    return g.alpha_max * s / (g.K_s + s);
}

inline double monod_slope(const MonodGrowth& g, double s) {
    require_nonnegative_substrate(s);
    double denom = g.K_s + s;
    return g.alpha_max * g.K_s / (denom * denom);
}

// ---- Contois ----
//
// beta(s, y) = beta_max * s / (K_s * y + s) for y > 0. The y -> 0 limit at
// fixed s > 0 is beta_max, which we adopt as beta(s, 0); the origin (0, 0)
// has no limit and is rejected.

inline double contois_rate(const ContoisGrowth& g, double s, double y) {
    require_nonnegative_substrate(s);
    if (y < 0.0 || std::isnan(y)) throw std::domain_error("biomass must be nonnegative");
    if (y == 0.0) {
        if (s == 0.0) throw std::domain_error("Contois rate undefined at (0, 0)");
        return g.beta_max;
    }
    return g.beta_max * s / (g.K_s * y + s);
}

inline double contois_ds(const ContoisGrowth& g, double s, double y) {
    require_nonnegative_substrate(s);
    if (y < 0.0) throw std::domain_error("biomass must be nonnegative");
    if (y == 0.0) return 0.0;  // limit of K_s*y / (K_s*y + s)^2 terms
    double denom = g.K_s * y + s;
    return g.beta_max * g.K_s * y / (denom * denom);
}

inline double contois_dy(const ContoisGrowth& g, double s, double y) {
    require_nonnegative_substrate(s);
    if (y < 0.0) throw std::domain_error("biomass must be nonnegative");
    if (y == 0.0) {
        if (s == 0.0) throw std::domain_error("Contois slope undefined at (0, 0)");
        return -g.beta_max * g.K_s / s;
    }
    double denom = g.K_s * y + s;
    return -g.beta_max * g.K_s * s / (denom * denom);
}

// ---- Michaelis-Menten uptake ----

inline double mm_rate(const MMUptake& u, double s) {
    require_nonnegative_substrate(s);
    return u.rho_max * s / (u.K_s + s);
}

inline double mm_slope(const MMUptake& u, double s) {
    require_nonnegative_substrate(s);
    double denom = u.K_s + s;
    return u.rho_max * u.K_s / (denom * denom);
}

// Substrate level at which uptake equals v; defined for v in [0, rho_max).
inline double mm_inverse(const MMUptake& u, double v) {
    if (v < 0.0 || v >= u.rho_max || std::isnan(v))
        throw std::domain_error("uptake inverse needs v in [0, rho_max)");
    return u.K_s * v / (u.rho_max - v);
}

// ---- Quota-limited growth ----
//
// Both laws vanish for q <= Q0 and increase toward gamma_bar. Droop reaches
// rates arbitrarily close to gamma_bar; so does Caperon-Meyer, more slowly.

inline double min_quota(const QuotaGrowth& g) {
    return std::visit([](const auto& v) { return v.Q0; }, g);
}

inline double growth_sup(const QuotaGrowth& g) {
    return std::visit([](const auto& v) { return v.gamma_bar; }, g);
}

inline double quota_rate(const QuotaGrowth& g, double q) {
    if (q < 0.0 || std::isnan(q)) throw std::domain_error("quota must be nonnegative");
    return std::visit(
        [q](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if (q <= v.Q0) return 0.0;
            if constexpr (std::is_same_v<T, DroopGrowth>) {
                return v.gamma_bar * (1.0 - v.Q0 / q);
            } else {
                return v.gamma_bar * (q - v.Q0) / (q - v.Q0 + v.K_q);
            }
        },
        g);
}

inline double quota_slope(const QuotaGrowth& g, double q) {
    if (q < 0.0 || std::isnan(q)) throw std::domain_error("quota must be nonnegative");
    return std::visit(
        [q](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if (q <= v.Q0) return 0.0;  // one-sided at the kink q = Q0
            if constexpr (std::is_same_v<T, DroopGrowth>) {
                return v.gamma_bar * v.Q0 / (q * q);
            } else {
                double surplus = q - v.Q0 + v.K_q;
                return v.gamma_bar * v.K_q / (surplus * surplus);
            }
        },
        g);
}

// Quota at which the growth rate equals d; defined for d in [0, gamma_bar).
// d = 0 maps to Q0, the bottom of the increasing branch.
inline double quota_rate_inverse(const QuotaGrowth& g, double d) {
    double sup = growth_sup(g);
    if (d < 0.0 || d >= sup || std::isnan(d))
        throw std::domain_error("growth inverse needs d in [0, gamma_bar)");
    return std::visit(
        [d](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if (d == 0.0) return v.Q0;
            if constexpr (std::is_same_v<T, DroopGrowth>) {
                return v.Q0 * v.gamma_bar / (v.gamma_bar - d);
            } else {
                return v.Q0 + d * v.K_q / (v.gamma_bar - d);
            }
        },
        g);
}

}  // namespace chemostat
