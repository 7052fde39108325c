// Scenario description, state vector, structural checks, hypothesis
// validation, and yield normalization.
//
// A scenario is a single chemostat at dilution D fed at concentration s_in,
// hosting three kinds of competitors:
//   x_i  free-living species with Monod growth,
//   y_j  attached species with Contois growth,
//   z_k  quota species with Michaelis-Menten uptake into an internal store q_k.
// Analysis routines work on the normalized system where biomass is measured
// in substrate units (yields folded away); normalize() performs the folding.
#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemostat/rates.hpp"

namespace chemostat {

inline constexpr double kDefaultTolDistinct = 1e-9;
inline constexpr double kDefaultTolEig = 1e-7;

struct MSpecies {
    std::string id;
    MonodGrowth growth;
    double yield_a = 1.0;  // biomass per substrate, folded away by normalize()
};

struct CSpecies {
    std::string id;
    ContoisGrowth growth;
    double yield_b = 1.0;
};

struct QSpecies {
    std::string id;
    MMUptake uptake;
    QuotaGrowth growth;  // Droop or Caperon-Meyer
};

struct Scenario {
    double D = 0.0;
    double s_in = 0.0;
    std::vector<MSpecies> m_species;
    std::vector<CSpecies> c_species;
    std::vector<QSpecies> q_species;

    int n_x() const { return static_cast<int>(m_species.size()); }
    int n_y() const { return static_cast<int>(c_species.size()); }
    int n_z() const { return static_cast<int>(q_species.size()); }
};

// Full state [s, x_1..x_nx, y_1..y_ny, z_1..z_nz, q_1..q_nz].
struct State {
    double s = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;
    std::vector<double> q;

    int dim() const {
        return 1 + static_cast<int>(x.size() + y.size() + z.size() + q.size());
    }
};

inline std::vector<double> flatten(const State& st) {
    std::vector<double> v;
    v.reserve(st.dim());
    v.push_back(st.s);
    v.insert(v.end(), st.x.begin(), st.x.end());
    v.insert(v.end(), st.y.begin(), st.y.end());
    v.insert(v.end(), st.z.begin(), st.z.end());
    v.insert(v.end(), st.q.begin(), st.q.end());
    return v;
}

inline State unflatten(const Scenario& sc, const std::vector<double>& v) {
    size_t need = 1 + sc.m_species.size() + sc.c_species.size() + 2 * sc.q_species.size();
    if (v.size() != need) throw std::invalid_argument("state vector has wrong length");
    State st;
    auto it = v.begin();
    st.s = *it++;
    st.x.assign(it, it + sc.n_x());
    it += sc.n_x();
    st.y.assign(it, it + sc.n_y());
    it += sc.n_y();
    st.z.assign(it, it + sc.n_z());
    it += sc.n_z();
    st.q.assign(it, it + sc.n_z());
    return st;
}

// Total substrate mass M = s + sum x + sum y + sum q_k z_k. Along solutions
// of the normalized system M' = D (s_in - M), so M relaxes to s_in.
inline double total_mass(const State& st) {
    double m = st.s;
    m = std::accumulate(st.x.begin(), st.x.end(), m);
    m = std::accumulate(st.y.begin(), st.y.end(), m);
    for (size_t k = 0; k < st.z.size(); ++k) m += st.q[k] * st.z[k];
    return m;
}

namespace detail {
inline void require_positive(double v, const std::string& what) {
    if (!(v > 0.0) || std::isinf(v)) throw std::invalid_argument(what + " must be positive and finite");
}
}  // namespace detail

// Structural sanity. Throws std::invalid_argument on the first defect; these
// are malformed inputs, not hypothesis violations.
inline void check_well_formed(const Scenario& sc) {
    detail::require_positive(sc.D, "D");
    detail::require_positive(sc.s_in, "s_in");
    std::set<std::string> ids;
    auto claim_id = [&ids](const std::string& id) {
        if (id.empty()) throw std::invalid_argument("species id must be nonempty");
        if (!ids.insert(id).second) throw std::invalid_argument("duplicate species id: " + id);
    };
    for (const auto& sp : sc.m_species) {
        claim_id(sp.id);
        detail::require_positive(sp.growth.alpha_max, sp.id + ".alpha_max");
        detail::require_positive(sp.growth.K_s, sp.id + ".K_s");
        detail::require_positive(sp.yield_a, sp.id + ".yield_a");
    }
    for (const auto& sp : sc.c_species) {
        claim_id(sp.id);
        detail::require_positive(sp.growth.beta_max, sp.id + ".beta_max");
        detail::require_positive(sp.growth.K_s, sp.id + ".K_s");
        detail::require_positive(sp.yield_b, sp.id + ".yield_b");
    }
    for (const auto& sp : sc.q_species) {
        claim_id(sp.id);
        detail::require_positive(sp.uptake.rho_max, sp.id + ".rho_max");
        detail::require_positive(sp.uptake.K_s, sp.id + ".K_s");
        detail::require_positive(growth_sup(sp.growth), sp.id + ".gamma_bar");
        detail::require_positive(min_quota(sp.growth), sp.id + ".Q0");
        if (const auto* cm = std::get_if<CaperonMeyerGrowth>(&sp.growth))
            detail::require_positive(cm->K_q, sp.id + ".K_q");
    }
}

// Substrate level where Monod growth balances dilution; none if unattainable.
inline std::optional<double> subsistence_x(const MSpecies& sp, double D) {
    if (sp.growth.alpha_max <= D) return std::nullopt;
    return sp.growth.K_s * D / (sp.growth.alpha_max - D);
}

// Substrate level where the quota chain balances dilution: the equilibrium
// quota is quota_rate_inverse(D) and the uptake there must cover D times
// that quota. None if either stage saturates below the requirement.
inline std::optional<double> subsistence_z(const QSpecies& sp, double D) {
    if (growth_sup(sp.growth) <= D) return std::nullopt;
    double q_eq = quota_rate_inverse(sp.growth, D);
    double need = D * q_eq;  // f(q_eq) with gamma(q_eq) = D
    if (need >= sp.uptake.rho_max) return std::nullopt;
    return mm_inverse(sp.uptake, need);
}

// Substrate threshold below which an attached species cannot invade. For the
// classical Contois form this is 0 whenever beta_max > D (the species can
// invade at any positive substrate level); none (read: +infinity) otherwise.
inline std::optional<double> invasion_threshold_y(const CSpecies& sp, double D) {
    if (sp.growth.beta_max <= D) return std::nullopt;
    return 0.0;
}

struct Violation {
    std::string code;                  // "H6", "H6_XZ", "H7"
    std::vector<std::string> species;  // offending ids
    std::string detail;
};

struct ValidationReport {
    bool ok = true;
    bool washout = false;  // no species viable; bare-washout equilibrium attracts
    std::vector<Violation> violations;
    // species counts with subsistence level strictly below s_in
    int n_x = 0;
    int n_y = 0;
    int n_z = 0;
};

// Checks the distinctness hypotheses that the outcome theory relies on,
// restricted to species that are viable at this (D, s_in). Collisions among
// subsistence levels of the free families (and of attached-species invasion
// thresholds against them) make the winner ill-defined at tolerance scale,
// so they are reported rather than resolved. Attached species may share the
// invasion threshold 0 by design; they coexist rather than exclude.
inline ValidationReport validate_scenario(const Scenario& sc,
                                          double tol = kDefaultTolDistinct) {
    check_well_formed(sc);
    ValidationReport rep;

    struct Named {
        double value;
        std::string id;
        bool quota_family;
    };
    std::vector<Named> subs;
    for (const auto& sp : sc.m_species) {
        auto v = subsistence_x(sp, sc.D);
        if (v && *v < sc.s_in) {
            subs.push_back({*v, sp.id, false});
            ++rep.n_x;
        }
    }
    for (const auto& sp : sc.q_species) {
        auto v = subsistence_z(sp, sc.D);
        if (v && *v < sc.s_in) {
            subs.push_back({*v, sp.id, true});
            ++rep.n_z;
        }
    }

    for (size_t a = 0; a < subs.size(); ++a) {
        for (size_t b = a + 1; b < subs.size(); ++b) {
            if (std::abs(subs[a].value - subs[b].value) > tol) continue;
            bool cross = subs[a].quota_family != subs[b].quota_family;
            rep.violations.push_back({cross ? "H6_XZ" : "H6",
                                      {subs[a].id, subs[b].id},
                                      "subsistence levels coincide within tolerance"});
        }
    }

    std::vector<const CSpecies*> viable_c;
    for (const auto& sp : sc.c_species) {
        if (invasion_threshold_y(sp, sc.D)) {
            viable_c.push_back(&sp);
            ++rep.n_y;
        }
    }
    for (const CSpecies* sp : viable_c) {
        double thr = *invasion_threshold_y(*sp, sc.D);
        for (const auto& named : subs) {
            if (std::abs(named.value - thr) <= tol) {
                rep.violations.push_back({"H6",
                                          {sp->id, named.id},
                                          "invasion threshold hits a subsistence level"});
            }
        }
    }

    // Guild subsistence level of all viable attached species together:
    // s + sum_j Y_j(s) = s_in with the classical linear Y_j(s) = c_j s.
    if (!viable_c.empty()) {
        double csum = 0.0;
        for (const CSpecies* sp : viable_c)
            csum += (sp->growth.beta_max - sc.D) / (sp->growth.K_s * sc.D);
        double s_y_star = sc.s_in / (1.0 + csum);
        for (const CSpecies* sp : viable_c) {
            double thr = *invasion_threshold_y(*sp, sc.D);
            if (std::abs(thr - s_y_star) <= tol) {
                rep.violations.push_back({"H7",
                                          {sp->id},
                                          "invasion threshold hits the guild subsistence level"});
            }
        }
    }

    rep.washout = (rep.n_x + rep.n_y + rep.n_z == 0);
    rep.ok = rep.violations.empty();
    return rep;
}

// Folds yields into the variables: x_i -> x_i / yield_a, y_j -> y_j / yield_b.
// Monod rates only see s, so M parameters are unchanged; the Contois rate
// satisfies beta(s, yield * y~) = beta'(s, y~) with K_s scaled by the yield.
// Quota species already measure biomass in substrate-quota units.
inline Scenario normalize(const Scenario& sc) {
    check_well_formed(sc);
    Scenario out = sc;
    for (auto& sp : out.m_species) sp.yield_a = 1.0;
    for (auto& sp : out.c_species) {
        sp.growth.K_s *= sp.yield_b;
        sp.yield_b = 1.0;
    }
    return out;
}

// State counterpart of normalize(): rescales biomasses into substrate units.
inline State normalize_state(const Scenario& sc, const State& st) {
    if (st.x.size() != sc.m_species.size() || st.y.size() != sc.c_species.size() ||
        st.z.size() != sc.q_species.size() || st.q.size() != sc.q_species.size())
        throw std::invalid_argument("state does not match scenario dimensions");
    State out = st;
    for (size_t i = 0; i < out.x.size(); ++i) out.x[i] /= sc.m_species[i].yield_a;
    for (size_t j = 0; j < out.y.size(); ++j) out.y[j] /= sc.c_species[j].yield_b;
    return out;
}

inline bool is_normalized(const Scenario& sc) {
    for (const auto& sp : sc.m_species)
        if (sp.yield_a != 1.0) return false;
    for (const auto& sp : sc.c_species)
        if (sp.yield_b != 1.0) return false;
    return true;
}

}  // namespace chemostat
