// Equilibrium enumeration and outcome prediction.
//
// Every equilibrium pins the substrate at some level s_eq and slaves all
// quotas to q_l = equilibrium_quota(s_eq). The classes are: washout (no
// biomass), one free species alone (Monod or quota), a group of attached
// species alone, and one free species together with an attached group. The
// predicted outcome is the equilibrium whose substrate level is the lowest
// attainable one: the best competitor is the species (or attached guild)
// that can hold the substrate down the furthest.
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "chemostat/mappings.hpp"
#include "chemostat/scenario.hpp"

namespace chemostat {

enum class EqClass { E0, Ex, Ez, Ey, Exy, Ezy };

inline std::string to_string(EqClass c) {
    switch (c) {
        case EqClass::E0: return "E0";
        case EqClass::Ex: return "Ex";
        case EqClass::Ez: return "Ez";
        case EqClass::Ey: return "Ey";
        case EqClass::Exy: return "Exy";
        case EqClass::Ezy: return "Ezy";
    }
    return "?";
}

struct Equilibrium {
    EqClass cls = EqClass::E0;
    int free_index = -1;              // index into m_species (Ex/Exy) or q_species (Ez/Ezy)
    std::vector<int> attached_group;  // indices into c_species with positive biomass
    State state;                      // in normalized (substrate) units
    std::vector<std::string> survivors;
    // False when the algebraic solution puts the free species at negative
    // biomass; such points are kept for reporting but are not equilibria of
    // the positive-orthant dynamics.
    bool in_positive_orthant = true;

    double s_eq() const { return state.s; }
};

// Subsistence levels capped by viability at this s_in: none when the species
// cannot pull the substrate below the feed concentration.
inline std::optional<double> viable_subsistence_x(const MSpecies& sp, double D, double s_in) {
    auto v = subsistence_x(sp, D);
    if (!v || *v >= s_in) return std::nullopt;
    return v;
}

inline std::optional<double> viable_subsistence_z(const QSpecies& sp, double D, double s_in) {
    auto v = subsistence_z(sp, D);
    if (!v || *v >= s_in) return std::nullopt;
    return v;
}

// Substrate level s solving s + sum_{j in G} Y_j(s) = s_in: the level an
// attached guild holds the chemostat at when it absorbs all the input.
// Empty or fully non-viable groups return s_in. Classical Contois makes
// Y_j linear in s, hence the closed form.
inline double guild_subsistence(const Scenario& sc, const std::vector<int>& group) {
    double csum = 0.0;
    for (int j : group) {
        const auto& sp = sc.c_species.at(j);
        if (sp.growth.beta_max > sc.D)
            csum += (sp.growth.beta_max - sc.D) / (sp.growth.K_s * sc.D);
    }
    return sc.s_in / (1.0 + csum);
}

// Compliance at level s0: can the species hold growth rate D there? Free
// species need their subsistence level to sit at s0 (an equality, tolerance
// guarded); attached species only need their invasion threshold below s0.
inline bool is_compliant(const MSpecies& sp, double D, double s0,
                         double tol = kDefaultTolDistinct) {
    auto v = subsistence_x(sp, D);
    return v && std::abs(*v - s0) <= tol;
}

inline bool is_compliant(const QSpecies& sp, double D, double s0,
                         double tol = kDefaultTolDistinct) {
    auto v = subsistence_z(sp, D);
    return v && std::abs(*v - s0) <= tol;
}

inline bool is_compliant(const CSpecies& sp, double D, double s0,
                         double /*tol*/ = kDefaultTolDistinct) {
    auto thr = invasion_threshold_y(sp, D);
    return thr && *thr < s0;
}

enum class WinnerClass { X, Y, Z, None };

inline std::string to_string(WinnerClass c) {
    switch (c) {
        case WinnerClass::X: return "X";
        case WinnerClass::Y: return "Y";
        case WinnerClass::Z: return "Z";
        case WinnerClass::None: return "none";
    }
    return "?";
}

// The three family minima entering the outcome rule. A family that cannot
// pull the substrate below s_in contributes s_in itself.
struct FamilyValues {
    double s_x, s_y, s_z;
    int x_index = -1;        // argmin within m_species, -1 if none viable
    int z_index = -1;
    std::vector<int> guild;  // viable attached species (indices)
};

inline FamilyValues family_subsistence(const Scenario& sc) {
    FamilyValues f{sc.s_in, sc.s_in, sc.s_in, -1, -1, {}};
    for (int i = 0; i < sc.n_x(); ++i) {
        auto v = viable_subsistence_x(sc.m_species[i], sc.D, sc.s_in);
        if (v && *v < f.s_x) {
            f.s_x = *v;
            f.x_index = i;
        }
    }
    for (int k = 0; k < sc.n_z(); ++k) {
        auto v = viable_subsistence_z(sc.q_species[k], sc.D, sc.s_in);
        if (v && *v < f.s_z) {
            f.s_z = *v;
            f.z_index = k;
        }
    }
    for (int j = 0; j < sc.n_y(); ++j)
        if (invasion_threshold_y(sc.c_species[j], sc.D)) f.guild.push_back(j);
    if (!f.guild.empty()) f.s_y = guild_subsistence(sc, f.guild);
    return f;
}

namespace detail {

// All-zero biomass state at substrate s with every quota slaved to s.
inline State slaved_state(const Scenario& sc, double s) {
    State st;
    st.s = s;
    st.x.assign(sc.n_x(), 0.0);
    st.y.assign(sc.n_y(), 0.0);
    st.z.assign(sc.n_z(), 0.0);
    st.q.resize(sc.n_z());
    for (int k = 0; k < sc.n_z(); ++k)
        st.q[k] = equilibrium_quota(sc.q_species[k], s);
    return st;
}

inline void collect_survivors(const Scenario& sc, Equilibrium& eq) {
    eq.survivors.clear();
    for (int i = 0; i < sc.n_x(); ++i)
        if (eq.state.x[i] > 0.0) eq.survivors.push_back(sc.m_species[i].id);
    for (int j = 0; j < sc.n_y(); ++j)
        if (eq.state.y[j] > 0.0) eq.survivors.push_back(sc.c_species[j].id);
    for (int k = 0; k < sc.n_z(); ++k)
        if (eq.state.z[k] > 0.0) eq.survivors.push_back(sc.q_species[k].id);
}

// Places the attached group at its capacity for substrate level s and
// returns the total attached biomass.
inline double place_attached(const Scenario& sc, const std::vector<int>& group, double s,
                             State& st) {
    double sum = 0.0;
    for (int j : group) {
        st.y[j] = attached_capacity(sc.c_species[j], sc.D, s);
        sum += st.y[j];
    }
    return sum;
}

}  // namespace detail

struct EnumerateOptions {
    bool all_subsets = false;  // every attached subgroup, not just the full guild
    int max_attached_for_subsets = 12;
};

// Enumerates all equilibrium classes of the normalized system. States come
// back in normalized units, sorted by (class, substrate level, free index).
// Mixed-class entries whose free-species biomass turns out non-positive are
// tagged rather than dropped.
inline std::vector<Equilibrium> enumerate_equilibria(const Scenario& scenario,
                                                     EnumerateOptions opts = {}) {
    Scenario sc = normalize(scenario);
    std::vector<Equilibrium> out;
    FamilyValues fam = family_subsistence(sc);

    {
        Equilibrium e0;
        e0.cls = EqClass::E0;
        e0.state = detail::slaved_state(sc, sc.s_in);
        out.push_back(std::move(e0));
    }

    for (int i = 0; i < sc.n_x(); ++i) {
        auto v = viable_subsistence_x(sc.m_species[i], sc.D, sc.s_in);
        if (!v) continue;
        Equilibrium eq;
        eq.cls = EqClass::Ex;
        eq.free_index = i;
        eq.state = detail::slaved_state(sc, *v);
        eq.state.x[i] = sc.s_in - *v;
        out.push_back(std::move(eq));

        if (!fam.guild.empty()) {
            Equilibrium mix;
            mix.cls = EqClass::Exy;
            mix.free_index = i;
            mix.attached_group = fam.guild;
            mix.state = detail::slaved_state(sc, *v);
            double ysum = detail::place_attached(sc, fam.guild, *v, mix.state);
            double xbar = sc.s_in - *v - ysum;
            mix.state.x[i] = xbar;
            mix.in_positive_orthant = xbar > 0.0;
            out.push_back(std::move(mix));
        }
    }

    for (int k = 0; k < sc.n_z(); ++k) {
        auto v = viable_subsistence_z(sc.q_species[k], sc.D, sc.s_in);
        if (!v) continue;
        double q_eq = quota_rate_inverse(sc.q_species[k].growth, sc.D);
        Equilibrium eq;
        eq.cls = EqClass::Ez;
        eq.free_index = k;
        eq.state = detail::slaved_state(sc, *v);
        eq.state.q[k] = q_eq;
        eq.state.z[k] = (sc.s_in - *v) / q_eq;
        out.push_back(std::move(eq));

        if (!fam.guild.empty()) {
            Equilibrium mix;
            mix.cls = EqClass::Ezy;
            mix.free_index = k;
            mix.attached_group = fam.guild;
            mix.state = detail::slaved_state(sc, *v);
            mix.state.q[k] = q_eq;
            double ysum = detail::place_attached(sc, fam.guild, *v, mix.state);
            double zbar = (sc.s_in - *v - ysum) / q_eq;
            mix.state.z[k] = zbar;
            mix.in_positive_orthant = zbar > 0.0;
            out.push_back(std::move(mix));
        }
    }

    auto push_guild = [&sc, &out](const std::vector<int>& group) {
        if (group.empty()) return;
        Equilibrium eq;
        eq.cls = EqClass::Ey;
        eq.attached_group = group;
        double s = guild_subsistence(sc, group);
        eq.state = detail::slaved_state(sc, s);
        detail::place_attached(sc, group, s, eq.state);
        out.push_back(std::move(eq));
    };

    if (opts.all_subsets) {
        int n = static_cast<int>(fam.guild.size());
        if (n > opts.max_attached_for_subsets)
            throw std::invalid_argument("attached roster too large for subset enumeration");
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            std::vector<int> group;
            for (int b = 0; b < n; ++b)
                if (mask & (1u << b)) group.push_back(fam.guild[b]);
            push_guild(group);
        }
    } else {
        push_guild(fam.guild);
    }

    for (auto& eq : out) detail::collect_survivors(sc, eq);

    std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) {
        if (a.cls != b.cls) return static_cast<int>(a.cls) < static_cast<int>(b.cls);
        if (a.s_eq() != b.s_eq()) return a.s_eq() < b.s_eq();
        return a.free_index < b.free_index;
    });
    return out;
}

struct Prediction {
    double s_star = 0.0;
    WinnerClass winner = WinnerClass::None;
    Equilibrium e_star;
    std::vector<std::string> survivors;
    std::vector<std::string> compliant;
    bool washout = false;
    FamilyValues family{};
    double tol = kDefaultTolDistinct;
};

// The outcome rule: the lowest family subsistence level wins. Attached
// guilds win ties because the tied free species sits at zero biomass there
// (the mixed equilibrium degenerates onto the guild one).
inline Prediction predict_outcome(const Scenario& scenario,
                                  double tol = kDefaultTolDistinct) {
    Scenario sc = normalize(scenario);
    Prediction p;
    p.tol = tol;
    p.family = family_subsistence(sc);
    const FamilyValues& f = p.family;
    p.s_star = std::min({f.s_x, f.s_y, f.s_z});
    p.washout = !(p.s_star < sc.s_in);

    auto build = [&sc, &f](EqClass cls, int free_index) {
        Equilibrium eq;
        eq.cls = cls;
        eq.free_index = free_index;
        switch (cls) {
            case EqClass::E0:
                eq.state = detail::slaved_state(sc, sc.s_in);
                break;
            case EqClass::Ey: {
                eq.attached_group = f.guild;
                eq.state = detail::slaved_state(sc, f.s_y);
                detail::place_attached(sc, f.guild, f.s_y, eq.state);
                break;
            }
            case EqClass::Ex: {
                eq.state = detail::slaved_state(sc, f.s_x);
                eq.state.x[free_index] = sc.s_in - f.s_x;
                break;
            }
            case EqClass::Exy: {
                eq.attached_group = f.guild;
                eq.state = detail::slaved_state(sc, f.s_x);
                double ysum = detail::place_attached(sc, f.guild, f.s_x, eq.state);
                eq.state.x[free_index] = sc.s_in - f.s_x - ysum;
                break;
            }
            case EqClass::Ez: {
                eq.state = detail::slaved_state(sc, f.s_z);
                double q_eq = quota_rate_inverse(sc.q_species[free_index].growth, sc.D);
                eq.state.q[free_index] = q_eq;
                eq.state.z[free_index] = (sc.s_in - f.s_z) / q_eq;
                break;
            }
            case EqClass::Ezy: {
                eq.attached_group = f.guild;
                eq.state = detail::slaved_state(sc, f.s_z);
                double q_eq = quota_rate_inverse(sc.q_species[free_index].growth, sc.D);
                eq.state.q[free_index] = q_eq;
                double ysum = detail::place_attached(sc, f.guild, f.s_z, eq.state);
                eq.state.z[free_index] = (sc.s_in - f.s_z - ysum) / q_eq;
                break;
            }
        }
        detail::collect_survivors(sc, eq);
        return eq;
    };

    if (p.washout) {
        p.winner = WinnerClass::None;
        p.e_star = build(EqClass::E0, -1);
    } else if (f.s_y <= f.s_x && f.s_y <= f.s_z) {
        p.winner = WinnerClass::Y;
        p.e_star = build(EqClass::Ey, -1);
    } else if (f.s_x <= f.s_z) {
        p.winner = WinnerClass::X;
        p.e_star = build(f.guild.empty() ? EqClass::Ex : EqClass::Exy, f.x_index);
    } else {
        p.winner = WinnerClass::Z;
        p.e_star = build(f.guild.empty() ? EqClass::Ez : EqClass::Ezy, f.z_index);
    }
    p.survivors = p.e_star.survivors;

    if (!p.washout) {
        for (const auto& sp : sc.m_species)
            if (is_compliant(sp, sc.D, p.s_star, tol)) p.compliant.push_back(sp.id);
        for (const auto& sp : sc.c_species)
            if (is_compliant(sp, sc.D, p.s_star, tol)) p.compliant.push_back(sp.id);
        for (const auto& sp : sc.q_species)
            if (is_compliant(sp, sc.D, p.s_star, tol)) p.compliant.push_back(sp.id);
    }
    return p;
}

}  // namespace chemostat
