// Outcome maps over (D, s_in) grids and the zone thresholds that organize
// them for the one-attached-plus-free roster.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "chemostat/equilibria.hpp"
#include "chemostat/mappings.hpp"
#include "chemostat/scenario.hpp"

namespace chemostat {

// Boundaries of the outcome map along the s_in axis at fixed D, for rosters
// with a single attached species. t1 is the attached species' invasion
// threshold: below it nothing survives, and it is absent when beta_max <= D
// (the species never reaches growth rate D). t2 = s_f* + Y(s_f*), the level
// past which the attached species can no longer exclude the best free
// species; absent when no free species can reach growth rate D.
struct ZoneThresholds {
    std::optional<double> t1;
    std::optional<double> t2;
};

inline ZoneThresholds zone_thresholds(const Scenario& scenario, double D) {
    if (scenario.n_y() != 1)
        throw std::invalid_argument("zone thresholds require exactly one attached species");
    if (!(D > 0.0)) throw std::invalid_argument("dilution rate must be positive");
    Scenario sc = normalize(scenario);
    sc.D = D;

    ZoneThresholds zt;
    zt.t1 = invasion_threshold_y(sc.c_species[0], D);

    double s_f = std::numeric_limits<double>::infinity();
    for (const auto& sp : sc.m_species)
        if (auto v = subsistence_x(sp, D)) s_f = std::min(s_f, *v);
    for (const auto& sp : sc.q_species)
        if (auto v = subsistence_z(sp, D)) s_f = std::min(s_f, *v);
    if (std::isfinite(s_f))
        zt.t2 = s_f + attached_capacity(sc.c_species[0], D, s_f);
    return zt;
}

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;
    bool log = false;
};

// Evenly spaced (or log-spaced) grid with exact endpoints.
inline std::vector<double> make_grid(const GridSpec& g) {
    if (g.n < 1) throw std::invalid_argument("grid needs at least one point");
    if (!(g.lo > 0.0)) throw std::invalid_argument("grid values must be positive");
    if (!(g.hi >= g.lo)) throw std::invalid_argument("grid bounds must be ordered");
    if (g.n == 1) return {g.lo};
    std::vector<double> pts(g.n);
    if (g.log) {
        double llo = std::log(g.lo), lhi = std::log(g.hi);
        for (int i = 0; i < g.n; ++i)
            pts[i] = std::exp(llo + (lhi - llo) * i / (g.n - 1));
    } else {
        for (int i = 0; i < g.n; ++i) pts[i] = g.lo + (g.hi - g.lo) * i / (g.n - 1);
    }
    pts.front() = g.lo;
    pts.back() = g.hi;
    return pts;
}

struct OutcomeCell {
    double D = 0.0;
    double s_in = 0.0;
    double s_star = 0.0;
    WinnerClass winner = WinnerClass::None;
    int zone = 0;  // 1 washout, 2 attached only, 3 free survives; 0 when labels do not apply
    std::vector<std::string> survivors;
    bool degenerate = false;          // distinctness assumptions break at this cell
    std::vector<std::string> flags;   // violation codes or per-cell error notes
};

struct OutcomeMap {
    std::vector<double> d_grid;
    std::vector<double> s_in_grid;
    std::vector<OutcomeCell> cells;  // row-major, index = i_d * s_in_grid.size() + i_s
    bool zones_apply = false;

    const OutcomeCell& at(std::size_t i_d, std::size_t i_s) const {
        return cells[i_d * s_in_grid.size() + i_s];
    }
};

namespace detail {

inline void fill_cell(const Scenario& base, double D, double s_in, bool zones_apply,
                      double tol, OutcomeCell& cell) {
    cell.D = D;
    cell.s_in = s_in;
    Scenario sc = base;
    sc.D = D;
    sc.s_in = s_in;

    ValidationReport vr = validate_scenario(sc, tol);
    for (const auto& v : vr.violations) {
        std::string ids;
        for (const auto& id : v.species) {
            if (!ids.empty()) ids += ",";
            ids += id;
        }
        cell.flags.push_back(v.code + ":" + ids);
    }
    cell.degenerate = !vr.violations.empty();

    Prediction p = predict_outcome(sc, tol);
    cell.s_star = p.s_star;
    cell.winner = p.winner;
    cell.survivors = p.survivors;

    // grid values landing on a tie between family minima, or on the washout
    // edge, make the outcome rule ill-conditioned at this cell
    std::vector<double> mins;
    for (double v : {p.family.s_x, p.family.s_y, p.family.s_z})
        if (v < s_in) mins.push_back(v);
    for (std::size_t a = 0; a < mins.size(); ++a) {
        for (std::size_t b = a + 1; b < mins.size(); ++b)
            if (std::abs(mins[a] - mins[b]) <= tol) cell.degenerate = true;
        if (s_in - mins[a] <= tol) cell.degenerate = true;
    }

    if (zones_apply) {
        switch (p.winner) {
            case WinnerClass::None: cell.zone = 1; break;
            case WinnerClass::Y: cell.zone = 2; break;
            default: cell.zone = 3; break;
        }
    }
}

inline int sweep_thread_count(int requested, std::size_t n_cells) {
    int t = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    if (const char* env = std::getenv("CHEMOSTAT_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) t = std::min(t, cap);
    }
    return static_cast<int>(std::min<std::size_t>(t, n_cells));
}

}  // namespace detail

// Evaluates the outcome rule on every grid cell. Cells are pure functions of
// (scenario, D, s_in); the striped parallel schedule writes each result into
// its own slot, so output is identical for any thread count.
inline OutcomeMap outcome_map(const Scenario& scenario, std::vector<double> d_grid,
                              std::vector<double> s_in_grid, int threads = 0,
                              double tol = kDefaultTolDistinct) {
    if (d_grid.empty() || s_in_grid.empty())
        throw std::invalid_argument("sweep grids must be nonempty");
    for (double v : d_grid)
        if (!(v > 0.0)) throw std::invalid_argument("dilution grid must be positive");
    for (double v : s_in_grid)
        if (!(v > 0.0)) throw std::invalid_argument("feed grid must be positive");
    if (!std::is_sorted(d_grid.begin(), d_grid.end()) ||
        !std::is_sorted(s_in_grid.begin(), s_in_grid.end()))
        throw std::invalid_argument("sweep grids must be sorted");

    Scenario base = normalize(scenario);
    OutcomeMap map;
    map.d_grid = std::move(d_grid);
    map.s_in_grid = std::move(s_in_grid);
    map.zones_apply = base.n_y() == 1 && (base.n_x() + base.n_z()) >= 1;
    const std::size_t n_cells = map.d_grid.size() * map.s_in_grid.size();
    map.cells.resize(n_cells);

    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t c = first; c < n_cells; c += stride) {
            std::size_t i_d = c / map.s_in_grid.size();
            std::size_t i_s = c % map.s_in_grid.size();
            OutcomeCell& cell = map.cells[c];
            try {
                detail::fill_cell(base, map.d_grid[i_d], map.s_in_grid[i_s],
                                  map.zones_apply, tol, cell);
            } catch (const std::exception& e) {
                cell.D = map.d_grid[i_d];
                cell.s_in = map.s_in_grid[i_s];
                cell.degenerate = true;
                cell.flags.push_back(std::string("error:") + e.what());
            }
        }
    };

    int n_threads = detail::sweep_thread_count(threads, n_cells);
    if (n_threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int w = 0; w < n_threads; ++w)
            pool.emplace_back(work, static_cast<std::size_t>(w),
                              static_cast<std::size_t>(n_threads));
        for (auto& th : pool) th.join();
    }
    return map;
}

}  // namespace chemostat
