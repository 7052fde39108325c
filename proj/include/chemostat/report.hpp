// Report writers: JSON for structured results, CSV for time series and
// grids. CSV numbers use 17 significant digits so values round-trip exactly.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemostat/equilibria.hpp"
#include "chemostat/integrate.hpp"
#include "chemostat/scenario.hpp"
#include "chemostat/scenario_io.hpp"
#include "chemostat/stability.hpp"
#include "chemostat/sweep.hpp"

namespace chemostat {

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    return out;
}

}  // namespace detail

inline nlohmann::json validation_to_json(const ValidationReport& rep) {
    nlohmann::json vios = nlohmann::json::array();
    for (const auto& v : rep.violations)
        vios.push_back({{"code", v.code}, {"species", v.species}, {"detail", v.detail}});
    return {{"ok", rep.ok},           {"washout", rep.washout}, {"n_x", rep.n_x},
            {"n_y", rep.n_y},         {"n_z", rep.n_z},         {"violations", vios}};
}

inline nlohmann::json equilibrium_to_json(const Equilibrium& eq) {
    nlohmann::json flags = nlohmann::json::array();
    if (!eq.in_positive_orthant) flags.push_back("outside-positive-orthant");
    return {{"class", to_string(eq.cls)},
            {"s", eq.state.s},
            {"state", state_to_json(eq.state)},
            {"survivors", eq.survivors},
            {"flags", flags}};
}

inline nlohmann::json stability_to_json(const Equilibrium& eq, const StabilityReport& rep) {
    nlohmann::json eigs = nlohmann::json::array();
    for (const auto& ep : rep.spectrum)
        eigs.push_back({{"re", ep.value.real()}, {"im", ep.value.imag()}, {"source", ep.source}});
    return {{"equilibrium_class", to_string(eq.cls)},
            {"eigenvalues", eigs},
            {"classification", to_string(rep.classification)}};
}

inline nlohmann::json prediction_to_json(const Prediction& p) {
    nlohmann::json j;
    j["s_star"] = p.s_star;
    j["s_star_class"] = to_string(p.winner);
    j["washout"] = p.washout;
    j["survivors"] = p.survivors;
    j["compliant"] = p.compliant;
    j["e_star"] = equilibrium_to_json(p.e_star);
    j["family"] = {{"s_x", p.family.s_x}, {"s_y", p.family.s_y}, {"s_z", p.family.s_z}};
    j["tol_distinct"] = p.tol;
    return j;
}

inline void write_trajectory_csv(const std::string& path, const Scenario& scenario,
                                 const Trajectory& traj) {
    auto out = detail::open_out(path);
    out << "t,s";
    for (const auto& sp : scenario.m_species) out << ",x_" << sp.id;
    for (const auto& sp : scenario.c_species) out << ",y_" << sp.id;
    for (const auto& sp : scenario.q_species) out << ",z_" << sp.id;
    for (const auto& sp : scenario.q_species) out << ",q_" << sp.id;
    out << ",M,L,mass_residual\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const State& st = traj.states[i];
        const MonitorSample& m = traj.monitors[i];
        out << detail::fmt17(traj.times[i]) << ',' << detail::fmt17(st.s);
        for (double v : st.x) out << ',' << detail::fmt17(v);
        for (double v : st.y) out << ',' << detail::fmt17(v);
        for (double v : st.z) out << ',' << detail::fmt17(v);
        for (double v : st.q) out << ',' << detail::fmt17(v);
        out << ',' << detail::fmt17(m.M) << ',' << detail::fmt17(m.L) << ','
            << detail::fmt17(m.mass_residual) << '\n';
    }
}

inline void write_monitors_csv(const std::string& path, const Trajectory& traj) {
    auto out = detail::open_out(path);
    out << "t,M,L,mass_residual,on_surface,q_in_band\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const MonitorSample& m = traj.monitors[i];
        out << detail::fmt17(traj.times[i]) << ',' << detail::fmt17(m.M) << ','
            << detail::fmt17(m.L) << ',' << detail::fmt17(m.mass_residual) << ','
            << (m.on_surface ? 1 : 0) << ',' << (m.q_in_band ? 1 : 0) << '\n';
    }
}

inline std::string join_ids(const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) s += ';';
        s += ids[i];
    }
    return s;
}

inline void write_sweep_csv(const std::string& path, const OutcomeMap& map) {
    auto out = detail::open_out(path);
    out << "D,s_in,s_star,s_star_class,zone,survivors\n";
    for (const auto& cell : map.cells) {
        out << detail::fmt17(cell.D) << ',' << detail::fmt17(cell.s_in) << ','
            << detail::fmt17(cell.s_star) << ',' << to_string(cell.winner) << ',';
        if (map.zones_apply) out << cell.zone;
        out << ',' << join_ids(cell.survivors) << '\n';
    }
}

inline nlohmann::json cell_to_json(const OutcomeCell& cell) {
    return {{"D", cell.D},
            {"s_in", cell.s_in},
            {"s_star", cell.s_star},
            {"s_star_class", to_string(cell.winner)},
            {"zone", cell.zone},
            {"survivors", cell.survivors},
            {"degenerate", cell.degenerate},
            {"flags", cell.flags}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace chemostat
