// Scenario and state JSON: strict schema, helpful positions on bad input.
//
// Top level: {D, s_in, m_species[], c_species[], q_species[]}, each species
// {id, params:{...}}. Unknown keys are rejected with their path so a typo in
// a rate constant cannot silently fall back to a default. Species arrays may
// be omitted (empty roster for that class).
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemostat/scenario.hpp"

namespace chemostat {

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double require_number(const nlohmann::json& j, const std::string& key,
                             const std::string& path) {
    if (!j.contains(key))
        throw std::invalid_argument(path + ": missing required key '" + key + "'");
    if (!j.at(key).is_number())
        throw std::invalid_argument(path + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

inline double optional_number(const nlohmann::json& j, const std::string& key,
                              const std::string& path, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw std::invalid_argument(path + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

inline void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& allowed,
                           const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw std::invalid_argument(path + ": unknown key '" + it.key() + "'");
    }
}

inline std::string species_id(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw std::invalid_argument(path + ": expected an object");
    reject_unknown(j, {"id", "params"}, path);
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty())
        throw std::invalid_argument(path + ": 'id' must be a nonempty string");
    if (!j.contains("params") || !j.at("params").is_object())
        throw std::invalid_argument(path + ": 'params' must be an object");
    return j.at("id").get<std::string>();
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("$: expected a JSON object");
    detail::reject_unknown(j, {"D", "s_in", "m_species", "c_species", "q_species"}, "$");

    Scenario sc;
    sc.D = detail::require_number(j, "D", "$");
    sc.s_in = detail::require_number(j, "s_in", "$");

    auto array_at = [&j](const std::string& key) -> nlohmann::json {
        if (!j.contains(key)) return nlohmann::json::array();
        if (!j.at(key).is_array())
            throw std::invalid_argument("$." + key + ": expected an array");
        return j.at(key);
    };

    int idx = 0;
    for (const auto& e : array_at("m_species")) {
        std::string path = "$.m_species[" + std::to_string(idx++) + "]";
        MSpecies sp;
        sp.id = detail::species_id(e, path);
        const auto& p = e.at("params");
        detail::reject_unknown(p, {"alpha_max", "K_s", "yield_a"}, path + ".params");
        sp.growth.alpha_max = detail::require_number(p, "alpha_max", path + ".params");
        sp.growth.K_s = detail::require_number(p, "K_s", path + ".params");
        sp.yield_a = detail::optional_number(p, "yield_a", path + ".params", 1.0);
        sc.m_species.push_back(sp);
    }
    idx = 0;
    for (const auto& e : array_at("c_species")) {
        std::string path = "$.c_species[" + std::to_string(idx++) + "]";
        CSpecies sp;
        sp.id = detail::species_id(e, path);
        const auto& p = e.at("params");
        detail::reject_unknown(p, {"beta_max", "K_s", "yield_b"}, path + ".params");
        sp.growth.beta_max = detail::require_number(p, "beta_max", path + ".params");
        sp.growth.K_s = detail::require_number(p, "K_s", path + ".params");
        sp.yield_b = detail::optional_number(p, "yield_b", path + ".params", 1.0);
        sc.c_species.push_back(sp);
    }
    idx = 0;
    for (const auto& e : array_at("q_species")) {
        std::string path = "$.q_species[" + std::to_string(idx++) + "]";
        QSpecies sp;
        sp.id = detail::species_id(e, path);
        const auto& p = e.at("params");
        detail::reject_unknown(p, {"rho_max", "K_s", "gamma_bar", "Q0", "K_q"}, path + ".params");
        sp.uptake.rho_max = detail::require_number(p, "rho_max", path + ".params");
        sp.uptake.K_s = detail::require_number(p, "K_s", path + ".params");
        double gbar = detail::require_number(p, "gamma_bar", path + ".params");
        double q0 = detail::require_number(p, "Q0", path + ".params");
        if (p.contains("K_q")) {
            CaperonMeyerGrowth g;
            g.gamma_bar = gbar;
            g.Q0 = q0;
            g.K_q = detail::require_number(p, "K_q", path + ".params");
            sp.growth = g;
        } else {
            DroopGrowth g;
            g.gamma_bar = gbar;
            g.Q0 = q0;
            sp.growth = g;
        }
        sc.q_species.push_back(sp);
    }

    check_well_formed(sc);
    return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    j["D"] = sc.D;
    j["s_in"] = sc.s_in;
    j["m_species"] = nlohmann::json::array();
    for (const auto& sp : sc.m_species)
        j["m_species"].push_back({{"id", sp.id},
                                  {"params",
                                   {{"alpha_max", sp.growth.alpha_max},
                                    {"K_s", sp.growth.K_s},
                                    {"yield_a", sp.yield_a}}}});
    j["c_species"] = nlohmann::json::array();
    for (const auto& sp : sc.c_species)
        j["c_species"].push_back({{"id", sp.id},
                                  {"params",
                                   {{"beta_max", sp.growth.beta_max},
                                    {"K_s", sp.growth.K_s},
                                    {"yield_b", sp.yield_b}}}});
    j["q_species"] = nlohmann::json::array();
    for (const auto& sp : sc.q_species) {
        nlohmann::json params = {{"rho_max", sp.uptake.rho_max}, {"K_s", sp.uptake.K_s}};
        if (const auto* d = std::get_if<DroopGrowth>(&sp.growth)) {
            params["gamma_bar"] = d->gamma_bar;
            params["Q0"] = d->Q0;
        } else {
            const auto& c = std::get<CaperonMeyerGrowth>(sp.growth);
            params["gamma_bar"] = c.gamma_bar;
            params["Q0"] = c.Q0;
            params["K_q"] = c.K_q;
        }
        j["q_species"].push_back({{"id", sp.id}, {"params", params}});
    }
    return j;
}

// Parses a JSON document, translating byte offsets in parse errors into
// line/column positions for the caller's diagnostics.
inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        throw std::runtime_error(origin + ": " + detail::line_col(text, byte) + ": " +
                                 e.what());
    }
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j = parse_json_text(buf.str(), path);
    try {
        return scenario_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

inline void save_scenario(const std::string& path, const Scenario& sc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    out << scenario_to_json(sc).dump(2) << "\n";
}

inline nlohmann::json state_to_json(const State& st) {
    return {{"s", st.s}, {"x", st.x}, {"y", st.y}, {"z", st.z}, {"q", st.q}};
}

// Reads a state either from a bare {s,x,y,z,q} object or from a wrapper that
// carries one under "state" or "e_star.state" (so a prediction or
// equilibrium report can be fed back in as an initial condition).
inline State state_from_json(const nlohmann::json& doc, const Scenario& sc) {
    const nlohmann::json* j = &doc;
    if (j->is_object() && j->contains("e_star")) j = &j->at("e_star");
    if (j->is_object() && j->contains("state")) j = &j->at("state");
    if (!j->is_object() || !j->contains("s"))
        throw std::invalid_argument("state: expected an object with keys s,x,y,z,q");
    detail::reject_unknown(*j, {"s", "x", "y", "z", "q"}, "state");

    State st;
    if (!j->at("s").is_number()) throw std::invalid_argument("state.s: expected a number");
    st.s = j->at("s").get<double>();
    auto read_vec = [&j](const std::string& key, std::size_t want) {
        std::vector<double> v;
        if (j->contains(key)) {
            if (!j->at(key).is_array())
                throw std::invalid_argument("state." + key + ": expected an array");
            for (const auto& e : j->at(key)) {
                if (!e.is_number())
                    throw std::invalid_argument("state." + key + ": expected numbers");
                v.push_back(e.get<double>());
            }
        }
        if (v.size() != want)
            throw std::invalid_argument("state." + key + ": expected " + std::to_string(want) +
                                        " entries, got " + std::to_string(v.size()));
        return v;
    };
    st.x = read_vec("x", sc.m_species.size());
    st.y = read_vec("y", sc.c_species.size());
    st.z = read_vec("z", sc.q_species.size());
    st.q = read_vec("q", sc.q_species.size());
    return st;
}

inline State load_state(const std::string& path, const Scenario& sc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j = parse_json_text(buf.str(), path);
    try {
        return state_from_json(j, sc);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace chemostat
