// chemostat-compete: validate competition scenarios, enumerate equilibria,
// simulate trajectories, and sweep (D, s_in) outcome maps.
//
// Exit codes: 0 success, 1 scenario hypothesis violation, 2 malformed input
// (JSON, grids, arguments), 3 marginal eigenvalues in stability analysis,
// 4 integrator stiffness failure (partial outputs written).
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chemostat/equilibria.hpp"
#include "chemostat/integrate.hpp"
#include "chemostat/report.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/scenario.hpp"
#include "chemostat/scenario_io.hpp"
#include "chemostat/stability.hpp"
#include "chemostat/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chemostat;

namespace {

struct Options {
    std::string scenario_path;
    std::string out_dir = ".";
    std::string preset;
    std::string init_path;
    std::string grid_d;
    std::string grid_sin;
    double t_max = 200.0;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double conv_tol = 1e-3;
    std::uint64_t seed = 1;
    bool all_subsets = false;
    bool cells_json = false;
};

Scenario preset_scenario(const std::string& name) {
    if (name == "discussion-figure") {
        // one species of each class; the map over s_in crosses all zones
        Scenario sc;
        sc.D = 0.5;
        sc.s_in = 3.0;
        sc.m_species.push_back({"M", {1.0, 2.0}, 1.0});
        sc.c_species.push_back({"C", {1.0, 1.0}, 1.0});
        QSpecies q;
        q.id = "Q";
        q.uptake = {1.0, 1.0};
        q.growth = DroopGrowth{1.0, 0.5};
        sc.q_species.push_back(q);
        return sc;
    }
    throw std::runtime_error("unknown preset '" + name + "' (available: discussion-figure)");
}

GridSpec parse_grid(const std::string& flag, const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 4)
        throw std::runtime_error(flag + ": expected min,max,n,lin|log");
    GridSpec g;
    try {
        g.lo = std::stod(parts[0]);
        g.hi = std::stod(parts[1]);
        g.n = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw std::runtime_error(flag + ": min,max must be numbers and n an integer");
    }
    if (parts[3] == "lin")
        g.log = false;
    else if (parts[3] == "log")
        g.log = true;
    else
        throw std::runtime_error(flag + ": spacing must be 'lin' or 'log'");
    return g;
}

std::string out_file(const Options& opt, const std::string& name) {
    return (fs::path(opt.out_dir) / name).string();
}

State random_state(const Scenario& sc, std::uint64_t seed) {
    SplitMix64 rng(seed);
    State st;
    st.s = sc.s_in;
    for (int i = 0; i < sc.n_x(); ++i) st.x.push_back(rng.log_uniform(1e-3, 1.0));
    for (int j = 0; j < sc.n_y(); ++j) st.y.push_back(rng.log_uniform(1e-3, 1.0));
    for (int k = 0; k < sc.n_z(); ++k) st.z.push_back(rng.log_uniform(1e-3, 1.0));
    for (int k = 0; k < sc.n_z(); ++k) {
        double lo = min_quota(sc.q_species[k].growth);
        double hi = quota_ceiling(sc.q_species[k]);
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        st.q.push_back(lo + u * (hi - lo));
    }
    return st;
}

int run_equilibria(const Scenario& sc, const Options& opt) {
    EnumerateOptions eo;
    eo.all_subsets = opt.all_subsets;
    std::vector<Equilibrium> eqs = enumerate_equilibria(sc, eo);
    Prediction pred = predict_outcome(sc);

    bool any_marginal = false;
    json arr = json::array();
    for (const auto& eq : eqs) {
        json entry = equilibrium_to_json(eq);
        if (eq.in_positive_orthant) {
            StabilityReport rep = classify_equilibrium(sc, eq);
            entry["stability"] = stability_to_json(eq, rep);
            if (rep.classification == StabilityClass::Marginal) any_marginal = true;
        } else {
            entry["stability"] = nullptr;
        }
        arr.push_back(entry);
    }
    write_json(out_file(opt, "equilibria.json"), arr);
    write_json(out_file(opt, "prediction.json"), prediction_to_json(pred));
    if (any_marginal) {
        std::fprintf(stderr,
                     "warning: marginal eigenvalues; scenario is near a degenerate boundary\n");
        return 3;
    }
    return 0;
}

int run_simulate(const Scenario& scenario, const Options& opt) {
    Scenario sc = normalize(scenario);
    json conv;
    State init;
    if (!opt.init_path.empty()) {
        init = load_state(opt.init_path, sc);
        conv["seed"] = nullptr;
        conv["init"] = opt.init_path;
    } else {
        init = random_state(sc, opt.seed);
        conv["seed"] = opt.seed;
    }

    IntegratorOptions io;
    io.rel_tol = opt.rel_tol;
    io.abs_tol = opt.abs_tol;
    io.t_max = opt.t_max;
    Trajectory traj = integrate(sc, init, io);
    write_trajectory_csv(out_file(opt, "trajectory.csv"), sc, traj);
    write_monitors_csv(out_file(opt, "monitors.csv"), traj);

    Prediction pred = predict_outcome(sc);
    std::vector<Equilibrium> eqs = enumerate_equilibria(sc);

    // nearest enumerated equilibrium to the terminal state
    const Equilibrium* nearest = nullptr;
    double best = 0.0;
    std::vector<double> endv = flatten(traj.states.back());
    for (const auto& eq : eqs) {
        if (!eq.in_positive_orthant) continue;
        std::vector<double> tv = flatten(eq.state);
        double d = 0.0;
        for (std::size_t c = 0; c < endv.size(); ++c)
            d = std::max(d, std::abs(endv[c] - tv[c]));
        if (!nearest || d < best) {
            nearest = &eq;
            best = d;
        }
    }

    const double window = 0.05 * opt.t_max;
    bool match = false;
    if (nearest) {
        ConvergenceResult cr = detect_convergence(sc, traj, *nearest, opt.conv_tol, window);
        conv["converged"] = cr.converged;
        conv["t_converged"] = cr.t_converged ? json(*cr.t_converged) : json(nullptr);
        conv["terminal_distance"] = cr.terminal_distance;
        conv["slaved_consistent"] = cr.slaved_consistent;
        if (cr.converged) {
            conv["reached"] = {{"class", to_string(nearest->cls)},
                               {"s", nearest->state.s},
                               {"survivors", nearest->survivors}};
            match = nearest->cls == pred.e_star.cls &&
                    nearest->survivors == pred.e_star.survivors;
        } else {
            conv["reached"] = nullptr;
        }
    } else {
        conv["converged"] = false;
        conv["t_converged"] = nullptr;
        conv["terminal_distance"] = nullptr;
        conv["slaved_consistent"] = false;
        conv["reached"] = nullptr;
    }
    conv["match"] = match;
    conv["prediction"] = {{"class", to_string(pred.e_star.cls)},
                          {"s_star", pred.s_star},
                          {"s_star_class", to_string(pred.winner)},
                          {"survivors", pred.e_star.survivors},
                          {"washout", pred.washout}};
    conv["tol"] = opt.conv_tol;
    conv["window"] = window;
    conv["t_max"] = opt.t_max;
    conv["rel_tol"] = opt.rel_tol;
    conv["abs_tol"] = opt.abs_tol;
    conv["stiff_failure"] = traj.stiff_failure;
    conv["t_reached"] = traj.t_reached;
    conv["stats"] = {{"n_accepted", traj.n_accepted},
                     {"n_rejected", traj.n_rejected},
                     {"n_rhs", traj.n_rhs}};

    BoundsReport bounds = check_bounds(sc, traj);
    conv["bounds_ok"] = bounds.ok;
    if (!bounds.ok) {
        json breaches = json::array();
        for (const auto& b : bounds.breaches)
            breaches.push_back({{"what", b.what}, {"t", b.t}, {"value", b.value},
                                {"limit", b.limit}});
        conv["bound_breaches"] = breaches;
    }

    write_json(out_file(opt, "convergence.json"), conv);
    if (traj.stiff_failure) {
        std::fprintf(stderr, "error: step size underflow at t=%g; partial outputs written\n",
                     traj.t_reached);
        return 4;
    }
    return 0;
}

int run_sweep(const Scenario& sc, const Options& opt) {
    GridSpec gd{sc.D, sc.D, 1, false};
    GridSpec gs{sc.s_in, sc.s_in, 1, false};
    if (!opt.grid_d.empty()) gd = parse_grid("--grid-d", opt.grid_d);
    if (!opt.grid_sin.empty()) gs = parse_grid("--grid-sin", opt.grid_sin);
    std::vector<double> d_grid = make_grid(gd);
    std::vector<double> s_grid = make_grid(gs);

    OutcomeMap map = outcome_map(sc, d_grid, s_grid);
    write_sweep_csv(out_file(opt, "sweep.csv"), map);

    if (map.zones_apply) {
        json th = json::array();
        for (double D : map.d_grid) {
            ZoneThresholds zt = zone_thresholds(sc, D);
            th.push_back({{"D", D},
                          {"t1", zt.t1 ? json(*zt.t1) : json(nullptr)},
                          {"t2", zt.t2 ? json(*zt.t2) : json(nullptr)}});
        }
        write_json(out_file(opt, "thresholds.json"), th);
    }

    if (opt.cells_json) {
        json cells = json::array();
        for (const auto& cell : map.cells) {
            json cj = cell_to_json(cell);
            Scenario cs = sc;
            cs.D = cell.D;
            cs.s_in = cell.s_in;
            json eqj = json::array();
            for (const auto& eq : enumerate_equilibria(cs)) eqj.push_back(equilibrium_to_json(eq));
            cj["equilibria"] = eqj;
            cells.push_back(cj);
        }
        write_json(out_file(opt, "cells.json"), cells);
    }
    return 0;
}

int run(const std::string& cmd, const Options& opt) {
    fs::create_directories(opt.out_dir);

    Scenario sc;
    if (!opt.preset.empty()) {
        sc = preset_scenario(opt.preset);
        save_scenario(out_file(opt, "scenario.json"), sc);
    } else if (!opt.scenario_path.empty()) {
        sc = load_scenario(opt.scenario_path);
    } else {
        throw std::runtime_error("either --scenario or --preset is required");
    }

    ValidationReport vr = validate_scenario(sc);
    write_json(out_file(opt, "validation.json"), validation_to_json(vr));
    if (!vr.ok) {
        for (const auto& v : vr.violations)
            std::fprintf(stderr, "violation %s (%s): %s\n", v.code.c_str(),
                         join_ids(v.species).c_str(), v.detail.c_str());
        return 1;
    }

    if (cmd == "validate") return 0;
    if (cmd == "equilibria") return run_equilibria(sc, opt);
    if (cmd == "simulate") return run_simulate(sc, opt);
    if (cmd == "sweep") return run_sweep(sc, opt);
    throw std::runtime_error("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chemostat competition: validation, equilibria, simulation, outcome maps"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* cmd) {
        cmd->add_option("--scenario", opt.scenario_path, "scenario JSON file");
        cmd->add_option("--out", opt.out_dir, "output directory (default .)");
        cmd->add_option("--preset", opt.preset, "built-in scenario (discussion-figure)");
    };

    CLI::App* c_validate = app.add_subcommand("validate", "check scenario hypotheses");
    add_common(c_validate);

    CLI::App* c_eq = app.add_subcommand("equilibria", "enumerate equilibria with stability");
    add_common(c_eq);
    c_eq->add_flag("--all-subsets", opt.all_subsets,
                   "emit attached-group equilibria for every guild subset");

    CLI::App* c_sim = app.add_subcommand("simulate", "integrate and check convergence");
    add_common(c_sim);
    c_sim->add_option("--t-max", opt.t_max, "integration horizon (default 200)");
    c_sim->add_option("--rel-tol", opt.rel_tol, "relative tolerance (default 1e-8)");
    c_sim->add_option("--abs-tol", opt.abs_tol, "absolute tolerance (default 1e-10)");
    c_sim->add_option("--conv-tol", opt.conv_tol, "convergence tolerance (default 1e-3)");
    c_sim->add_option("--seed", opt.seed, "seed for random initial conditions (default 1)");
    c_sim->add_option("--init", opt.init_path,
                      "initial state JSON (bare state, prediction, or equilibrium entry)");

    CLI::App* c_sweep = app.add_subcommand("sweep", "outcome map over (D, s_in)");
    add_common(c_sweep);
    c_sweep->add_option("--grid-d", opt.grid_d, "dilution grid: min,max,n,lin|log");
    c_sweep->add_option("--grid-sin", opt.grid_sin, "feed grid: min,max,n,lin|log");
    c_sweep->add_flag("--cells-json", opt.cells_json, "also write per-cell equilibria JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version keep 0, usage errors map to 2
    }

    try {
        return run(app.get_subcommands().front()->get_name(), opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
