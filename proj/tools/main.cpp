#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kslab/analysis.hpp"
#include "kslab/core.hpp"
#include "kslab/csv.hpp"
#include "kslab/evolution.hpp"
#include "kslab/steady.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace kslab;

namespace {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

template <typename T>
T require(const json& j, const std::string& field) {
    if (!j.contains(field)) throw ConfigError("missing required config field: " + field);
    try {
        return j.at(field).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config field has wrong type: " + field);
    }
}

template <typename T>
T value_or(const json& j, const std::string& field, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config field has wrong type: " + field);
    }
}

StepControls controls_from(const json& cfg) {
    StepControls c;
    c.dt_init = value_or(cfg, "dt_init", c.dt_init);
    c.dt_min = value_or(cfg, "dt_min", c.dt_min);
    c.dt_max = value_or(cfg, "dt_max", c.dt_max);
    c.cfl = value_or(cfg, "cfl", c.cfl);
    c.T_end = value_or(cfg, "T_end", c.T_end);
    c.u_blowup = value_or(cfg, "u_blowup", 0.0);
    c.tol_newton = value_or(cfg, "tol_newton", c.tol_newton);
    c.validate();
    return c;
}

std::string family_from(const json& cfg) {
    const std::string profile = require<std::string>(cfg, "profile");
    if (profile == "gaussian") {
        const double sigma = value_or(cfg, "sigma", 0.1);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", sigma);
        return "gaussian" + std::string(buf);
    }
    return profile;
}

json result_to_json(const ClassificationResult& res) {
    json j;
    j["outcome"] = to_string(res.outcome);
    j["t_star"] = res.t_star;
    j["sup_u"] = res.sup_u;
    j["t_final"] = res.t_final;
    j["steps"] = res.steps;
    j["invariants"] = {
        {"mass_bit_stable", res.mass_bit_stable},
        {"worst_monotonicity", res.worst_monotonicity},
        {"worst_z_low", res.worst_z_low},
        {"worst_z_high_excess", res.worst_z_high_excess},
        {"worst_z_monotonicity", res.worst_z_monotonicity},
    };
    return j;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

int cmd_evolve(const json& cfg, const fs::path& outdir, bool verbose) {
    Timer timer;
    Params params{require<double>(cfg, "R"), value_or(cfg, "k", 0.0), 2};
    params.validate();
    const double m = require<double>(cfg, "m");
    const int N = value_or(cfg, "N", 2048);
    const std::string family = family_from(cfg);
    StepControls controls = controls_from(cfg);
    const int snapshots = value_or(cfg, "snapshots", 33);
    const int diag_samples = value_or(cfg, "diag_samples", 200);

    MassGrid grid = build_mass_grid(params.R, N);
    RadialProfile u0 = make_profile(family, m, params, grid);
    std::vector<double> w0 = profile_to_w0(u0, grid);
    w0.back() = m / (2.0 * M_PI);

    Trajectory traj = evolve(w0, params, grid, controls, snapshots, diag_samples);

    {
        CsvWriter csv((outdir / "trajectory.csv").string(), {"t", "s", "w", "z"});
        for (const WState& st : traj.snapshots)
            for (std::size_t i = 0; i < st.w.size(); ++i)
                csv.row({st.t, grid.s[i], st.w[i], st.z[i]});
    }
    {
        CsvWriter csv((outdir / "diagnostics.csv").string(),
                      {"t", "sup_u", "F", "D", "y2max", "dt"});
        for (const DiagnosticsRow& d : traj.result.diagnostics)
            csv.row({d.t, d.sup_u, d.F, d.D, d.y2max, d.dt});
    }
    json result = result_to_json(traj.result);
    result["meta"] = {{"N", N},
                      {"family", family},
                      {"m", m},
                      {"R", params.R},
                      {"k", params.k},
                      {"T_end", controls.T_end},
                      {"cfl", controls.cfl},
                      {"dt_min", controls.dt_min},
                      {"u_blowup", controls.u_blowup > 0.0
                                       ? controls.u_blowup
                                       : default_blowup_threshold(m, params.R, N)},
                      {"wall_time_s", timer.seconds()}};
    write_json(outdir / "result.json", result);
    if (verbose)
        std::cout << "evolve: " << to_string(traj.result.outcome) << " after "
                  << traj.result.steps << " steps, " << timer.seconds() << " s\n";
    return 0;
}

std::vector<double> a_grid_from(const json& cfg) {
    if (cfg.contains("a_grid")) return require<std::vector<double>>(cfg, "a_grid");
    const double a_min = value_or(cfg, "a_min", 0.05);
    const double a_max = value_or(cfg, "a_max", 20.0);
    const int count = value_or(cfg, "a_count", 72);
    const std::string spacing = value_or<std::string>(cfg, "a_spacing", "log");
    if (!(a_min > 0.0 && a_max > a_min && count >= 2))
        throw ConfigError("invalid a-grid specification");
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        grid[i] = spacing == "log" ? a_min * std::pow(a_max / a_min, t)
                                   : a_min + t * (a_max - a_min);
    }
    return grid;
}

int cmd_branch(const json& cfg, const fs::path& outdir, int jobs, bool verbose) {
    Timer timer;
    const double k = value_or(cfg, "k", 1.0);
    std::vector<double> radii;
    if (!cfg.contains("R")) throw ConfigError("missing required config field: R");
    if (cfg.at("R").is_array())
        radii = cfg.at("R").get<std::vector<double>>();
    else
        radii.push_back(cfg.at("R").get<double>());
    const int M = value_or(cfg, "M", 8192);
    const std::vector<double> a_grid = a_grid_from(cfg);
    const std::vector<double> dumps = value_or(cfg, "profile_dumps", std::vector<double>{});

    json summary = json::array();
    for (double R : radii) {
        Params params{R, k, 2};
        Branch branch = branch_trace(params, a_grid, M, jobs);
        char name[64];
        std::snprintf(name, sizeof(name), "branch_R%g.csv", R);
        CsvWriter csv((outdir / name).string(), {"a", "lambda", "m", "vmax", "bound_slack"});
        bool bound_ok = true;
        for (const BranchPoint& p : branch.points) {
            MassBoundCheck bc = check_mass_bound(p, params);
            bound_ok = bound_ok && bc.holds;
            csv.row({p.a, p.lambda, p.m, p.vmax, bc.slack});
        }
        BranchExtremum mm = m_max(branch, M);
        BranchExtremum lm = lambda_max(branch, M);
        json entry = {
            {"R", R},
            {"k", k},
            {"m_max", {{"m", mm.m}, {"a", mm.a}, {"lambda", mm.lambda}}},
            {"lambda_max", {{"lambda", lm.lambda}, {"a", lm.a}, {"m", lm.m}}},
            {"m_max_minus_8pi", mm.m - 8.0 * M_PI},
            {"endpoints",
             {{"a_first", branch.points.front().a},
              {"m_first", branch.points.front().m},
              {"a_last", branch.points.back().a},
              {"m_last", branch.points.back().m}}},
            {"mass_bound_ok", bound_ok},
            {"failed_a", branch.failed_a},
        };
        summary.push_back(entry);

        for (double a : dumps) {
            BranchPoint p = solve_lambda(a, params, M);
            std::snprintf(name, sizeof(name), "profile_R%g_a%g.csv", R, a);
            CsvWriter pcsv((outdir / name).string(), {"r", "v", "u"});
            for (std::size_t i = 0; i < p.profile.r.size(); ++i)
                pcsv.row({p.profile.r[i], p.profile.f[i],
                          p.lambda * std::exp(p.profile.f[i])});
        }
        if (verbose)
            std::cout << "branch R=" << R << ": m_max=" << mm.m
                      << " lambda_max=" << lm.lambda << "\n";
    }
    json out = {{"branches", summary},
                {"meta", {{"M", M}, {"a_count", a_grid.size()}, {"wall_time_s", timer.seconds()}}}};
    write_json(outdir / "summary.json", out);
    return 0;
}

int cmd_sweep(const json& cfg, const fs::path& outdir, int jobs, bool verbose) {
    Timer timer;
    Params params{require<double>(cfg, "R"), value_or(cfg, "k", 0.0), 2};
    params.validate();
    const std::vector<std::string> families =
        require<std::vector<std::string>>(cfg, "families");
    std::vector<double> m_list;
    if (cfg.contains("m_list")) {
        m_list = require<std::vector<double>>(cfg, "m_list");
    } else {
        const double lo = value_or(cfg, "m_min", 0.5 * 8.0 * M_PI);
        const double hi = value_or(cfg, "m_max", 1.5 * 8.0 * M_PI);
        const int count = value_or(cfg, "m_count", 9);
        for (int i = 0; i < count; ++i)
            m_list.push_back(lo + (hi - lo) * i / std::max(1, count - 1));
    }
    const int N = value_or(cfg, "N", 1024);
    const int refine = value_or(cfg, "refine_rounds", 8);
    StepControls controls = controls_from(cfg);

    MassGrid grid = build_mass_grid(params.R, N);
    SweepResult sweep = classify_mass_sweep(params, families, m_list, grid, controls,
                                            refine, jobs);

    CsvWriter csv((outdir / "sweep.csv").string(),
                  {"family", "m", "outcome", "t_star", "sup_u", "F_final"});
    for (const SweepRow& r : sweep.rows)
        csv.row_mixed({r.family, CsvWriter::num(r.m), to_string(r.outcome),
                       CsvWriter::num(r.t_star), CsvWriter::num(r.sup_u),
                       CsvWriter::num(r.F_final)});

    json brackets = json::array();
    for (const SweepBracket& b : sweep.brackets) {
        json entry = {{"family", b.family},
                      {"largest_all_global", b.largest_all_global}};
        if (std::isfinite(b.smallest_all_blowup))
            entry["smallest_all_blowup"] = b.smallest_all_blowup;
        else
            entry["smallest_all_blowup"] = nullptr;
        brackets.push_back(entry);
    }
    json out = {{"brackets", brackets},
                {"meta",
                 {{"N", N},
                  {"refine_rounds", refine},
                  {"T_end", controls.T_end},
                  {"wall_time_s", timer.seconds()}}}};
    write_json(outdir / "brackets.json", out);
    if (verbose) std::cout << "sweep: " << sweep.rows.size() << " rows\n";
    return 0;
}

int cmd_supersolution(const json& cfg, const fs::path& outdir, bool verbose) {
    Timer timer;
    Params params{require<double>(cfg, "R"), require<double>(cfg, "k"), 2};
    params.validate();
    const int N = value_or(cfg, "N", 4096);
    MassGrid grid = build_mass_grid(params.R, N);

    double c1;
    bool c1_defaulted = false;
    if (cfg.contains("c1")) {
        c1 = require<double>(cfg, "c1");
    } else {
        c1 = default_c1(params, value_or(cfg, "green_M", 4096),
                        value_or(cfg, "calib_N", 1024), value_or(cfg, "calib_T", 10.0));
        c1_defaulted = true;
    }

    Supersolution sup = construct_supersolution(params, c1, grid);
    const double residual = verify_supersolution_inequality(sup, sup.c2, grid);

    {
        std::ofstream out(outdir / "supersolution.csv");
        out << "# s0=" << CsvWriter::num(sup.s0) << "\n# b=" << CsvWriter::num(sup.b)
            << "\n# epsilon=" << CsvWriter::num(sup.epsilon)
            << "\n# c1=" << CsvWriter::num(sup.c1) << "\n# c2=" << CsvWriter::num(sup.c2)
            << "\n# mbar=" << CsvWriter::num(sup.mbar) << "\n";
        out << "s,wbar\n";
        for (std::size_t i = 0; i < sup.wbar.size(); ++i)
            out << CsvWriter::num(grid.s[i]) << ',' << CsvWriter::num(sup.wbar[i]) << '\n';
    }
    json constants = {{"s0", sup.s0},
                      {"b", sup.b},
                      {"epsilon", sup.epsilon},
                      {"c1", sup.c1},
                      {"c2", sup.c2},
                      {"mbar", sup.mbar},
                      {"mbar_minus_8pi", 2.0 * M_PI * sup.epsilon},
                      {"c1_defaulted", c1_defaulted},
                      {"matching_residual", sup.residual_matching}};
    write_json(outdir / "constants.json", constants);

    // comparison run: data pinched between the chord at mass 8 pi and wbar
    const double m = 8.0 * M_PI;
    const int cmpN = value_or(cfg, "comparison_N", 1024);
    MassGrid cgrid = build_mass_grid(params.R, cmpN);
    Supersolution csup = construct_supersolution(params, c1, cgrid);
    std::vector<double> w0(cgrid.nodes());
    for (std::size_t i = 0; i < w0.size(); ++i) w0[i] = 4.0 * cgrid.s[i] / cgrid.L;
    w0.back() = m / (2.0 * M_PI);
    StepControls controls = controls_from(cfg);
    controls.T_end = value_or(cfg, "comparison_T", 10.0);
    Trajectory traj = evolve(w0, params, cgrid, controls);
    OrderCheck order = compare_order(traj.snapshots, nullptr, &csup.wbar, m, cgrid);

    json verification = {{"max_residual", residual},
                         {"residual_ok", residual <= 1e-6},
                         {"mbar_exceeds_8pi", sup.epsilon > 0.0},
                         {"comparison",
                          {{"ordered", order.ordered},
                           {"worst_gap", order.worst_gap},
                           {"outcome", to_string(traj.result.outcome)},
                           {"T", controls.T_end},
                           {"N", cmpN}}},
                         {"meta", {{"N", N}, {"wall_time_s", timer.seconds()}}}};
    write_json(outdir / "verification.json", verification);
    if (verbose)
        std::cout << "supersolution: epsilon=" << sup.epsilon << " residual=" << residual
                  << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the radial Keller-Segel system on a disk"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    int jobs = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker pool size (0 = hardware)");
    app.add_flag("--verbose", verbose, "progress output");

    auto* evolve_cmd = app.add_subcommand("evolve", "integrate one initial datum");
    auto* branch_cmd = app.add_subcommand("branch", "trace steady-state branches");
    auto* sweep_cmd = app.add_subcommand("sweep", "classify a mass sweep");
    auto* super_cmd = app.add_subcommand("supersolution", "construct and verify the barrier");

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(config_path);
        fs::create_directories(out_dir);
        const fs::path outdir(out_dir);
        if (evolve_cmd->parsed()) return cmd_evolve(cfg, outdir, verbose);
        if (branch_cmd->parsed()) return cmd_branch(cfg, outdir, jobs, verbose);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, outdir, jobs, verbose);
        if (super_cmd->parsed()) return cmd_supersolution(cfg, outdir, verbose);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConstructionError& e) {
        std::cerr << "construction infeasible: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
