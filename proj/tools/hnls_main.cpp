// Command-line front end: ground-state, profile, law, simulate, decompose,
// experiment-blowup, experiment-global. Configuration comes from a flat
// key = value file (see README); every subcommand accepts --config, --out
// and --seed. Exit code 0 only when all pass/fail checks pass.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hnls/errors.hpp"
#include "hnls/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

hnls::Config load_config(const std::string& path, long seed) {
    hnls::Config cfg = path.empty() ? hnls::Config::defaults() : hnls::Config::from_file(path);
    if (seed != 0) cfg.set("seed", std::to_string(seed));
    return cfg;
}

void require_out(const std::string& out) {
    if (out.empty()) throw hnls::UsageError("this subcommand needs --out <dir>");
    if (!fs::is_directory(out))
        throw hnls::UsageError("output directory does not exist: " + out);
}

void write_json(const ordered_json& doc, const std::string& out, const std::string& name) {
    if (out.empty()) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream f(fs::path(out) / name);
    f << doc.dump(2) << "\n";
}

int cmd_ground_state(const hnls::Config& cfg, const std::string& out) {
    require_out(out);
    auto grid = hnls::make_radial_grid(static_cast<int>(cfg.integer("dimension")),
                                       cfg.num("radial_extent"),
                                       static_cast<int>(cfg.integer("radial_cells")));
    hnls::GroundStateBundle b = hnls::solve_ground_state(grid, cfg.num("gs_tol"));
    hnls::write_csv(b.Q, (fs::path(out) / "Q.csv").string());
    hnls::write_csv(b.LambdaQ, (fs::path(out) / "LambdaQ.csv").string());
    hnls::write_csv(b.r2Q, (fs::path(out) / "r2Q.csv").string());
    hnls::write_csv(b.rho, (fs::path(out) / "rho.csv").string());
    ordered_json doc;
    doc["N"] = grid->dimension;
    doc["R"] = grid->extent;
    doc["n"] = grid->cells;
    doc["residuals"] = {{"equation", b.equation_residual},
                        {"rho", b.rho_residual},
                        {"shooting_gap", b.shooting_gap}};
    doc["norms"] = {{"mass_sq", b.mass_sq},
                    {"variance_sq", b.variance_sq},
                    {"grad_sq", b.grad_sq}};
    write_json(doc, out, "ground_state.json");
    return 0;
}

int cmd_profile(const hnls::Config& cfg, const std::string& out) {
    require_out(out);
    hnls::PipelineArtifacts art = hnls::build_pipeline(cfg);
    ordered_json doc;
    doc["sigma"] = art.coeffs.sigma;
    doc["alpha"] = art.coeffs.alpha;
    doc["K"] = art.coeffs.truncation;
    ordered_json betas = ordered_json::array(), solv = ordered_json::array();
    for (int j = 0; j <= art.coeffs.truncation; ++j)
        for (int k = 0; j + k <= art.coeffs.truncation; ++k) {
            char name[64];
            std::snprintf(name, sizeof name, "p_plus_%d_%d.csv", j, k);
            hnls::write_csv(art.coeffs.p_plus[j][k], (fs::path(out) / name).string());
            std::snprintf(name, sizeof name, "p_minus_%d_%d.csv", j, k);
            hnls::write_csv(art.coeffs.p_minus[j][k], (fs::path(out) / name).string());
            betas.push_back({{"j", j}, {"k", k}, {"beta", art.coeffs.beta[j][k]}});
            solv.push_back(
                {{"j", j}, {"k", k}, {"residual", art.coeffs.solvability_residual[j][k]}});
        }
    doc["beta"] = betas;
    doc["solvability_residuals"] = solv;
    doc["mu00"] = {{"re", art.coeffs.mu00.real()}, {"im", art.coeffs.mu00.imag()}};
    write_json(doc, out, "profile.json");
    return 0;
}

int cmd_law(const hnls::Config& cfg, const std::string& out) {
    hnls::PipelineArtifacts art = hnls::build_pipeline(cfg);
    double s1 = cfg.num("t1") != 0.0 ? hnls::s_of_t(art.constants, cfg.num("t1"))
                                     : hnls::auto_s1(art.constants, cfg.num("cone_margin"));
    hnls::InitParams init =
        hnls::init_params(cfg.num("energy_level"), s1, art.constants, art.coeffs);
    ordered_json doc;
    doc["sigma"] = art.constants.sigma;
    doc["alpha"] = art.constants.alpha;
    doc["beta"] = art.constants.beta;
    doc["C"] = art.constants.C_time;
    doc["C_lambda"] = art.constants.C_lambda;
    doc["C_b"] = art.constants.C_b;
    doc["s1"] = s1;
    doc["t1"] = hnls::t_of_s(art.constants, s1);
    doc["lambda1"] = init.lambda1;
    doc["b1"] = init.b1;
    doc["energy_check"] = init.energy_check;
    write_json(doc, out, "law.json");
    return 0;
}

int cmd_simulate(const hnls::Config& cfg, const std::string& out) {
    require_out(out);
    const int N = static_cast<int>(cfg.integer("dimension"));
    const int sign = cfg.sign("sign");

    hnls::SimConfig sim;
    sim.dimension = N;
    sim.sigma = cfg.num("sigma");
    sim.hartree_sign = sign;
    sim.hartree_on = cfg.flag("hartree");
    sim.power_nl_on = cfg.flag("power_nl");
    sim.dealias = cfg.flag("dealias");
    sim.diag_cadence_s = cfg.num("diag_cadence_s");
    sim.boundary_mass_threshold = cfg.num("boundary_mass_threshold");

    hnls::CartesianField u0;
    hnls::TrackCallback tracker;
    std::vector<hnls::ModulationState> states;
    std::shared_ptr<hnls::ModulationSetup> setup;
    std::shared_ptr<hnls::DecomposeGuess> guess;
    long snap_cadence = cfg.integer("snapshot_cadence");
    auto snap_count = std::make_shared<long>(0);

    if (sign > 0) {
        hnls::PipelineArtifacts art = hnls::build_pipeline(cfg);
        double s1 = cfg.num("t1") != 0.0 ? hnls::s_of_t(art.constants, cfg.num("t1"))
                                         : hnls::auto_s1(art.constants, cfg.num("cone_margin"));
        hnls::InitParams init =
            hnls::init_params(cfg.num("energy_level"), s1, art.constants, art.coeffs);
        u0 = hnls::rescale_profile(art.coeffs, init.lambda1, init.b1, 0.0, N,
                                   cfg.num("box_extent"),
                                   static_cast<int>(cfg.integer("box_cells")));
        u0.time = hnls::t_of_s(art.constants, s1);
        sim.extent = cfg.num("box_extent");
        sim.cells = static_cast<int>(cfg.integer("box_cells"));
        sim.c_dt = cfg.num("c_dt");
        sim.dt_min = cfg.num("dt_min");
        sim.dt_max = cfg.num("dt_max");
        sim.s_init = s1;
        sim.stop_lambda_min = init.lambda1 * cfg.num("lambda_min_factor");
        sim.grad_norm_ref = std::sqrt(art.bundle.grad_sq);
        sim.core_half_radius = hnls::half_max_radius(art.bundle.Q);
        if (cfg.flag("track_modulation")) {
            setup = std::make_shared<hnls::ModulationSetup>(hnls::make_modulation_setup(
                art.coeffs, art.bundle, static_cast<int>(cfg.integer("mod_cells")),
                cfg.num("mod_extent")));
            guess = std::make_shared<hnls::DecomposeGuess>(
                hnls::DecomposeGuess{init.lambda1, init.b1, 0.0});
        }
    } else {
        auto grid = hnls::make_radial_grid(N, cfg.num("radial_extent"),
                                           static_cast<int>(cfg.integer("radial_cells")));
        hnls::GroundStateBundle bundle = hnls::solve_ground_state(grid, cfg.num("gs_tol"));
        u0 = hnls::sample_radial_to_box(bundle.Q, N, cfg.num("global_extent"),
                                        static_cast<int>(cfg.integer("global_cells")),
                                        cfg.num("global_shift"));
        const double scale =
            cfg.num("mass_factor") * std::sqrt(bundle.mass_sq / hnls::box_mass(u0));
        for (auto& z : u0.v) z *= scale;
        sim.extent = cfg.num("global_extent");
        sim.cells = static_cast<int>(cfg.integer("global_cells"));
        sim.c_dt = cfg.num("global_dt");
        sim.dt_max = cfg.num("global_dt");
        sim.stop_t_end = cfg.num("global_t_end");
    }

    tracker = [&, snap_count](const hnls::CartesianField& u, double s) {
        hnls::TrackSample ts;
        if (setup) {
            hnls::ModulationState ms = hnls::decompose(u, *setup, *guess);
            ms.s = s;
            *guess = {ms.lambda, ms.b, ms.gamma};
            states.push_back(ms);
            ts.valid = true;
            ts.lambda = ms.lambda;
            ts.b = ms.b;
            ts.gamma = ms.gamma;
            ts.eps_h1 = ms.eps_h1;
        }
        if (snap_cadence > 0 && (*snap_count % snap_cadence) == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%06ld", *snap_count);
            hnls::write_snapshot(u, (fs::path(out) / name).string());
        }
        ++(*snap_count);
        return ts;
    };

    hnls::Trajectory traj = hnls::run(sim, std::move(u0), tracker);
    {
        std::ofstream f(fs::path(out) / "diagnostics.csv");
        f << hnls::rows_to_csv(traj.rows);
    }
    hnls::write_snapshot(traj.final_state, (fs::path(out) / "final_state").string());
    ordered_json doc;
    doc["stop_reason"] = traj.stop_reason;
    doc["steps"] = traj.steps;
    doc["mass_drift_rel"] = traj.mass_drift_rel;
    doc["energy_drift_rel"] = traj.energy_drift_rel;
    doc["max_grad_ratio"] = traj.max_grad_ratio;
    write_json(doc, out, "simulate.json");
    return 0;
}

int cmd_decompose(const hnls::Config& cfg, const std::string& out,
                  const std::string& snapshot, double glam, double gb, double ggamma) {
    hnls::CartesianField u = hnls::read_snapshot(snapshot);
    hnls::PipelineArtifacts art = hnls::build_pipeline(cfg);
    hnls::ModulationSetup setup = hnls::make_modulation_setup(
        art.coeffs, art.bundle, static_cast<int>(cfg.integer("mod_cells")),
        cfg.num("mod_extent"));
    hnls::ModulationState ms = hnls::decompose(u, setup, {glam, gb, ggamma});
    ordered_json doc;
    doc["t"] = ms.t;
    doc["lambda"] = ms.lambda;
    doc["b"] = ms.b;
    doc["gamma"] = ms.gamma;
    doc["eps_h1"] = ms.eps_h1;
    doc["eps_weighted"] = ms.eps_weighted;
    doc["nonradial_l2"] = ms.nonradial_l2;
    doc["ortho_residual"] = {ms.ortho_residual[0], ms.ortho_residual[1], ms.ortho_residual[2]};
    doc["tube_ok"] = ms.tube_ok;
    doc["newton_iters"] = ms.newton_iters;
    write_json(doc, out, "decompose.json");
    return 0;
}

int run_experiment(const hnls::Config& cfg, const std::string& out, bool blowup) {
    hnls::ExperimentReport rep =
        blowup ? hnls::experiment_blowup(cfg) : hnls::experiment_global(cfg);
    std::fprintf(stderr, "[hnls] %s finished in %.1f s, all_passed = %s\n",
                 blowup ? "experiment-blowup" : "experiment-global", rep.wall_seconds,
                 rep.all_passed ? "true" : "false");
    if (out.empty()) {
        std::cout << rep.doc.dump(2) << "\n";
    } else {
        require_out(out);
        hnls::emit_report(rep, out);
    }
    return rep.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimal-mass blow-up laboratory for the Hartree-perturbed critical NLS"};
    app.require_subcommand(1);

    std::string config_path, out_dir, snapshot;
    long seed = 0;
    double glam = 0.1, gb = 0.0, ggamma = 0.0;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_dir, "output directory (must exist)");
    app.add_option("--seed", seed, "seed echoed into the report");

    auto* sc_gs = app.add_subcommand("ground-state", "solve Q, rho and the norms");
    auto* sc_prof = app.add_subcommand("profile", "solve the profile systems and dump coefficients");
    auto* sc_law = app.add_subcommand("law", "constants table and (lambda1, b1)");
    auto* sc_sim = app.add_subcommand("simulate", "run the split-step evolution");
    auto* sc_dec = app.add_subcommand("decompose", "modulation-decompose a snapshot");
    sc_dec->add_option("--snapshot", snapshot, "snapshot base path (without .bin/.json)")
        ->required();
    sc_dec->add_option("--guess-lambda", glam, "initial lambda guess");
    sc_dec->add_option("--guess-b", gb, "initial b guess");
    sc_dec->add_option("--guess-gamma", ggamma, "initial gamma guess");
    auto* sc_expb = app.add_subcommand("experiment-blowup", "Reproduce the blow-up rate");
    auto* sc_expg = app.add_subcommand("experiment-global", "Boundedness probe, sign = -");

    CLI11_PARSE(app, argc, argv);

    try {
        hnls::Config cfg = load_config(config_path, seed);
        if (sc_gs->parsed()) return cmd_ground_state(cfg, out_dir);
        if (sc_prof->parsed()) return cmd_profile(cfg, out_dir);
        if (sc_law->parsed()) return cmd_law(cfg, out_dir);
        if (sc_sim->parsed()) return cmd_simulate(cfg, out_dir);
        if (sc_dec->parsed()) return cmd_decompose(cfg, out_dir, snapshot, glam, gb, ggamma);
        if (sc_expb->parsed()) return run_experiment(cfg, out_dir, true);
        if (sc_expg->parsed()) return run_experiment(cfg, out_dir, false);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
