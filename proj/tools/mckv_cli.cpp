// Command-line front end: grid, kernel, besov, thresholds, solve, particles,
// peano, pipeline subcommands driven by a JSON config.
//
// Exit codes: 0 success, 2 config error, 3 numerical divergence, 4 threshold gate.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "mckv/mckv.hpp"

namespace fs = std::filesystem;
using namespace mckv;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool override_thresholds = false;
    bool quiet = false;
};

ExperimentConfig load_config(const GlobalArgs& args) {
    if (args.config_path.empty()) throw ConfigError("missing --config <path>");
    ExperimentConfig cfg = ExperimentConfig::load(args.config_path);
    if (args.seed_set) cfg.root["seed"] = args.seed;
    if (args.override_thresholds) cfg.root["override_thresholds"] = true;
    if (args.quiet) cfg.root["quiet"] = true;
    if (!args.out_dir.empty()) cfg.root["out_dir"] = args.out_dir;
    warnings::enabled() = !cfg.quiet();
    return cfg;
}

fs::path ensure_out(const ExperimentConfig& cfg) {
    fs::path out(cfg.out_dir());
    fs::create_directories(out);
    return out;
}

void cmd_grid(const ExperimentConfig& cfg) {
    Grid g = cfg.grid();
    std::cout << "grid: d=" << g.dim() << " n=" << g.n_per_axis() << " L=" << g.extent()
              << " dx=" << g.dx() << " nodes=" << g.total_nodes() << "\n";
    fs::path out = ensure_out(cfg);
    StableLaw law = cfg.has("law") ? cfg.law() : StableLaw(2.0);
    double t = std::max(4.0 * resolution_floor(g, law), 0.25);
    Field p = heat_kernel(g, t, law);
    dump_field(p, (out / "heat_kernel.field").string());
    std::cout << "wrote " << (out / "heat_kernel.field").string() << " (t=" << t
              << ", mass=" << mass(p) << ", boundary_mass=" << boundary_mass(p) << ")\n";
}

void cmd_kernel(const ExperimentConfig& cfg) {
    Grid g = cfg.grid();
    StableLaw law = cfg.law();
    KernelSpec spec = cfg.kernel_spec();
    fs::path out = ensure_out(cfg);
    RealizedKernel raw = realize_kernel(spec, g);
    for (int c = 0; c < raw.base.dim(); ++c)
        dump_field(raw.base.comp[c], (out / ("kernel_raw_" + std::to_string(c) + ".field")).string());
    std::cout << "kernel family=" << to_string(spec.family) << " sup=" << raw.base.sup_norm() << "\n";

    double eps = cfg.kernel_epsilon();
    if (eps > 0.0) {
        MollifiedKernel mk = mollify(spec, g, eps, law);
        for (int c = 0; c < mk.smoothed.base.dim(); ++c)
            dump_field(mk.smoothed.base.comp[c],
                       (out / ("kernel_mollified_" + std::to_string(c) + ".field")).string());
        std::cout << "mollified at eps=" << eps << " sup=" << mk.sup_norm() << "\n";
    }
    if (cfg.has("epsilon_study")) {
        auto eps_list = cfg.root["epsilon_study"]["eps_list"].get<std::vector<double>>();
        double beta_tilde = spec.beta - 0.2;
        auto table = mollifier_convergence(spec, g, beta_tilde, eps_list, law);
        CsvWriter csv({"eps", "besov_distance"});
        for (const auto& row : table.rows)
            csv.add_row({CsvWriter::cell(row.eps), CsvWriter::cell(row.distance)});
        csv.write((out / "mollifier_convergence.csv").string());
        std::cout << "mollifier convergence table -> mollifier_convergence.csv\n";
    }
}

void cmd_besov(const ExperimentConfig& cfg) {
    Grid g = cfg.grid();
    StableLaw law = cfg.law();
    fs::path out = ensure_out(cfg);
    double gamma = -0.5, ell = kInf, m = kInf;
    int family = 25;
    if (cfg.has("besov")) {
        const json& b = cfg.root["besov"];
        gamma = b.value("gamma", -0.5);
        if (b.contains("ell")) ell = detail::exponent_from(b["ell"], "besov.ell");
        if (b.contains("m")) m = detail::exponent_from(b["m"], "besov.m");
        family = b.value("family_size", 25);
    }
    BesovIndex idx(gamma, ell, m);

    std::vector<std::pair<std::string, InequalityReport>> reports;
    InequalityReport young_agg, dual_agg;
    for (int i = 0; i < family; ++i) {
        Field f = random_smooth_field(g, cfg.seed() * 1000 + i);
        Field h = random_smooth_field(g, cfg.seed() * 2000 + i);
        YoungSplit split{0.5 * gamma, idx.ell, 1.0, idx.m, kInf};
        auto yr = check_young(f, h, idx, split, law, {}, "member " + std::to_string(i));
        auto dr = check_duality(f, h, idx, law, {}, "member " + std::to_string(i));
        if (i == 0) {
            young_agg = yr;
            dual_agg = dr;
        } else {
            young_agg.absorb(yr);
            dual_agg.absorb(dr);
        }
    }
    reports.emplace_back("young", young_agg);
    reports.emplace_back("duality", dual_agg);
    write_text(out / "inequalities.csv", inequality_reports_csv(reports));
    std::cout << "fitted c_Y=" << young_agg.fitted_constant << " c_D=" << dual_agg.fitted_constant
              << " over " << family << " members -> inequalities.csv\n";
}

void cmd_thresholds(const ExperimentConfig& cfg) {
    fs::path out = ensure_out(cfg);
    if (cfg.has("thresholds")) {
        auto sweep = run_threshold_sweep(cfg);
        write_text(out / "threshold_sweep.csv", sweep.table_csv);
        write_text(out / "threshold_boundaries.csv", sweep.boundaries_csv);
        std::cout << "sweep -> threshold_sweep.csv, boundaries -> threshold_boundaries.csv\n";
        return;
    }
    ParameterSet ps = cfg.params();
    ThresholdReport rep = full_report(ps);
    std::cout << "gap = " << rep.gamma_gap << "\n"
              << "weak well-posed:   " << (rep.weak_ok ? "yes" : "no") << "\n"
              << "strong well-posed: " << (rep.strong_ok ? "yes" : "no") << "\n"
              << "linear threshold:  " << (rep.linear_ok ? "yes" : "no") << "\n";
    if (rep.weak_ok)
        std::cout << "rbar interval: [" << rep.rbar_interval.lo << ", " << rep.rbar_interval.hi << ")\n"
                  << "r0 interval:   (0, " << rep.r0_interval.hi << "], kr_ok=" << rep.kr_ok << "\n";
    if (rep.xz_certificate)
        std::cout << "xz witness: gamma=" << rep.xz_certificate->gamma << " ell=" << rep.xz_certificate->ell
                  << " s=" << rep.xz_certificate->s
                  << " verified=" << (rep.xz_certificate->verified ? "yes" : "no") << "\n";
    CsvWriter csv({"alpha", "beta", "p", "q", "r", "d", "gap", "weak_ok", "strong_ok", "linear_ok", "kr_ok"});
    csv.add_row({CsvWriter::cell(ps.alpha), CsvWriter::cell(ps.beta), CsvWriter::cell(ps.p.value()),
                 CsvWriter::cell(ps.q.value()), CsvWriter::cell(ps.r.value()),
                 CsvWriter::cell(static_cast<long long>(ps.d)), CsvWriter::cell(rep.gamma_gap),
                 CsvWriter::cell(rep.weak_ok), CsvWriter::cell(rep.strong_ok),
                 CsvWriter::cell(rep.linear_ok), CsvWriter::cell(rep.kr_ok)});
    csv.write((out / "threshold_report.csv").string());
}

void cmd_solve(const ExperimentConfig& cfg) {
    fs::path out = ensure_out(cfg);
    SolverConfig scfg = cfg.solver_config();
    PicardResult result = picard_solve(scfg);
    if (!result.converged)
        throw NumericalDivergence("solve: picard did not converge within picard_max iterations");
    result.trajectory.refresh_diagnostics();
    write_text(out / "trajectory_index.csv", trajectory_index_csv(result.trajectory));
    write_text(out / "convergence_log.csv", convergence_log_csv(result));
    for (std::size_t i = 0; i < result.trajectory.nodes();
         i += std::max<std::size_t>(result.trajectory.nodes() / 16, 1))
        dump_field(result.trajectory.slices[i], (out / ("slice_" + std::to_string(i) + ".field")).string());
    std::cout << "converged in " << result.iterations << " iterations, mass error "
              << result.trajectory.max_mass_error() << ", min " << result.trajectory.worst_min() << "\n";
}

void cmd_particles(const ExperimentConfig& cfg) {
    fs::path out = ensure_out(cfg);
    SimConfig pcfg = cfg.sim_config();
    auto run = run_particles(pcfg, cfg.snapshot_times());
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        dump_field(run.snapshots[s], (out / ("particles_" + std::to_string(s) + ".field")).string());
        CsvWriter raw_csv({"particle", "x0"});
        for (int i = 0; i < pcfg.N; ++i)
            raw_csv.add_row({CsvWriter::cell(static_cast<long long>(i)),
                             CsvWriter::cell(run.raw_positions[s][i])});
        raw_csv.write((out / ("positions_" + std::to_string(s) + ".csv")).string());
    }
    std::cout << "ran " << pcfg.N << " particles to t=" << pcfg.horizon << ", wrap fraction "
              << run.wrap_fraction << "\n";
    if (cfg.has("solver")) {
        SolverConfig scfg = cfg.solver_config();
        scfg.T = pcfg.horizon;
        auto sol = picard_solve(scfg);
        auto rows = compare_to_pde(run, sol.trajectory);
        CsvWriter csv({"time", "l1_distance"});
        for (const auto& row : rows)
            csv.add_row({CsvWriter::cell(row.time), CsvWriter::cell(row.l1_distance)});
        csv.write((out / "particle_vs_pde.csv").string());
        std::cout << "comparison -> particle_vs_pde.csv\n";
    }
}

void cmd_peano(const ExperimentConfig& cfg) {
    fs::path out = ensure_out(cfg);
    PeanoConfig pcfg = cfg.peano_config();
    std::vector<double> betas;
    if (cfg.root["peano"].contains("beta_sweep"))
        betas = cfg.root["peano"]["beta_sweep"].get<std::vector<double>>();
    else
        betas = {pcfg.beta};
    auto reports = run_peano_sweep(pcfg, betas);
    CsvWriter csv({"beta", "eps", "final_x", "envelope", "envelope_rel_error", "median_abs",
                   "spread_statistic", "occupancy", "fraction_positive"});
    for (const auto& rep : reports)
        csv.add_row({CsvWriter::cell(rep.beta), CsvWriter::cell(rep.eps), CsvWriter::cell(rep.final_x),
                     CsvWriter::cell(rep.envelope_value), CsvWriter::cell(rep.envelope_rel_error),
                     CsvWriter::cell(rep.median_abs), CsvWriter::cell(rep.spread_statistic),
                     CsvWriter::cell(rep.occupancy), CsvWriter::cell(rep.fraction_positive)});
    csv.write((out / "peano.csv").string());
    for (const auto& rep : reports) {
        if (rep.eps == 0.0)
            std::cout << "beta=" << rep.beta << " x_T=" << rep.final_x << " envelope=" << rep.envelope_value
                      << " rel_error=" << rep.envelope_rel_error << "\n";
        else
            std::cout << "beta=" << rep.beta << " S=" << rep.spread_statistic
                      << " occupancy=" << rep.occupancy << "\n";
    }
}

void cmd_pipeline(const ExperimentConfig& cfg) {
    auto summary = run_full_pipeline(cfg);
    std::cout << summary.str();
    if (!summary.all_green) throw NumericalDivergence("pipeline: some checks failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale toolkit for stable-driven McKean-Vlasov dynamics"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "JSON experiment configuration");
    auto* seed_opt = app.add_option("--seed", args.seed, "override the config seed");
    app.add_option("--out", args.out_dir, "output directory override");
    app.add_flag("--override-thresholds", args.override_thresholds,
                 "run solver configs past the well-posedness gate");
    app.add_flag("--quiet", args.quiet, "suppress warnings");

    std::map<std::string, void (*)(const ExperimentConfig&)> commands{
        {"grid", cmd_grid},
        {"kernel", cmd_kernel},
        {"besov", cmd_besov},
        {"thresholds", cmd_thresholds},
        {"solve", cmd_solve},
        {"particles", cmd_particles},
        {"peano", cmd_peano},
        {"pipeline", cmd_pipeline}};
    for (auto& [name, fn] : commands) app.add_subcommand(name, name + " subcommand");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    args.seed_set = seed_opt->count() > 0;
    try {
        ExperimentConfig cfg = load_config(args);
        for (auto& [name, fn] : commands)
            if (app.got_subcommand(name)) fn(cfg);
        return 0;
    } catch (const ThresholdGateError& e) {
        std::cerr << "threshold gate: " << e.what() << "\n";
        return 4;
    } catch (const NumericalDivergence& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
