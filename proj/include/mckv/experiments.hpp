#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mckv/besov.hpp"
#include "mckv/fokker_planck.hpp"
#include "mckv/io.hpp"
#include "mckv/kernels.hpp"
#include "mckv/particles.hpp"
#include "mckv/peano.hpp"
#include "mckv/thresholds.hpp"

namespace mckv {

using json = nlohmann::json;

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"", {"experiment", "seed", "out_dir", "quiet", "override_thresholds", "grid", "law", "params",
              "kernel", "solver", "particles", "peano", "thresholds", "besov", "epsilon_study"}},
        {"grid", {"d", "n", "L"}},
        {"law", {"alpha", "mode"}},
        {"params", {"alpha", "beta", "p", "q", "r", "d"}},
        {"kernel", {"family", "beta", "epsilon", "amplitude", "constant", "bump_width", "seed",
                    "time_profile", "time_omega"}},
        {"solver", {"t", "T", "time_nodes", "picard_tol", "picard_max", "quadrature", "initial"}},
        {"solver.initial", {"kind", "mean", "var", "lo", "hi", "x"}},
        {"particles", {"N", "dt", "horizon", "snapshot_times"}},
        {"peano", {"alpha", "beta", "eps", "x0", "paths", "dt", "horizon", "beta_sweep"}},
        {"thresholds", {"alpha_min", "alpha_max", "alpha_steps", "beta_min", "beta_max", "beta_steps",
                        "p", "q", "r", "d"}},
        {"besov", {"gamma", "ell", "m", "family_size"}},
        {"epsilon_study", {"eps_list", "vartheta", "rbar"}},
    };
    return schema;
}

inline void check_keys(const json& node, const std::string& path) {
    const auto& schema = config_schema();
    auto it = schema.find(path);
    if (it == schema.end()) return;  // leaf values
    if (!node.is_object()) throw ConfigError("config: section '" + path + "' must be an object");
    for (const auto& [key, value] : node.items()) {
        if (!it->second.count(key))
            throw ConfigError("config: unknown key '" + (path.empty() ? key : path + "." + key) + "'");
        std::string child = path.empty() ? key : path + "." + key;
        if (schema.count(child)) check_keys(value, child);
    }
}

inline double exponent_from(const json& v, const char* what) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return kInf;
        throw ConfigError(std::string("config: ") + what + " must be a number or \"inf\"");
    }
    return v.get<double>();
}

}  // namespace detail

/// Parsed, schema-checked experiment configuration. Unknown keys are rejected
/// before any compute; parse -> serialize -> parse is the identity.
struct ExperimentConfig {
    json root;

    static ExperimentConfig parse(const std::string& text) {
        ExperimentConfig cfg;
        try {
            cfg.root = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config: JSON parse error: ") + e.what());
        }
        detail::check_keys(cfg.root, "");
        return cfg;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("config: cannot open " + path);
        std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        return parse(text);
    }

    std::string serialize() const { return root.dump(2); }

    bool has(const std::string& section) const { return root.contains(section); }
    std::uint64_t seed() const { return root.value("seed", std::uint64_t{1}); }
    bool quiet() const { return root.value("quiet", false); }
    bool override_thresholds() const { return root.value("override_thresholds", false); }
    std::string out_dir() const { return root.value("out_dir", std::string("out")); }

    Grid grid() const {
        if (!has("grid")) throw ConfigError("config: missing 'grid' section");
        const json& g = root["grid"];
        return make_grid(g.value("d", 1), g.value("n", 512), g.value("L", 20.0));
    }

    StableLaw law() const {
        if (!has("law")) throw ConfigError("config: missing 'law' section");
        const json& l = root["law"];
        std::string mode = l.value("mode", std::string("isotropic"));
        if (mode != "isotropic" && mode != "coordinate-product")
            throw ConfigError("config: law.mode must be isotropic or coordinate-product");
        return StableLaw(l.value("alpha", 2.0), mode == "isotropic"
                                                    ? StableLaw::Mode::isotropic
                                                    : StableLaw::Mode::coordinate_product);
    }

    ParameterSet params() const {
        if (!has("params")) throw ConfigError("config: missing 'params' section");
        const json& p = root["params"];
        return ParameterSet(p.value("alpha", 2.0), p.value("beta", -0.5),
                            Exponent(detail::exponent_from(p.contains("p") ? p["p"] : json("inf"), "params.p")),
                            Exponent(detail::exponent_from(p.contains("q") ? p["q"] : json("inf"), "params.q")),
                            Exponent(detail::exponent_from(p.contains("r") ? p["r"] : json("inf"), "params.r")),
                            p.value("d", 1));
    }

    KernelSpec kernel_spec() const {
        if (!has("kernel")) throw ConfigError("config: missing 'kernel' section");
        const json& k = root["kernel"];
        KernelSpec spec;
        std::string fam = k.value("family", std::string("zero"));
        if (fam == "zero") spec.family = KernelFamily::zero;
        else if (fam == "constant-vector") spec.family = KernelFamily::constant_vector;
        else if (fam == "smooth-bump") spec.family = KernelFamily::smooth_bump;
        else if (fam == "power") spec.family = KernelFamily::power;
        else if (fam == "grad-of-holder") spec.family = KernelFamily::grad_of_holder;
        else throw ConfigError("config: unknown kernel.family '" + fam + "'");
        spec.beta = k.value("beta", 0.0);
        spec.amplitude = k.value("amplitude", 1.0);
        if (k.contains("constant")) spec.constant = k["constant"].get<std::vector<double>>();
        spec.bump_width = k.value("bump_width", 2.0);
        spec.seed = k.value("seed", std::uint64_t{1});
        std::string tp = k.value("time_profile", std::string("constant"));
        if (tp == "constant") spec.time_profile = TimeProfile::constant;
        else if (tp == "sine") spec.time_profile = TimeProfile::sine;
        else throw ConfigError("config: unknown kernel.time_profile '" + tp + "'");
        spec.time_omega = k.value("time_omega", 0.0);
        spec.validate();
        return spec;
    }

    double kernel_epsilon() const { return has("kernel") ? root["kernel"].value("epsilon", 0.0) : 0.0; }

    InitialLaw initial_law(const Grid& g) const {
        if (!has("solver") || !root["solver"].contains("initial"))
            return InitialLaw::gaussian(g, {0.0}, 0.25);
        const json& init = root["solver"]["initial"];
        std::string kind = init.value("kind", std::string("gaussian"));
        if (kind == "gaussian")
            return InitialLaw::gaussian(g, init.value("mean", std::vector<double>{0.0}),
                                        init.value("var", 0.25));
        if (kind == "point-mass") return InitialLaw::point_mass(g, init.value("x", std::vector<double>{}));
        if (kind == "uniform-box") return InitialLaw::uniform_box(g, init.value("lo", -1.0), init.value("hi", 1.0));
        throw ConfigError("config: unknown initial.kind '" + kind + "'");
    }

    /// Realized kernel: mollified when kernel.epsilon > 0, plain otherwise
    /// (plain is only meaningful for bounded families).
    RealizedKernel realized_kernel(const Grid& g, const StableLaw& l) const {
        KernelSpec spec = kernel_spec();
        double eps = kernel_epsilon();
        if (eps > 0.0) return mollify(spec, g, eps, l).smoothed;
        if (spec.family == KernelFamily::power || spec.family == KernelFamily::grad_of_holder)
            throw ConfigError("config: singular kernel families require kernel.epsilon > 0");
        return realize_kernel(spec, g);
    }

    SolverConfig solver_config() const {
        Grid g = grid();
        StableLaw l = law();
        SolverConfig cfg(params(), l, realized_kernel(g, l), initial_law(g),
                         root.contains("solver") ? root["solver"].value("t", 0.0) : 0.0,
                         root.contains("solver") ? root["solver"].value("T", 0.25) : 0.25);
        if (has("solver")) {
            const json& s = root["solver"];
            cfg.time_nodes = s.value("time_nodes", 256);
            cfg.picard_tol = s.value("picard_tol", 1e-8);
            cfg.picard_max = s.value("picard_max", 50);
            std::string quad = s.value("quadrature", std::string("midpoint"));
            if (quad == "midpoint") cfg.quadrature = SolverConfig::Quadrature::midpoint;
            else if (quad == "left-endpoint") cfg.quadrature = SolverConfig::Quadrature::left_endpoint;
            else throw ConfigError("config: unknown solver.quadrature '" + quad + "'");
        }
        cfg.override_thresholds = override_thresholds();
        return cfg;
    }

    SimConfig sim_config() const {
        if (!has("particles")) throw ConfigError("config: missing 'particles' section");
        const json& p = root["particles"];
        Grid g = grid();
        StableLaw l = law();
        double eps = kernel_epsilon();
        if (!(eps > 0.0))
            throw ConfigError("config: particle runs need a mollified kernel (kernel.epsilon > 0)");
        MollifiedKernel mk = mollify(kernel_spec(), g, eps, l);
        return SimConfig(p.value("N", 1000), p.value("dt", 0.01), p.value("horizon", 0.5), l,
                         std::move(mk), seed(), initial_law(g));
    }

    std::vector<double> snapshot_times() const {
        if (!has("particles") || !root["particles"].contains("snapshot_times")) return {0.25, 0.5};
        return root["particles"]["snapshot_times"].get<std::vector<double>>();
    }

    PeanoConfig peano_config() const {
        if (!has("peano")) throw ConfigError("config: missing 'peano' section");
        const json& p = root["peano"];
        PeanoConfig cfg;
        cfg.alpha = p.value("alpha", 2.0);
        cfg.beta = p.value("beta", -0.5);
        cfg.eps = p.value("eps", 0.0);
        cfg.x0 = p.value("x0", 0.0);
        cfg.paths = p.value("paths", 1000);
        cfg.dt = p.value("dt", 1e-4);
        cfg.horizon = p.value("horizon", 1.0);
        cfg.seed = seed();
        cfg.validate();
        return cfg;
    }
};

// -- threshold sweep ---------------------------------------------------------

struct ThresholdSweepResult {
    std::string table_csv;       // one row per (alpha, beta) cell
    std::string boundaries_csv;  // the three threshold lines over alpha
};

/// Sweep the (alpha, beta) plane at fixed (p, q, r, d); emits the full report
/// per cell plus plot data for the weak/strong/linear boundary lines.
inline ThresholdSweepResult run_threshold_sweep(double alpha_min, double alpha_max, int alpha_steps,
                                                double beta_min, double beta_max, int beta_steps,
                                                Exponent p, Exponent q, Exponent r, int d) {
    CsvWriter table({"alpha", "beta", "p", "q", "r", "d", "gap", "weak_ok", "strong_ok", "linear_ok",
                     "rbar_lo", "rbar_hi", "r0_hi", "kr_ok", "xz_gamma", "xz_ell", "xz_s", "xz_verified"});
    auto cell = [&](double a, double b) {
        ParameterSet ps(a, b, p, q, r, d);
        ThresholdReport rep = full_report(ps);
        table.add_row({CsvWriter::cell(a), CsvWriter::cell(b), CsvWriter::cell(p.value()),
                       CsvWriter::cell(q.value()), CsvWriter::cell(r.value()),
                       CsvWriter::cell(static_cast<long long>(d)), CsvWriter::cell(rep.gamma_gap),
                       CsvWriter::cell(rep.weak_ok), CsvWriter::cell(rep.strong_ok),
                       CsvWriter::cell(rep.linear_ok), CsvWriter::cell(rep.rbar_interval.lo),
                       CsvWriter::cell(rep.rbar_interval.hi), CsvWriter::cell(rep.r0_interval.hi),
                       CsvWriter::cell(rep.kr_ok),
                       CsvWriter::cell(rep.xz_certificate ? rep.xz_certificate->gamma : 0.0),
                       CsvWriter::cell(rep.xz_certificate ? rep.xz_certificate->ell : 0.0),
                       CsvWriter::cell(rep.xz_certificate ? rep.xz_certificate->s : 0.0),
                       CsvWriter::cell(rep.xz_certificate ? rep.xz_certificate->verified : false)});
    };
    for (int i = 0; i < alpha_steps; ++i) {
        double a = alpha_min + (alpha_max - alpha_min) * i / std::max(alpha_steps - 1, 1);
        for (int j = 0; j < beta_steps; ++j) {
            double b = beta_min + (beta_max - beta_min) * j / std::max(beta_steps - 1, 1);
            cell(a, b);
        }
    }

    CsvWriter lines({"alpha", "beta_weak", "beta_strong", "beta_linear"});
    for (int i = 0; i < std::max(alpha_steps, 2); ++i) {
        double a = alpha_min + (alpha_max - alpha_min) * i / std::max(alpha_steps - 1, 1);
        double dp = d * p.inv(), ar = a * r.inv();
        lines.add_row({CsvWriter::cell(a), CsvWriter::cell(1.0 - a + dp + ar),
                       CsvWriter::cell(2.0 - 1.5 * a + dp + ar), CsvWriter::cell(0.5 * (1.0 - a))});
    }
    return {table.str(), lines.str()};
}

inline ThresholdSweepResult run_threshold_sweep(const ExperimentConfig& cfg) {
    if (!cfg.has("thresholds")) throw ConfigError("config: missing 'thresholds' section");
    const json& t = cfg.root["thresholds"];
    return run_threshold_sweep(
        t.value("alpha_min", 1.05), t.value("alpha_max", 2.0), t.value("alpha_steps", 20),
        t.value("beta_min", -0.95), t.value("beta_max", -0.05), t.value("beta_steps", 19),
        Exponent(detail::exponent_from(t.contains("p") ? t["p"] : json("inf"), "thresholds.p")),
        Exponent(detail::exponent_from(t.contains("q") ? t["q"] : json("inf"), "thresholds.q")),
        Exponent(detail::exponent_from(t.contains("r") ? t["r"] : json("inf"), "thresholds.r")),
        t.value("d", 1));
}

// -- artifact emission -------------------------------------------------------

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path.string());
    os << text;
}

inline std::string trajectory_index_csv(const DensityTrajectory& traj) {
    CsvWriter csv({"slice", "time", "mass", "min_value"});
    for (std::size_t i = 0; i < traj.nodes(); ++i)
        csv.add_row({CsvWriter::cell(static_cast<long long>(i)), CsvWriter::cell(traj.times[i]),
                     CsvWriter::cell(traj.slice_mass[i]), CsvWriter::cell(traj.slice_min[i])});
    return csv.str();
}

inline std::string convergence_log_csv(const PicardResult& result) {
    CsvWriter csv({"iteration", "sup_l1_increment"});
    for (std::size_t k = 0; k < result.increments.size(); ++k)
        csv.add_row({CsvWriter::cell(static_cast<long long>(k + 1)),
                     CsvWriter::cell(result.increments[k])});
    return csv.str();
}

inline std::string inequality_reports_csv(const std::vector<std::pair<std::string, InequalityReport>>& reps) {
    CsvWriter csv({"family_id", "ratio", "fitted_constant", "family_size", "witness"});
    for (const auto& [id, rep] : reps)
        csv.add_row({id, CsvWriter::cell(rep.ratio), CsvWriter::cell(rep.fitted_constant),
                     CsvWriter::cell(static_cast<long long>(rep.family_size)), rep.witness});
    return csv.str();
}

/// Orchestrated end-to-end run: kernel work, threshold gate, solver,
/// diagnostics, particle comparison; every stage leaves its artifacts in
/// out_dir and failures carry a stage tag.
struct PipelineSummary {
    std::vector<std::pair<std::string, std::string>> checks;  // (name, status)
    bool all_green = true;

    void record(const std::string& name, bool ok, const std::string& detail = {}) {
        checks.emplace_back(name, (ok ? "pass" : "FAIL") + (detail.empty() ? "" : " (" + detail + ")"));
        all_green = all_green && ok;
    }

    std::string str() const {
        std::string out = "pipeline summary\n";
        for (const auto& [name, status] : checks) out += "  " + name + ": " + status + "\n";
        out += all_green ? "ALL GREEN\n" : "FAILURES PRESENT\n";
        return out;
    }
};

inline PipelineSummary run_full_pipeline(const ExperimentConfig& cfg, const std::string& out_override = {}) {
    namespace fs = std::filesystem;
    fs::path out = out_override.empty() ? fs::path(cfg.out_dir()) : fs::path(out_override);
    fs::create_directories(out);
    PipelineSummary summary;
    std::string stage = "setup";
    try {
        Grid g = cfg.grid();
        StableLaw law = cfg.law();

        stage = "kernel";
        KernelSpec spec = cfg.kernel_spec();
        RealizedKernel raw = realize_kernel(spec, g);
        for (int c = 0; c < raw.base.dim(); ++c)
            dump_field(raw.base.comp[c], (out / ("kernel_raw_" + std::to_string(c) + ".field")).string());
        RealizedKernel kernel = cfg.realized_kernel(g, law);
        for (int c = 0; c < kernel.base.dim(); ++c)
            dump_field(kernel.base.comp[c], (out / ("kernel_" + std::to_string(c) + ".field")).string());
        summary.record("kernel realized", true);

        stage = "threshold-gate";
        ThresholdReport rep = full_report(cfg.params());
        {
            CsvWriter csv({"gap", "weak_ok", "strong_ok", "linear_ok", "kr_ok"});
            csv.add_row({CsvWriter::cell(rep.gamma_gap), CsvWriter::cell(rep.weak_ok),
                         CsvWriter::cell(rep.strong_ok), CsvWriter::cell(rep.linear_ok),
                         CsvWriter::cell(rep.kr_ok)});
            csv.write((out / "thresholds.csv").string());
        }
        if (!rep.weak_ok && !cfg.override_thresholds())
            throw ThresholdGateError("pipeline: parameters fail the weak well-posedness gate");
        summary.record("threshold gate", rep.weak_ok);

        stage = "solve";
        SolverConfig scfg = cfg.solver_config();
        PicardResult sol = picard_solve(scfg);
        sol.trajectory.refresh_diagnostics();
        write_text(out / "trajectory_index.csv", trajectory_index_csv(sol.trajectory));
        write_text(out / "convergence_log.csv", convergence_log_csv(sol));
        const std::size_t stride = std::max<std::size_t>(sol.trajectory.nodes() / 8, 1);
        for (std::size_t i = 0; i < sol.trajectory.nodes(); i += stride)
            dump_field(sol.trajectory.slices[i], (out / ("slice_" + std::to_string(i) + ".field")).string());
        summary.record("picard converged", sol.converged,
                       "iterations " + std::to_string(sol.iterations));
        summary.record("mass conserved", sol.trajectory.max_mass_error() < 1e-6);
        summary.record("negative undershoot bounded", sol.trajectory.worst_min() > -1e-3);

        stage = "weak-form";
        auto battery = make_test_battery(g, sol.trajectory.times);
        double residual = weak_form_residual(sol.trajectory, scfg, battery);
        write_text(out / "weak_form_residual.txt", detail::format_double(residual) + "\n");
        summary.record("weak-form residual < 1e-3", residual < 1e-3,
                       detail::format_double(residual));

        if (cfg.has("epsilon_study")) {
            stage = "epsilon-stability";
            const json& es = cfg.root["epsilon_study"];
            auto eps_list = es["eps_list"].get<std::vector<double>>();
            auto table = epsilon_stability_study(scfg, spec, eps_list, es.value("vartheta", 0.5),
                                                 es.value("rbar", 2.0));
            CsvWriter csv({"eps_coarse", "eps_fine", "sup_l1", "besov_lr", "kernel_dist"});
            for (const auto& row : table.rows)
                csv.add_row({CsvWriter::cell(row.eps_coarse), CsvWriter::cell(row.eps_fine),
                             CsvWriter::cell(row.sup_l1), CsvWriter::cell(row.besov_lr),
                             CsvWriter::cell(row.kernel_dist)});
            csv.write((out / "epsilon_stability.csv").string());
            summary.record("epsilon ladder cauchy", table.sup_l1_decreasing,
                           "last/first " + detail::format_double(table.sup_l1_last_over_first));
            summary.record("solution/kernel ratio bounded", table.ratio_spread < 10.0,
                           detail::format_double(table.ratio_spread));
        }

        if (cfg.has("particles")) {
            stage = "particles";
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
            auto rows = compare_to_pde(run, sol.trajectory);
            CsvWriter csv({"time", "l1_distance"});
            bool close = true;
            for (const auto& row : rows) {
                csv.add_row({CsvWriter::cell(row.time), CsvWriter::cell(row.l1_distance)});
                close = close && row.l1_distance < 0.2;
            }
            csv.write((out / "particle_vs_pde.csv").string());
            summary.record("particle/pde consistency", close);
        }

        write_text(out / "summary.txt", summary.str());
        return summary;
    } catch (const std::exception& e) {
        write_text(out / "summary.txt", summary.str() + "stage '" + stage + "' failed: " + e.what() + "\n");
        throw;
    }
}

}  // namespace mckv
