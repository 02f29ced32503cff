#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mckv/besov.hpp"
#include "mckv/grid.hpp"
#include "mckv/kernels.hpp"
#include "mckv/semigroup.hpp"
#include "mckv/thresholds.hpp"

namespace mckv {

/// Initial law mu as a mass-1 non-negative Field. Point masses are a single
/// unit-mass cell; the first free-evolution step regularizes them.
struct InitialLaw {
    Field as_field;

    static InitialLaw point_mass(const Grid& g, const std::vector<double>& x = {}) {
        return finalize(delta_field(g, x), "point_mass");
    }

    static InitialLaw gaussian(const Grid& g, const std::vector<double>& mean, double var) {
        if (!(var > 0.0)) throw ConfigError("InitialLaw::gaussian: variance must be positive");
        Field f(g, 0.0, "gaussian");
        const int n = g.n_per_axis();
        double m0 = mean.size() > 0 ? mean[0] : 0.0;
        double m1 = mean.size() > 1 ? mean[1] : 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double x0, x1 = 0.0;
            if (g.dim() == 1) {
                x0 = g.coord(static_cast<int>(i));
            } else {
                x0 = g.coord(static_cast<int>(i) / n);
                x1 = g.coord(static_cast<int>(i) % n);
            }
            double r2 = (x0 - m0) * (x0 - m0) + (x1 - m1) * (x1 - m1);
            f.values[i] = std::exp(-0.5 * r2 / var);
        }
        return finalize(std::move(f), "gaussian");
    }

    static InitialLaw uniform_box(const Grid& g, double lo, double hi) {
        if (!(lo < hi)) throw ConfigError("InitialLaw::uniform_box: need lo < hi");
        Field f(g, 0.0, "uniform_box");
        const int n = g.n_per_axis();
        for (std::size_t i = 0; i < f.size(); ++i) {
            double x0, x1 = 0.0;
            if (g.dim() == 1) {
                x0 = g.coord(static_cast<int>(i));
            } else {
                x0 = g.coord(static_cast<int>(i) / n);
                x1 = g.coord(static_cast<int>(i) % n);
            }
            bool inside = x0 >= lo && x0 < hi && (g.dim() == 1 || (x1 >= lo && x1 < hi));
            f.values[i] = inside ? 1.0 : 0.0;
        }
        return finalize(std::move(f), "uniform_box");
    }

    static InitialLaw custom(Field f) { return finalize(std::move(f), "custom"); }

private:
    static InitialLaw finalize(Field f, const char* kind) {
        double m = mass(f);
        if (!(m > 0.0)) throw ConfigError(std::string("InitialLaw::") + kind + ": zero mass");
        for (auto& v : f.values) {
            v /= m;
            if (v < -1e-12) throw ConfigError(std::string("InitialLaw::") + kind + ": negative density");
        }
        InitialLaw law;
        law.as_field = std::move(f);
        if (std::abs(mass(law.as_field) - 1.0) > 1e-10)
            throw ConfigError(std::string("InitialLaw::") + kind + ": normalization failed");
        return law;
    }
};

/// Time-indexed density trajectory with per-slice diagnostics.
struct DensityTrajectory {
    std::vector<double> times;
    std::vector<Field> slices;
    std::vector<double> slice_mass;
    std::vector<double> slice_min;

    const Grid& grid() const { return slices.at(0).grid; }
    std::size_t nodes() const { return times.size(); }

    void refresh_diagnostics() {
        slice_mass.resize(slices.size());
        slice_min.resize(slices.size());
        for (std::size_t i = 0; i < slices.size(); ++i) {
            slice_mass[i] = mass(slices[i]);
            slice_min[i] = min_value(slices[i]);
        }
    }

    double max_mass_error() const {
        double worst = 0.0;
        for (double m : slice_mass) worst = std::max(worst, std::abs(m - 1.0));
        return worst;
    }
    double worst_min() const {
        double worst = 0.0;
        for (double m : slice_min) worst = std::min(worst, m);
        return worst;
    }
};

inline double sup_l1_distance(const DensityTrajectory& a, const DensityTrajectory& b) {
    if (a.nodes() != b.nodes()) throw ConfigError("sup_l1_distance: node count mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.nodes(); ++i) worst = std::max(worst, lp_norm(a.slices[i] - b.slices[i], 1.0));
    return worst;
}

struct SolverConfig {
    ParameterSet params;
    StableLaw law;
    RealizedKernel kernel;  // mollified, or inherently bounded (zero/constant/bump)
    InitialLaw initial;
    double t = 0.0;
    double T = 0.25;
    int time_nodes = 256;
    double picard_tol = 1e-8;
    int picard_max = 50;
    enum class Quadrature { midpoint, left_endpoint } quadrature = Quadrature::midpoint;
    bool override_thresholds = false;

    SolverConfig(ParameterSet p, StableLaw l, RealizedKernel k, InitialLaw init, double t_, double T_)
        : params(p), law(l), kernel(std::move(k)), initial(std::move(init)), t(t_), T(T_) {}

    const Grid& grid() const { return initial.as_field.grid; }

    void validate() const {
        if (!(T - t > 0.0)) throw ConfigError("SolverConfig: empty time horizon");
        if (time_nodes < 2) throw ConfigError("SolverConfig: need at least 2 time nodes");
        law.require_subcritical("SolverConfig");
        if (!kernel.base.comp.empty() && kernel.base.grid() != grid())
            throw ConfigError("SolverConfig: kernel and initial law live on different grids");
        if (!check_weak(params).weak_ok) {
            if (!override_thresholds)
                throw ThresholdGateError(
                    "SolverConfig: parameters fail the weak well-posedness gate (gap <= 0); "
                    "set the override flag for exploratory runs");
            warnings::emit("SolverConfig: running past the threshold gate in exploratory mode");
        }
    }
};

/// Non-linear drift B_rho = b * rho, coordinatewise for vector kernels.
inline VectorKernelField nl_drift(const VectorKernelField& kernel_slice, const Field& rho) {
    VectorKernelField out;
    for (const auto& comp : kernel_slice.comp) out.comp.push_back(convolve(comp, rho));
    return out;
}

namespace detail {

// Shared spectral machinery for the mild-equation sweeps. All quantities live
// on the DFT index set of the configured grid.
class DuhamelWorkspace {
public:
    DuhamelWorkspace(const SolverConfig& cfg) : cfg_(cfg), grid_(cfg.grid()) {
        const int n = grid_.n_per_axis();
        const std::size_t nn = grid_.total_nodes();
        symbols_.resize(nn);
        freqs_.resize(static_cast<std::size_t>(grid_.dim()) * nn);
        const double nyq = std::abs(grid_.freq(n / 2));
        if (grid_.dim() == 1) {
            for (int k = 0; k < n; ++k) {
                double xi = grid_.freq(k);
                symbols_[k] = cfg.law.symbol(xi, 0.0);
                freqs_[k] = std::abs(xi) >= nyq ? 0.0 : xi;
            }
        } else {
            std::size_t idx = 0;
            for (int k0 = 0; k0 < n; ++k0) {
                for (int k1 = 0; k1 < n; ++k1, ++idx) {
                    double xi0 = grid_.freq(k0), xi1 = grid_.freq(k1);
                    symbols_[idx] = cfg.law.symbol(xi0, xi1);
                    freqs_[idx] = std::abs(xi0) >= nyq ? 0.0 : xi0;
                    freqs_[nn + idx] = std::abs(xi1) >= nyq ? 0.0 : xi1;
                }
            }
        }

        const int M = cfg.time_nodes;
        times_.resize(M + 1);
        for (int i = 0; i <= M; ++i) times_[i] = cfg.t + (cfg.T - cfg.t) * i / M;

        mu_hat_ = to_spectral(cfg.initial.as_field);
        free_.resize(M + 1);
        free_[0] = cfg.initial.as_field;
        for (int i = 1; i <= M; ++i) {
            SpectralField s = mu_hat_;
            double dt = times_[i] - cfg.t;
            for (std::size_t k = 0; k < s.coefficients.size(); ++k)
                s.coefficients[k] *= std::exp(-dt * symbols_[k]);
            free_[i] = to_physical(s, "free_evolution");
        }
    }

    const std::vector<double>& times() const { return times_; }
    const std::vector<Field>& free_evolution() const { return free_; }

    /// Divergence of the drift term in spectral form: sum_a i xi_a F[rho B^a].
    SpectralField divergence_transform(const Field& rho, const VectorKernelField& drift) const {
        const std::size_t nn = grid_.total_nodes();
        SpectralField h(grid_);
        for (int a = 0; a < grid_.dim(); ++a) {
            SpectralField w = to_spectral(pointwise(rho, drift.comp[a]));
            const double* fr = freqs_.data() + static_cast<std::size_t>(a) * nn;
            for (std::size_t k = 0; k < nn; ++k)
                h.coefficients[k] += std::complex<double>(0.0, fr[k]) * w.coefficients[k];
        }
        return h;
    }

    /// One sweep of the mild map: given the divergence transforms H_j at every
    /// node of the input iterate, produce the new slice at node i.
    Field new_slice(int i, const std::vector<SpectralField>& h) const {
        const std::size_t nn = grid_.total_nodes();
        const double dv = times_[1] - times_[0];
        SpectralField acc = mu_hat_;
        double span = times_[i] - cfg_.t;
        for (std::size_t k = 0; k < nn; ++k) acc.coefficients[k] *= std::exp(-span * symbols_[k]);

        const bool midpoint = cfg_.quadrature == SolverConfig::Quadrature::midpoint;
        for (int j = 1; j <= i; ++j) {
            double v = midpoint ? 0.5 * (times_[j - 1] + times_[j]) : times_[j - 1];
            double tau = times_[i] - v;
            for (std::size_t k = 0; k < nn; ++k) {
                std::complex<double> hk =
                    midpoint ? 0.5 * (h[j - 1].coefficients[k] + h[j].coefficients[k])
                             : h[j - 1].coefficients[k];
                acc.coefficients[k] -= dv * std::exp(-tau * symbols_[k]) * hk;
            }
        }
        return to_physical(acc, "duhamel_slice");
    }

    std::vector<SpectralField> transforms_of(const DensityTrajectory& traj,
                                             const std::function<VectorKernelField(int)>& drift_at) const {
        std::vector<SpectralField> h(traj.nodes());
        for (std::size_t j = 0; j < traj.nodes(); ++j)
            h[j] = divergence_transform(traj.slices[j], drift_at(static_cast<int>(j)));
        return h;
    }

    VectorKernelField kernel_drift(int j, const Field& rho) const {
        return nl_drift(cfg_.kernel.at_time(times_[j]), rho);
    }

private:
    const SolverConfig& cfg_;
    Grid grid_;
    std::vector<double> symbols_;
    std::vector<double> freqs_;
    std::vector<double> times_;
    SpectralField mu_hat_;
    std::vector<Field> free_;
};

inline DensityTrajectory free_trajectory(const DuhamelWorkspace& ws) {
    DensityTrajectory traj;
    traj.times = ws.times();
    traj.slices = ws.free_evolution();
    traj.refresh_diagnostics();
    return traj;
}

}  // namespace detail

/// Right-hand side of the mild equation at time s, evaluated on the trajectory
/// iterate: free term minus the time quadrature of {rho B_rho} * grad p.
inline Field duhamel_rhs(const DensityTrajectory& traj, double s, const SolverConfig& cfg) {
    cfg.validate();
    if (!(s > cfg.t) || s > cfg.T + 1e-12) throw ConfigError("duhamel_rhs: s outside (t, T]");
    detail::DuhamelWorkspace ws(cfg);
    if (traj.nodes() != ws.times().size()) throw ConfigError("duhamel_rhs: trajectory/time-grid mismatch");
    auto h = ws.transforms_of(traj, [&](int j) { return ws.kernel_drift(j, traj.slices[j]); });
    // snap s to the nearest node of the configured grid
    double dv = ws.times()[1] - ws.times()[0];
    int i = static_cast<int>(std::lround((s - cfg.t) / dv));
    if (i < 1 || std::abs(ws.times()[i] - s) > 1e-9 * std::max(1.0, std::abs(s)))
        throw ConfigError("duhamel_rhs: s must lie on the configured time grid");
    return ws.new_slice(i, h);
}

struct PicardResult {
    DensityTrajectory trajectory;
    std::vector<double> increments;  // sup_s L1 increment per iteration
    bool converged = false;
    int iterations = 0;
};

/// Picard fixed-point iteration for the mild non-linear Fokker-Planck
/// equation. Default initial guess is the free evolution of mu.
inline PicardResult picard_solve(const SolverConfig& cfg,
                                 std::optional<DensityTrajectory> init_guess = std::nullopt) {
    cfg.validate();
    detail::DuhamelWorkspace ws(cfg);
    DensityTrajectory current = init_guess ? std::move(*init_guess) : detail::free_trajectory(ws);
    if (current.nodes() != ws.times().size())
        throw ConfigError("picard_solve: initial guess nodes do not match the time grid");

    PicardResult result;
    const int M = cfg.time_nodes;
    for (int k = 0; k < cfg.picard_max; ++k) {
        auto h = ws.transforms_of(current, [&](int j) { return ws.kernel_drift(j, current.slices[j]); });
        DensityTrajectory next;
        next.times = ws.times();
        next.slices.resize(M + 1);
        next.slices[0] = current.slices[0];
        double increment = 0.0;
        for (int i = 1; i <= M; ++i) {
            next.slices[i] = ws.new_slice(i, h);
            for (double v : next.slices[i].values)
                if (!std::isfinite(v))
                    throw NumericalDivergence("picard_solve: NaN in iterate", k, ws.times()[i]);
            increment = std::max(increment, lp_norm(next.slices[i] - current.slices[i], 1.0));
        }
        current = std::move(next);
        result.increments.push_back(increment);
        result.iterations = k + 1;
        if (increment < cfg.picard_tol) {
            result.converged = true;
            break;
        }
    }
    if (!result.converged)
        warnings::emit("picard_solve: no convergence after " + std::to_string(cfg.picard_max) +
                       " iterations; returning the last iterate");
    current.refresh_diagnostics();
    result.trajectory = std::move(current);
    return result;
}

/// Linear solve with a frozen drift sequence (the decoupled flow): same mild
/// map, but the drift is given per node instead of recomputed from the iterate.
inline PicardResult frozen_drift_solve(const SolverConfig& cfg, const std::vector<VectorKernelField>& drift,
                                       const InitialLaw& mu) {
    SolverConfig local = cfg;
    local.initial = mu;
    local.validate();
    detail::DuhamelWorkspace ws(local);
    if (drift.size() != ws.times().size())
        throw ConfigError("frozen_drift_solve: drift sequence does not match the time grid");
    DensityTrajectory current = detail::free_trajectory(ws);

    PicardResult result;
    const int M = local.time_nodes;
    for (int k = 0; k < local.picard_max; ++k) {
        auto h = ws.transforms_of(current, [&](int j) { return drift[j]; });
        DensityTrajectory next;
        next.times = ws.times();
        next.slices.resize(M + 1);
        next.slices[0] = current.slices[0];
        double increment = 0.0;
        for (int i = 1; i <= M; ++i) {
            next.slices[i] = ws.new_slice(i, h);
            for (double v : next.slices[i].values)
                if (!std::isfinite(v))
                    throw NumericalDivergence("frozen_drift_solve: NaN in iterate", k, ws.times()[i]);
            increment = std::max(increment, lp_norm(next.slices[i] - current.slices[i], 1.0));
        }
        current = std::move(next);
        result.increments.push_back(increment);
        result.iterations = k + 1;
        if (increment < local.picard_tol) {
            result.converged = true;
            break;
        }
    }
    current.refresh_diagnostics();
    result.trajectory = std::move(current);
    return result;
}

/// Smooth compactly supported space-time test function sampled on the
/// trajectory grid, with its analytic time derivative.
struct SpaceTimeTestFunction {
    std::vector<Field> phi;
    std::vector<Field> dphi_ds;
    std::string label;
};

/// Battery of separable bump test functions vanishing at s = T and away from
/// the spatial boundary.
inline std::vector<SpaceTimeTestFunction> make_test_battery(const Grid& g, const std::vector<double>& times,
                                                            int count = 5) {
    std::vector<SpaceTimeTestFunction> battery;
    const double t0 = times.front(), t1 = times.back();
    const int n = g.n_per_axis();
    for (int k = 0; k < count; ++k) {
        double center = (k % 2 == 0 ? 1.0 : -1.0) * 0.15 * g.extent() * (k / 2);
        double width = g.extent() * (0.35 + 0.05 * (k % 3));
        Field space(g, 0.0, "test_space");
        for (std::size_t i = 0; i < space.size(); ++i) {
            double x0, x1 = 0.0;
            if (g.dim() == 1) {
                x0 = g.coord(static_cast<int>(i));
            } else {
                x0 = g.coord(static_cast<int>(i) / n);
                x1 = g.coord(static_cast<int>(i) % n);
            }
            double r = std::sqrt((x0 - center) * (x0 - center) + x1 * x1) / width;
            space.values[i] = detail::bump_window(r);
        }
        SpaceTimeTestFunction fn;
        fn.label = "bump_" + std::to_string(k);
        const double omega = 1.0 + 0.5 * k;
        for (double s : times) {
            double u = (s - t0) / (t1 - t0);
            double env = (1.0 - u) * (1.0 - u) * (1.0 + 0.3 * std::sin(omega * u));
            double denv = (-2.0 * (1.0 - u) * (1.0 + 0.3 * std::sin(omega * u)) +
                           (1.0 - u) * (1.0 - u) * 0.3 * omega * std::cos(omega * u)) /
                          (t1 - t0);
            fn.phi.push_back(env * space);
            fn.dphi_ds.push_back(denv * space);
        }
        battery.push_back(std::move(fn));
    }
    return battery;
}

/// Normalized residual of the distributional Fokker-Planck identity over a
/// battery of test functions; the three blocks are the initial pairing, the
/// drift transport term, and the generator term.
inline double weak_form_residual(const DensityTrajectory& traj, const SolverConfig& cfg,
                                 const std::vector<SpaceTimeTestFunction>& battery) {
    const Grid& g = traj.grid();
    const std::vector<double>& times = traj.times;
    const std::size_t M = times.size() - 1;
    double worst = 0.0;
    for (const auto& fn : battery) {
        if (fn.phi.size() != times.size()) throw ConfigError("weak_form_residual: battery/time mismatch");
        for (const auto& slice : fn.phi)
            if (boundary_mass(slice) > 1e-6 && lp_norm(slice, kInf) > 0.0)
                throw ConfigError("weak_form_residual: test function not compactly supported");
        if (lp_norm(fn.phi.back(), kInf) > 1e-12 * std::max(1.0, lp_norm(fn.phi.front(), kInf)))
            throw ConfigError("weak_form_residual: test function must vanish at s = T");

        double term_init = -inner_product(fn.phi.front(), cfg.initial.as_field);

        // trapezoid in time for the two space-time integrals
        double term_drift = 0.0, term_gen = 0.0;
        for (std::size_t i = 0; i <= M; ++i) {
            double w = (i == 0 || i == M) ? 0.5 : 1.0;
            w *= (times.back() - times.front()) / M;

            VectorKernelField drift = nl_drift(cfg.kernel.at_time(times[i]), traj.slices[i]);
            double transport = 0.0;
            const double nyq = std::abs(g.freq(g.n_per_axis() / 2));
            for (int a = 0; a < g.dim(); ++a) {
                Field grad_phi = detail::apply_multiplier(
                    fn.phi[i],
                    [&](double xa, double xb) -> std::complex<double> {
                        double xi = a == 0 ? xa : xb;
                        if (std::abs(xi) >= nyq) return 0.0;
                        return std::complex<double>(0.0, xi);
                    },
                    "weak_form_grad");
                transport += inner_product(pointwise(traj.slices[i], drift.comp[a]), grad_phi);
            }
            term_drift -= w * transport;

            Field gen_phi = detail::apply_multiplier(
                fn.phi[i], [&](double a2, double b2) { return -cfg.law.symbol(a2, b2); },
                "weak_form_generator");
            term_gen += w * (inner_product(traj.slices[i], (-1.0) * fn.dphi_ds[i]) -
                             inner_product(traj.slices[i], gen_phi));
        }
        double scale = std::max({std::abs(term_init), std::abs(term_drift), std::abs(term_gen), 1e-300});
        worst = std::max(worst, std::abs(term_init + term_drift + term_gen) / scale);
    }
    return worst;
}

struct AprioriReport {
    std::vector<double> horizons;
    std::vector<double> plain_integrals;   // int_t^T |rho(s)|^{rbar}_{B} ds
    std::vector<double> weighted_norms;    // weighted Bochner norm up to each horizon
    double theta_plain = 0.0;              // fitted growth exponents in T - t
    double theta_weighted = 0.0;
};

namespace detail {

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// A priori bounds: the L^rbar-in-time Besov integral and the weighted norm of
/// the solution, swept over shrinking horizons, with fitted growth exponents.
/// The Besov index is B^{-beta + vartheta*Gamma}_{p',q'}.
inline AprioriReport apriori_report(const SolverConfig& cfg, double vartheta, double rbar,
                                    const std::vector<double>& horizons) {
    if (!(vartheta >= 0.0 && vartheta < 1.0)) throw ConfigError("apriori_report: vartheta in [0,1)");
    const ParameterSet& ps = cfg.params;
    double G = gap(ps);
    double lo = ps.r.conj().value();
    double hi_den = (-ps.beta + vartheta * G + ps.d * ps.p.inv()) / ps.alpha;
    double hi = hi_den > 0.0 ? 1.0 / hi_den : kInf;
    if (rbar < lo || rbar >= hi)
        throw ConfigError("apriori_report: rbar outside the vartheta-adjusted admissible interval");

    BesovIndex idx(-ps.beta + vartheta * G, ps.p.conj().value(), ps.q.conj().value());
    AprioriReport rep;
    rep.horizons = horizons;
    for (double h : horizons) {
        SolverConfig local = cfg;
        local.T = cfg.t + h;
        auto sol = picard_solve(local);
        if (!sol.converged) throw NumericalDivergence("apriori_report: member solve did not converge");
        const auto& traj = sol.trajectory;
        std::vector<double> norms(traj.nodes());
        for (std::size_t i = 0; i < traj.nodes(); ++i)
            norms[i] = besov_norm(traj.slices[i], idx, cfg.law);
        // right-endpoint rule: the s = t node may be singular for rough mu
        double dt = traj.times[1] - traj.times[0];
        double acc = 0.0;
        for (std::size_t i = 1; i < traj.nodes(); ++i) acc += dt * std::pow(norms[i], rbar);
        rep.plain_integrals.push_back(acc);
        rep.weighted_norms.push_back(
            weighted_bochner_norm(traj.times, norms, rbar, cfg.law.alpha, local.T));
    }
    if (horizons.size() >= 2) {
        rep.theta_plain = detail::loglog_slope(rep.horizons, rep.plain_integrals);
        rep.theta_weighted = detail::loglog_slope(rep.horizons, rep.weighted_norms);
    }
    return rep;
}

struct EpsilonStabilityRow {
    double eps_coarse = 0.0;
    double eps_fine = 0.0;
    double sup_l1 = 0.0;       // sup_s L1 distance of consecutive solutions
    double besov_lr = 0.0;     // L^rbar-in-time Besov distance
    double kernel_dist = 0.0;  // |b^{eps_k} - b^{eps_j}| in B^{beta - vartheta*Gamma}_{p,q}
};

struct EpsilonStabilityTable {
    std::vector<EpsilonStabilityRow> rows;
    bool sup_l1_decreasing = false;
    double sup_l1_last_over_first = 0.0;
    double besov_last_over_first = 0.0;
    double ratio_spread = 0.0;  // max/min of besov distance / kernel distance
};

/// Solve along a decreasing mollification ladder and report the Cauchy table.
inline EpsilonStabilityTable epsilon_stability_study(const SolverConfig& cfg_template,
                                                     const KernelSpec& spec,
                                                     const std::vector<double>& eps_list, double vartheta,
                                                     double rbar) {
    if (eps_list.size() < 3) throw ConfigError("epsilon_stability_study: need at least 3 epsilons");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("epsilon_stability_study: eps list must decrease");

    const Grid& g = cfg_template.grid();
    const ParameterSet& ps = cfg_template.params;
    double G = gap(ps);
    BesovIndex sol_idx(-ps.beta + vartheta * G, ps.p.conj().value(), ps.q.conj().value());
    BesovIndex ker_idx(ps.beta - vartheta * G, ps.p.value(), ps.q.value());

    std::vector<DensityTrajectory> solutions;
    std::vector<MollifiedKernel> kernels;
    for (double eps : eps_list) {
        MollifiedKernel mk = mollify(spec, g, eps, cfg_template.law);
        SolverConfig local = cfg_template;
        local.kernel = mk.smoothed;
        auto sol = picard_solve(local);
        if (!sol.converged)
            throw NumericalDivergence("epsilon_stability_study: member solve diverged");
        solutions.push_back(std::move(sol.trajectory));
        kernels.push_back(std::move(mk));
    }

    EpsilonStabilityTable table;
    for (std::size_t k = 0; k + 1 < solutions.size(); ++k) {
        EpsilonStabilityRow row;
        row.eps_coarse = eps_list[k];
        row.eps_fine = eps_list[k + 1];
        row.sup_l1 = sup_l1_distance(solutions[k], solutions[k + 1]);

        const auto& ta = solutions[k];
        const auto& tb = solutions[k + 1];
        double dt = ta.times[1] - ta.times[0];
        double acc = 0.0;
        for (std::size_t i = 1; i < ta.nodes(); ++i)
            acc += dt * std::pow(besov_norm(ta.slices[i] - tb.slices[i], sol_idx, cfg_template.law), rbar);
        row.besov_lr = std::pow(acc, 1.0 / rbar);

        double kd = 0.0;
        for (int c = 0; c < g.dim(); ++c)
            kd = std::max(kd, besov_norm(kernels[k].smoothed.base.comp[c] -
                                             kernels[k + 1].smoothed.base.comp[c],
                                         ker_idx, cfg_template.law));
        row.kernel_dist = kd;
        table.rows.push_back(row);
    }

    table.sup_l1_decreasing = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (table.rows[i].sup_l1 > table.rows[i - 1].sup_l1 * 1.05) table.sup_l1_decreasing = false;
    table.sup_l1_last_over_first = table.rows.back().sup_l1 / table.rows.front().sup_l1;
    table.besov_last_over_first = table.rows.back().besov_lr / table.rows.front().besov_lr;
    double rmin = kInf, rmax = 0.0;
    for (const auto& row : table.rows) {
        double ratio = row.besov_lr / row.kernel_dist;
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
    }
    table.ratio_spread = rmax / rmin;
    return table;
}

/// Run the fixed-point iteration from two different admissible starting
/// guesses and return the sup-L1 distance of the limits.
inline double uniqueness_probe(const SolverConfig& cfg) {
    auto first = picard_solve(cfg);
    if (!first.converged) throw NumericalDivergence("uniqueness_probe: first run diverged");

    // second path: free evolution of a perturbed initial law, with the first
    // slice reset through the true-mu mild map
    const Grid& g = cfg.grid();
    Field perturbed = cfg.initial.as_field;
    for (std::size_t i = 0; i < perturbed.size(); ++i) {
        double x = g.dim() == 1 ? g.coord(static_cast<int>(i))
                                : g.coord(static_cast<int>(i) / g.n_per_axis());
        perturbed.values[i] *= 1.0 + 0.2 * std::cos(std::numbers::pi * x / g.extent());
    }
    SolverConfig ghost = cfg;
    ghost.initial = InitialLaw::custom(perturbed);
    detail::DuhamelWorkspace ghost_ws(ghost);
    DensityTrajectory guess = detail::free_trajectory(ghost_ws);
    guess.slices[0] = cfg.initial.as_field;  // same equation, different iteration path
    guess.slices[1] = duhamel_rhs(guess, guess.times[1], cfg);

    auto second = picard_solve(cfg, guess);
    if (!second.converged) throw NumericalDivergence("uniqueness_probe: second run diverged");
    return sup_l1_distance(first.trajectory, second.trajectory);
}

}  // namespace mckv
