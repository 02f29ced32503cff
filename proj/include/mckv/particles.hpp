#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mckv/detail/rng.hpp"
#include "mckv/fokker_planck.hpp"
#include "mckv/grid.hpp"
#include "mckv/kernels.hpp"
#include "mckv/semigroup.hpp"

namespace mckv {

namespace detail {

/// One-sided sigma-stable draw with Laplace transform exp(-lambda^sigma),
/// sigma in (0,1) (Kanter's representation).
inline double one_sided_stable(double sigma, SplitMix64& rng) {
    const double u = rng.uniform(0.0, std::numbers::pi);
    const double w = rng.exponential();
    const double a = std::pow(std::sin(sigma * u), sigma / (1.0 - sigma)) * std::sin((1.0 - sigma) * u) /
                     std::pow(std::sin(u), 1.0 / (1.0 - sigma));
    return std::pow(a / w, (1.0 - sigma) / sigma);
}

/// Symmetric alpha-stable draw with characteristic function exp(-|xi|^alpha)
/// (Chambers-Mallows-Stuck).
inline double symmetric_stable(double alpha, SplitMix64& rng) {
    const double v = rng.uniform(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    const double w = rng.exponential();
    if (alpha == 1.0) return std::tan(v);
    const double num = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
    const double rem = std::pow(std::cos((alpha - 1.0) * v) / w, (1.0 - alpha) / alpha);
    return num * rem;
}

}  // namespace detail

/// Increment of the driving process over a step dt, scaled so the
/// characteristic function is exp(-dt |xi|^alpha) (isotropic) or
/// exp(-dt sum |xi_i|^alpha) (coordinate-product). alpha = 2 is Gaussian with
/// variance 2 dt per coordinate.
inline std::array<double, 3> sample_stable_increment(const StableLaw& law, double dt, int d,
                                                     detail::SplitMix64& rng) {
    if (!(dt > 0.0)) throw ConfigError("sample_stable_increment: dt must be positive");
    if (d < 1 || d > 3) throw ConfigError("sample_stable_increment: d in {1,2,3}");
    std::array<double, 3> out{0.0, 0.0, 0.0};
    if (law.alpha == 2.0) {
        const double scale = std::sqrt(2.0 * dt);
        for (int a = 0; a < d; ++a) out[a] = scale * rng.normal();
        return out;
    }
    const double scale = std::pow(dt, 1.0 / law.alpha);
    if (law.mode == StableLaw::Mode::isotropic) {
        // subordination: A positive (alpha/2)-stable, increment = sqrt(2A) G
        const double A = detail::one_sided_stable(0.5 * law.alpha, rng);
        const double r = std::sqrt(2.0 * A);
        for (int a = 0; a < d; ++a) out[a] = scale * r * rng.normal();
    } else {
        for (int a = 0; a < d; ++a) out[a] = scale * detail::symmetric_stable(law.alpha, rng);
    }
    return out;
}

/// N interacting particles with immutable per-particle ids; the noise stream
/// of a particle is derived from (seed, id, step), so permuting the ensemble
/// permutes the trajectories (up to rounding: the pair sum in the drift is
/// accumulated in slot order).
struct ParticleEnsemble {
    int N = 0;
    int d = 1;
    std::vector<double> positions;  // N x d, row-major
    std::vector<std::uint32_t> ids;
    double time = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t steps_done = 0;
    std::uint64_t wrap_events = 0;

    double* pos(int i) { return positions.data() + static_cast<std::size_t>(i) * d; }
    const double* pos(int i) const { return positions.data() + static_cast<std::size_t>(i) * d; }
};

struct SimConfig {
    int N = 1000;
    double dt = 0.01;
    double horizon = 0.5;
    StableLaw law;
    MollifiedKernel kernel;  // the limit SDE's drift only exists through the density
    std::uint64_t seed = 1;
    InitialLaw initial;

    SimConfig(int n, double dt_, double horizon_, StableLaw law_, MollifiedKernel k, std::uint64_t seed_,
              InitialLaw init)
        : N(n), dt(dt_), horizon(horizon_), law(law_), kernel(std::move(k)), seed(seed_),
          initial(std::move(init)) {}

    const Grid& grid() const { return kernel.smoothed.base.grid(); }

    void validate() const {
        if (N < 2) throw ConfigError("SimConfig: need at least 2 particles");
        if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("SimConfig: dt and horizon must be positive");
        law.require_subcritical("SimConfig");
        if (kernel.smoothed.base.comp.empty()) throw ConfigError("SimConfig: kernel not realized");
    }
};

/// Draw initial positions from the InitialLaw density by inverse-CDF over grid
/// cells plus a uniform offset inside the cell. Deterministic in the seed.
inline ParticleEnsemble sample_initial_ensemble(const SimConfig& cfg) {
    cfg.validate();
    const Grid& g = cfg.grid();
    const Field& density = cfg.initial.as_field;
    const std::size_t cells = density.size();
    std::vector<double> cdf(cells);
    double acc = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        acc += std::max(density.values[c], 0.0);
        cdf[c] = acc;
    }
    for (auto& v : cdf) v /= acc;

    ParticleEnsemble ens;
    ens.N = cfg.N;
    ens.d = g.dim();
    ens.positions.resize(static_cast<std::size_t>(cfg.N) * g.dim());
    ens.ids.resize(cfg.N);
    ens.seed = cfg.seed;
    const int n = g.n_per_axis();
    for (int i = 0; i < cfg.N; ++i) {
        ens.ids[i] = static_cast<std::uint32_t>(i);
        detail::SplitMix64 rng(detail::mix_keys(cfg.seed, 0x1417ULL, i));
        double u = rng.uniform();
        std::size_t c = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        if (c >= cells) c = cells - 1;
        if (g.dim() == 1) {
            ens.pos(i)[0] = g.coord(static_cast<int>(c)) + rng.uniform() * g.dx();
        } else {
            ens.pos(i)[0] = g.coord(static_cast<int>(c) / n) + rng.uniform() * g.dx();
            ens.pos(i)[1] = g.coord(static_cast<int>(c) % n) + rng.uniform() * g.dx();
        }
    }
    return ens;
}

namespace detail {

inline double wrap_coordinate(double x, double L, bool& wrapped) {
    if (x >= -L && x < L) return x;
    wrapped = true;
    double span = 2.0 * L;
    double y = std::fmod(x + L, span);
    if (y < 0.0) y += span;
    return y - L;
}

}  // namespace detail

/// Mean-field drift at particle i: (1/N) sum_j b_eps(s, X_i - X_j), direct
/// O(N^2) summation with linear interpolation of the tabulated kernel.
inline void pairwise_drift(const ParticleEnsemble& ens, const VectorKernelField& kernel_slice,
                           std::vector<double>& drift_out) {
    const Grid& g = kernel_slice.grid();
    const int d = ens.d;
    const int N = ens.N;
    drift_out.assign(static_cast<std::size_t>(N) * d, 0.0);
    if (kernel_slice.sup_norm() == 0.0) return;
    const double inv_n = 1.0 / N;

    if (d == 1) {
        const Field& table = kernel_slice.comp[0];
        const int n = g.n_per_axis();
        const double L = g.extent();
        const double inv_dx = 1.0 / g.dx();
        const double* xs = ens.positions.data();
        for (int i = 0; i < N; ++i) {
            const double xi = xs[i];
            double acc = 0.0;
            for (int j = 0; j < N; ++j) {
                double u = (xi - xs[j] + L) * inv_dx;
                double fl = std::floor(u);
                double w = u - fl;
                int k0 = static_cast<int>(fl) % n;
                if (k0 < 0) k0 += n;
                int k1 = k0 + 1 == n ? 0 : k0 + 1;
                acc += (1.0 - w) * table.values[k0] + w * table.values[k1];
            }
            drift_out[i] = acc * inv_n;
        }
        return;
    }
    for (int i = 0; i < N; ++i) {
        const double* xi = ens.pos(i);
        for (int j = 0; j < N; ++j) {
            const double* xj = ens.pos(j);
            double diff[2] = {xi[0] - xj[0], d > 1 ? xi[1] - xj[1] : 0.0};
            for (int a = 0; a < d; ++a)
                drift_out[static_cast<std::size_t>(i) * d + a] += interpolate(kernel_slice.comp[a], diff);
        }
    }
    for (auto& v : drift_out) v *= inv_n;
}

/// One Euler-Maruyama step of the mollified McKean-Vlasov system. Particles
/// leaving the box are wrapped periodically and counted.
inline ParticleEnsemble step(const ParticleEnsemble& ens, const SimConfig& cfg) {
    const Grid& g = cfg.grid();
    VectorKernelField kernel_slice = cfg.kernel.at_time(ens.time);

    const double sup_b = kernel_slice.sup_norm();
    if (sup_b > 0.0 && cfg.dt > 0.1 * g.dx() / sup_b)
        warnings::emit("step: dt exceeds 0.1 dx / |b_eps|_inf; drift may overshoot kernel features");

    std::vector<double> drift;
    pairwise_drift(ens, kernel_slice, drift);

    ParticleEnsemble next = ens;
    next.time = ens.time + cfg.dt;
    next.steps_done = ens.steps_done + 1;
    const double L = g.extent();
    for (int i = 0; i < ens.N; ++i) {
        detail::SplitMix64 rng(detail::mix_keys(cfg.seed, ens.ids[i], ens.steps_done + 1));
        auto jump = sample_stable_increment(cfg.law, cfg.dt, ens.d, rng);
        bool wrapped = false;
        for (int a = 0; a < ens.d; ++a) {
            double x = ens.pos(i)[a] + drift[static_cast<std::size_t>(i) * ens.d + a] * cfg.dt + jump[a];
            next.pos(i)[a] = detail::wrap_coordinate(x, L, wrapped);
        }
        if (wrapped) ++next.wrap_events;
    }
    return next;
}

/// Cell histogram normalized to mass one.
inline Field empirical_density(const ParticleEnsemble& ens, const Grid& g) {
    if (ens.d != g.dim()) throw ConfigError("empirical_density: dimension mismatch");
    Field out(g, 0.0, "empirical");
    const int n = g.n_per_axis();
    long outside = 0;
    for (int i = 0; i < ens.N; ++i) {
        const double* x = ens.pos(i);
        bool ok = true;
        long flat = 0;
        for (int a = 0; a < ens.d; ++a) {
            double u = (x[a] + g.extent()) / g.dx();
            long k = static_cast<long>(std::floor(u));
            if (k < 0 || k >= n) {
                ok = false;
                break;
            }
            flat = flat * n + k;
        }
        if (!ok) {
            ++outside;
            continue;
        }
        out.values[static_cast<std::size_t>(flat)] += 1.0;
    }
    if (outside > 0.01 * ens.N)
        throw ConfigError("empirical_density: more than 1% of particles fall outside the grid");
    const double norm = 1.0 / ((ens.N - outside) * g.cell_volume());
    for (auto& v : out.values) v *= norm;
    return out;
}

struct ParticleRun {
    std::vector<double> snapshot_times;
    std::vector<Field> snapshots;                       // binned densities
    std::vector<std::vector<double>> raw_positions;     // flat N x d per snapshot
    double wrap_fraction = 0.0;
};

/// March the ensemble to the horizon, recording snapshots at the requested
/// times (snapped to step boundaries).
inline ParticleRun run_particles(const SimConfig& cfg, const std::vector<double>& snapshot_times) {
    cfg.validate();
    ParticleEnsemble ens = sample_initial_ensemble(cfg);
    ParticleRun run;
    const long steps = static_cast<long>(std::llround(cfg.horizon / cfg.dt));
    std::size_t next_snap = 0;
    std::vector<double> sorted = snapshot_times;
    std::sort(sorted.begin(), sorted.end());

    auto take_snapshot = [&](double at) {
        run.snapshot_times.push_back(at);
        run.snapshots.push_back(empirical_density(ens, cfg.grid()));
        run.raw_positions.push_back(ens.positions);
    };
    while (next_snap < sorted.size() && sorted[next_snap] <= 1e-12) {
        take_snapshot(0.0);
        ++next_snap;
    }
    for (long k = 0; k < steps; ++k) {
        ens = step(ens, cfg);
        while (next_snap < sorted.size() && sorted[next_snap] <= ens.time + 0.5 * cfg.dt) {
            take_snapshot(ens.time);
            ++next_snap;
        }
    }
    run.wrap_fraction =
        static_cast<double>(ens.wrap_events) / (static_cast<double>(ens.N) * std::max(steps, 1L));
    if (run.wrap_fraction > 1e-3)
        warnings::emit("run_particles: wrap fraction " + std::to_string(run.wrap_fraction) +
                       " above 0.1%; heavy tails are escaping the box");
    return run;
}

struct PdeComparisonRow {
    double time;
    double l1_distance;
};

/// Per-time L1 distance between binned particle marginals and solver slices.
inline std::vector<PdeComparisonRow> compare_to_pde(const ParticleRun& run,
                                                    const DensityTrajectory& traj) {
    std::vector<PdeComparisonRow> rows;
    for (std::size_t s = 0; s < run.snapshot_times.size(); ++s) {
        double target = run.snapshot_times[s];
        // nearest trajectory node
        std::size_t best = 0;
        double best_gap = kInf;
        for (std::size_t i = 0; i < traj.nodes(); ++i) {
            double gap = std::abs(traj.times[i] - target);
            if (gap < best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best_gap > 1e-6 + 1e-9 * std::abs(target))
            throw ConfigError("compare_to_pde: snapshot time not on the solver grid");
        rows.push_back({target, lp_norm(run.snapshots[s] - traj.slices[best], 1.0)});
    }
    return rows;
}

}  // namespace mckv
