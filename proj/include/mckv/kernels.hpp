#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mckv/besov.hpp"
#include "mckv/grid.hpp"
#include "mckv/semigroup.hpp"

namespace mckv {

enum class KernelFamily { zero, constant_vector, smooth_bump, power, grad_of_holder };

inline std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::zero: return "zero";
        case KernelFamily::constant_vector: return "constant-vector";
        case KernelFamily::smooth_bump: return "smooth-bump";
        case KernelFamily::power: return "power";
        case KernelFamily::grad_of_holder: return "grad-of-holder";
    }
    return "?";
}

enum class TimeProfile { constant, sine };

/// Interaction-kernel recipe: which family, its nominal regularity, and the
/// Lebesgue-Besov class (beta, p, q, r) it claims under the standing assumption.
struct KernelSpec {
    KernelFamily family = KernelFamily::zero;
    double beta = 0.0;               // nominal regularity of singular families
    double amplitude = 1.0;
    std::vector<double> constant;    // constant-vector value per axis
    double bump_width = 2.0;         // smooth-bump support radius
    TimeProfile time_profile = TimeProfile::constant;
    double time_omega = 0.0;         // sine profile: 1 + 0.5 sin(omega s)
    std::uint64_t seed = 1;          // grad-of-holder synthesis
    struct Claimed {
        double beta = 0.0;
        double p = kInf, q = kInf, r = kInf;
    } claimed_class;

    void validate() const {
        if (family == KernelFamily::power || family == KernelFamily::grad_of_holder) {
            if (!(beta > -1.0 && beta <= 0.0))
                throw ConfigError("KernelSpec: singular families need beta in (-1,0]");
        }
    }
};

/// R^d-valued grid function: one scalar Field per component.
struct VectorKernelField {
    std::vector<Field> comp;

    const Grid& grid() const { return comp.at(0).grid; }
    int dim() const { return static_cast<int>(comp.size()); }

    double sup_norm() const {
        double m = 0.0;
        for (const auto& c : comp) m = std::max(m, lp_norm(c, kInf));
        return m;
    }
};

/// Grid realization of b: a spatial VectorKernelField plus a scalar time factor
/// (separable time dependence; constant profiles have factor identically 1).
struct RealizedKernel {
    KernelSpec spec;
    VectorKernelField base;
    std::function<double(double)> time_factor;

    bool time_dependent() const { return spec.time_profile != TimeProfile::constant; }

    double factor(double s) const { return time_factor ? time_factor(s) : 1.0; }

    VectorKernelField at_time(double s) const {
        VectorKernelField out = base;
        double c = factor(s);
        if (c != 1.0)
            for (auto& f : out.comp)
                for (auto& v : f.values) v *= c;
        return out;
    }

    double sup_norm_all_time() const { return base.sup_norm() * (time_dependent() ? 1.5 : 1.0); }
};

namespace detail {

inline Field power_kernel_field(const Grid& g, double beta, double amplitude) {
    if (g.dim() != 1) throw ConfigError("realize_kernel: power family is 1-d only");
    Field f(g, 0.0, "power beta=" + std::to_string(beta));
    for (int k = 0; k < g.n_per_axis(); ++k) {
        double x = g.coord(k);
        // cell containing 0: odd integrand averages to zero over the cell
        f.values[k] = x == 0.0 ? 0.0 : amplitude * (x > 0 ? 1.0 : -1.0) * std::pow(std::abs(x), beta);
    }
    return f;
}

inline Field bump_field(const Grid& g, double width, double amplitude) {
    Field f(g, 0.0, "smooth_bump");
    const int n = g.n_per_axis();
    for (std::size_t i = 0; i < f.size(); ++i) {
        double x0, x1 = 0.0;
        if (g.dim() == 1) {
            x0 = g.coord(static_cast<int>(i));
        } else {
            x0 = g.coord(static_cast<int>(i) / n);
            x1 = g.coord(static_cast<int>(i) % n);
        }
        double r = std::sqrt(x0 * x0 + x1 * x1) / width;
        f.values[i] = amplitude * bump_window(r);
    }
    return f;
}

// Synthesize a C^{beta+1} potential spectrally (decay |xi|^{-(beta+1)-d/2-0.01}
// with random phases), then differentiate; pointwise sampling of a genuine
// distribution is meaningless, so the class is controlled by construction.
inline std::vector<Field> grad_of_holder_fields(const Grid& g, double beta, double amplitude,
                                                std::uint64_t seed) {
    SplitMix64 rng(mix_keys(seed, 0x6b65726eULL));
    const int n = g.n_per_axis();
    const double decay = (beta + 1.0) + 0.5 * g.dim() + 0.01;
    SpectralField pot(g);
    auto coeff = [&](double xi0, double xi1) -> std::complex<double> {
        double r = std::sqrt(xi0 * xi0 + xi1 * xi1);
        if (r == 0.0) return 0.0;
        double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        double amp = std::pow(r, -decay);
        return std::complex<double>(std::cos(phase), std::sin(phase)) * amp;
    };
    if (g.dim() == 1) {
        for (int k = 0; k < n; ++k) pot.coefficients[k] = coeff(g.freq(k), 0.0);
    } else {
        std::size_t idx = 0;
        for (int k0 = 0; k0 < n; ++k0)
            for (int k1 = 0; k1 < n; ++k1, ++idx) pot.coefficients[idx] = coeff(g.freq(k0), g.freq(k1));
    }
    Field potential = to_physical(pot, "holder_potential");
    double scale = amplitude / std::max(lp_norm(potential, kInf), 1e-300);
    potential = scale * potential;

    std::vector<Field> out;
    const double nyq = std::abs(g.freq(n / 2));
    for (int axis = 1; axis <= g.dim(); ++axis) {
        Field b = apply_multiplier(
            potential,
            [&](double a, double bxi) -> std::complex<double> {
                double xi = axis == 1 ? a : bxi;
                if (std::abs(xi) >= nyq) return 0.0;
                return std::complex<double>(0.0, xi);
            },
            "grad_of_holder");
        b.tag = "grad_of_holder axis=" + std::to_string(axis);
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace detail

/// Realize the kernel recipe on a grid.
inline RealizedKernel realize_kernel(const KernelSpec& spec, const Grid& g) {
    spec.validate();
    RealizedKernel out;
    out.spec = spec;
    switch (spec.family) {
        case KernelFamily::zero:
            for (int a = 0; a < g.dim(); ++a) out.base.comp.emplace_back(g, 0.0, "zero");
            break;
        case KernelFamily::constant_vector: {
            if (spec.constant.size() < static_cast<std::size_t>(g.dim()))
                throw ConfigError("realize_kernel: constant-vector needs d components");
            for (int a = 0; a < g.dim(); ++a)
                out.base.comp.emplace_back(g, spec.constant[a], "constant");
            break;
        }
        case KernelFamily::smooth_bump:
            out.base.comp.push_back(detail::bump_field(g, spec.bump_width, spec.amplitude));
            for (int a = 1; a < g.dim(); ++a) out.base.comp.emplace_back(g, 0.0, "smooth_bump");
            break;
        case KernelFamily::power:
            out.base.comp.push_back(detail::power_kernel_field(g, spec.beta, spec.amplitude));
            break;
        case KernelFamily::grad_of_holder:
            out.base.comp = detail::grad_of_holder_fields(g, spec.beta, spec.amplitude, spec.seed);
            break;
    }
    if (spec.time_profile == TimeProfile::sine) {
        double omega = spec.time_omega;
        out.time_factor = [omega](double s) { return 1.0 + 0.5 * std::sin(omega * s); };
    }
    return out;
}

/// b^eps: spatial smoothing by the stable semigroup at time eps; time-dependent
/// kernels are additionally convolved in time with the mass-1 bump
/// eta_eps = eps^{-1} eta(./eps).
struct MollifiedKernel {
    KernelSpec base_spec;
    double epsilon = 0.0;
    RealizedKernel smoothed;

    VectorKernelField at_time(double s) const { return smoothed.at_time(s); }
    double sup_norm() const { return smoothed.base.sup_norm(); }
};

namespace detail {

// mass-1 time mollifier on (-1,1)
inline double eta_bump(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    static const double norm = [] {
        double acc = 0.0;
        const int K = 4001;
        for (int i = 0; i < K; ++i) {
            double x = -1.0 + 2.0 * (i + 0.5) / K;
            acc += std::exp(-1.0 / (1.0 - x * x)) * (2.0 / K);
        }
        return acc;
    }();
    return std::exp(-1.0 / (1.0 - u * u)) / norm;
}

}  // namespace detail

inline MollifiedKernel mollify(const KernelSpec& spec, const Grid& g, double eps, const StableLaw& law) {
    if (!(eps > 0.0)) throw ConfigError("mollify: epsilon must be positive");
    if (eps < resolution_floor(g, law))
        throw ConfigError("mollify: epsilon below the resolution floor (2dx)^alpha");
    RealizedKernel realized = realize_kernel(spec, g);
    MollifiedKernel out;
    out.base_spec = spec;
    out.epsilon = eps;
    out.smoothed.spec = spec;
    for (const auto& c : realized.base.comp)
        out.smoothed.base.comp.push_back(semigroup_apply(c, eps, law));
    if (realized.time_dependent()) {
        auto raw = realized.time_factor;
        out.smoothed.time_factor = [raw, eps](double s) {
            // (raw * eta_eps)(s) by midpoint quadrature on [-eps, eps]
            const int K = 64;
            double acc = 0.0;
            for (int i = 0; i < K; ++i) {
                double u = -1.0 + 2.0 * (i + 0.5) / K;
                acc += detail::eta_bump(u) * raw(s - eps * u) * (2.0 / K);
            }
            return acc;
        };
    }
    return out;
}

/// Besov distance between the kernel and its mollification, componentwise max.
inline double kernel_besov_distance(const RealizedKernel& a, const VectorKernelField& b,
                                    const BesovIndex& idx, const StableLaw& law,
                                    ThermicSettings settings = {}) {
    double m = 0.0;
    for (int c = 0; c < a.base.dim(); ++c)
        m = std::max(m, besov_norm(a.base.comp[c] - b.comp[c], idx, law, settings));
    return m;
}

struct MollifierConvergenceRow {
    double eps;
    double distance;
};

struct MollifierConvergenceTable {
    std::vector<MollifierConvergenceRow> rows;
    std::optional<bool> decreasing_with_slack;  // 5% slack; unset for single-row tables
    std::optional<double> last_over_first;
};

/// Table of (eps, |b - b^eps|_{B^{beta_tilde}_{p,q}}) over a decreasing eps
/// list. Trend flags are only populated when the list has at least two rows.
inline MollifierConvergenceTable mollifier_convergence(const KernelSpec& spec, const Grid& g,
                                                       double beta_tilde, std::vector<double> eps_list,
                                                       const StableLaw& law, double p = kInf,
                                                       double q = kInf, ThermicSettings settings = {}) {
    spec.validate();
    if (!(beta_tilde < spec.beta))
        throw ConfigError("mollifier_convergence: need beta_tilde < beta strictly");
    RealizedKernel realized = realize_kernel(spec, g);
    BesovIndex idx(beta_tilde, p, q);
    MollifierConvergenceTable table;
    for (double eps : eps_list) {
        MollifiedKernel mk = mollify(spec, g, eps, law);
        table.rows.push_back({eps, kernel_besov_distance(realized, mk.smoothed.base, idx, law, settings)});
    }
    if (table.rows.size() >= 2) {
        bool dec = true;
        for (std::size_t i = 1; i < table.rows.size(); ++i)
            if (table.rows[i].distance > 1.05 * table.rows[i - 1].distance) dec = false;
        table.decreasing_with_slack = dec;
        table.last_over_first = table.rows.back().distance / table.rows.front().distance;
    }
    return table;
}

}  // namespace mckv
