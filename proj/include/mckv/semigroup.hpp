#pragma once

#include <cmath>
#include <string>

#include "mckv/grid.hpp"

namespace mckv {

/// Driving-noise law: stability index alpha plus the spectral-measure shape.
/// Isotropic means symbol |xi|^alpha; coordinate-product is the sum of 1-d
/// symmetric stable generators per axis, symbol sum_i |xi_i|^alpha.
struct StableLaw {
    enum class Mode { isotropic, coordinate_product };

    double alpha = 2.0;
    Mode mode = Mode::isotropic;

    StableLaw() = default;
    StableLaw(double a, Mode m = Mode::isotropic) : alpha(a), mode(m) {
        if (!(a > 0.0 && a <= 2.0)) throw ConfigError("StableLaw: alpha must lie in (0,2]");
    }

    double symbol(double xi0, double xi1 = 0.0) const {
        if (mode == Mode::isotropic) {
            double r2 = xi0 * xi0 + xi1 * xi1;
            if (alpha == 2.0) return r2;
            return std::pow(r2, 0.5 * alpha);
        }
        double s = std::pow(std::abs(xi0), alpha);
        if (xi1 != 0.0) s += std::pow(std::abs(xi1), alpha);
        return s;
    }

    /// The SDE/solver side of the toolkit additionally requires alpha in (1,2].
    void require_subcritical(const char* who) const {
        if (!(alpha > 1.0)) throw ConfigError(std::string(who) + ": requires alpha in (1,2]");
    }
};

/// Kernels narrower than two cells are unrepresentable on the grid.
inline double resolution_floor(const Grid& g, const StableLaw& law) {
    return std::pow(2.0 * g.dx(), law.alpha);
}

namespace detail {

template <typename MultiplierFn>
SpectralField spectral_from_multiplier(const Grid& g, MultiplierFn&& mult) {
    SpectralField s(g);
    const int n = g.n_per_axis();
    if (g.dim() == 1) {
        for (int k = 0; k < n; ++k) s.coefficients[k] = mult(g.freq(k), 0.0);
    } else {
        std::size_t idx = 0;
        for (int k0 = 0; k0 < n; ++k0) {
            const double xi0 = g.freq(k0);
            for (int k1 = 0; k1 < n; ++k1, ++idx) s.coefficients[idx] = mult(xi0, g.freq(k1));
        }
    }
    return s;
}

template <typename MultiplierFn>
Field apply_multiplier(const Field& f, MultiplierFn&& mult, const char* who) {
    SpectralField s = to_spectral(f);
    const Grid& g = f.grid;
    const int n = g.n_per_axis();
    if (g.dim() == 1) {
        for (int k = 0; k < n; ++k) s.coefficients[k] *= mult(g.freq(k), 0.0);
    } else {
        std::size_t idx = 0;
        for (int k0 = 0; k0 < n; ++k0) {
            const double xi0 = g.freq(k0);
            for (int k1 = 0; k1 < n; ++k1, ++idx) s.coefficients[idx] *= mult(xi0, g.freq(k1));
        }
    }
    Field out = to_physical(s, f.tag);
    require_finite(out, who);
    return out;
}

}  // namespace detail

/// Density p^alpha_t of the driving process, as a Field. Mass-1 by construction
/// (the zero mode of exp(-t*symbol) is exactly 1).
inline Field heat_kernel(const Grid& g, double t, const StableLaw& law) {
    if (!(t > 0.0)) throw ConfigError("heat_kernel: time must be positive");
    if (t < resolution_floor(g, law))
        throw ConfigError("heat_kernel: t = " + std::to_string(t) + " below resolution floor (2dx)^alpha = " +
                          std::to_string(resolution_floor(g, law)) + "; refine the grid");
    SpectralField s =
        detail::spectral_from_multiplier(g, [&](double a, double b) { return std::exp(-t * law.symbol(a, b)); });
    Field out = to_physical(s, "heat_kernel t=" + std::to_string(t));
    require_finite(out, "heat_kernel");
    warn_boundary_mass(out, "heat_kernel");
    return out;
}

/// Semigroup action P^alpha_t f; t = 0 is the identity.
inline Field semigroup_apply(const Field& f, double t, const StableLaw& law) {
    if (t < 0.0) throw ConfigError("semigroup_apply: negative time");
    if (t == 0.0) return f;
    return detail::apply_multiplier(
        f, [&](double a, double b) { return std::exp(-t * law.symbol(a, b)); }, "semigroup_apply");
}

/// Spatial gradient of the heat kernel along one axis (1-based), odd, zero mass.
inline Field grad_heat_kernel(const Grid& g, double t, const StableLaw& law, int axis) {
    if (!(t > 0.0)) throw ConfigError("grad_heat_kernel: time must be positive");
    if (axis < 1 || axis > g.dim()) throw ConfigError("grad_heat_kernel: axis out of range");
    if (t < resolution_floor(g, law))
        throw ConfigError("grad_heat_kernel: t below resolution floor (2dx)^alpha; refine the grid");
    const int n = g.n_per_axis();
    const double nyquist = std::abs(g.freq(n / 2));
    SpectralField s = detail::spectral_from_multiplier(g, [&](double a, double b) -> std::complex<double> {
        double xi_axis = axis == 1 ? a : b;
        if (std::abs(xi_axis) >= nyquist) return 0.0;  // keep iXi multiplier odd-symmetric
        return std::complex<double>(0.0, xi_axis) * std::exp(-t * law.symbol(a, b));
    });
    Field out = to_physical(s, "grad_heat_kernel t=" + std::to_string(t));
    require_finite(out, "grad_heat_kernel");
    return out;
}

/// d^n/dv^n of the thermic kernel convolved with f: multiplier
/// (-symbol)^n exp(-v*symbol).
inline Field thermic_derivative(const Field& f, double v, int n_order, const StableLaw& law) {
    if (!(v > 0.0)) throw ConfigError("thermic_derivative: v must be positive");
    if (n_order < 0) throw ConfigError("thermic_derivative: order must be non-negative");
    return detail::apply_multiplier(
        f,
        [&](double a, double b) {
            double sym = law.symbol(a, b);
            double m = std::exp(-v * sym);
            for (int i = 0; i < n_order; ++i) m *= -sym;
            return m;
        },
        "thermic_derivative");
}

}  // namespace mckv
