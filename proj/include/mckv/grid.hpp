#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "mckv/detail/fft.hpp"
#include "mckv/errors.hpp"

namespace mckv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace warnings {
inline std::atomic<bool>& enabled() {
    static std::atomic<bool> on{true};
    return on;
}
inline void emit(const std::string& msg) {
    if (enabled().load()) std::cerr << "[mckv warning] " << msg << "\n";
}
}  // namespace warnings

/// Uniform periodic grid on the torus [-L, L)^d, d in {1,2}, n points per axis.
class Grid {
public:
    Grid() = default;

    int dim() const { return d_; }
    int n_per_axis() const { return n_; }
    double extent() const { return extent_; }
    double dx() const { return 2.0 * extent_ / n_; }
    std::size_t total_nodes() const {
        std::size_t n = static_cast<std::size_t>(n_);
        return d_ == 1 ? n : n * n;
    }
    double cell_volume() const { return d_ == 1 ? dx() : dx() * dx(); }

    /// Coordinate of axis-index k (0 <= k < n): x_k = -L + k dx.
    double coord(int k) const { return -extent_ + k * dx(); }

    /// Angular frequency of DFT index k on one axis: xi = k' * pi / L with k'
    /// the signed index in [-n/2, n/2).
    double freq(int k) const {
        int ks = k < n_ / 2 ? k : k - n_;
        return ks * std::numbers::pi / extent_;
    }

    bool operator==(const Grid& other) const {
        return d_ == other.d_ && n_ == other.n_ && extent_ == other.extent_;
    }
    bool operator!=(const Grid& other) const { return !(*this == other); }

    friend Grid make_grid(int d, int n, double L);

private:
    Grid(int d, int n, double L) : d_(d), n_(n), extent_(L) {}
    int d_ = 1;
    int n_ = 0;
    double extent_ = 0.0;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline Grid make_grid(int d, int n, double L) {
    if (d != 1 && d != 2) throw ConfigError("make_grid: dimension must be 1 or 2, got " + std::to_string(d));
    if (!is_power_of_two(n) || n < 32)
        throw ConfigError("make_grid: points per axis must be a power of two >= 32, got " + std::to_string(n));
    if (!(L > 0.0)) throw ConfigError("make_grid: half-width must be positive");
    return Grid(d, n, L);
}

/// Real scalar function sampled on a Grid (row-major for d=2).
struct Field {
    Grid grid;
    std::vector<double> values;
    std::string tag;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0, std::string t = {})
        : grid(g), values(g.total_nodes(), fill), tag(std::move(t)) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

/// DFT of a Field under the convention F f(xi) = int f(x) e^{-i x.xi} dx,
/// realized as dx^d (-1)^{sum k} DFT_k so that coefficients approximate the
/// continuous Fourier transform at the grid frequencies.
struct SpectralField {
    Grid grid;
    std::vector<std::complex<double>> coefficients;

    SpectralField() = default;
    explicit SpectralField(const Grid& g) : grid(g), coefficients(g.total_nodes()) {}
};

namespace detail {

inline void check_same_grid(const Grid& a, const Grid& b, const char* op) {
    if (a != b) throw ConfigError(std::string(op) + ": fields live on different grids");
}

// (-1)^{k0[+k1]} phase accounting for the domain offset -L of the sample grid.
inline double offset_phase(const Grid& g, std::size_t flat) {
    int n = g.n_per_axis();
    int s;
    if (g.dim() == 1) {
        s = static_cast<int>(flat);
    } else {
        s = static_cast<int>(flat / n) + static_cast<int>(flat % n);
    }
    return (s & 1) ? -1.0 : 1.0;
}

}  // namespace detail

inline void require_finite(const Field& f, const char* op) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw NumericalDivergence(std::string(op) + ": produced non-finite values");
}

inline SpectralField to_spectral(const Field& f) {
    SpectralField out(f.grid);
    const std::size_t nn = f.size();
    for (std::size_t i = 0; i < nn; ++i) out.coefficients[i] = f.values[i];
    detail::dft_forward(out.coefficients, f.grid.dim(), f.grid.n_per_axis());
    const double scale = f.grid.cell_volume();
    for (std::size_t i = 0; i < nn; ++i) out.coefficients[i] *= scale * detail::offset_phase(f.grid, i);
    return out;
}

inline Field to_physical(const SpectralField& s, std::string tag = {}) {
    std::vector<std::complex<double>> work(s.coefficients);
    const std::size_t nn = work.size();
    const double inv_scale = 1.0 / s.grid.cell_volume();
    for (std::size_t i = 0; i < nn; ++i) work[i] *= inv_scale * detail::offset_phase(s.grid, i);
    detail::dft_backward(work, s.grid.dim(), s.grid.n_per_axis());
    Field out(s.grid, 0.0, std::move(tag));
    const double norm = 1.0 / static_cast<double>(nn);
    for (std::size_t i = 0; i < nn; ++i) out.values[i] = work[i].real() * norm;
    return out;
}

/// Periodic convolution, spectrally: approximates int f(x-y) g(y) dy.
inline Field convolve(const Field& f, const Field& g) {
    detail::check_same_grid(f.grid, g.grid, "convolve");
    SpectralField fs = to_spectral(f);
    SpectralField gs = to_spectral(g);
    for (std::size_t i = 0; i < fs.coefficients.size(); ++i) fs.coefficients[i] *= gs.coefficients[i];
    Field out = to_physical(fs);
    require_finite(out, "convolve");
    return out;
}

/// (sum |f|^l dx^d)^{1/l}, or max |f| for l = infinity.
inline double lp_norm(const Field& f, double ell) {
    if (!(ell >= 1.0)) throw ConfigError("lp_norm: exponent must be >= 1 (or inf)");
    if (std::isinf(ell)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    if (ell == 1.0) {
        for (double v : f.values) acc += std::abs(v);
    } else if (ell == 2.0) {
        for (double v : f.values) acc += v * v;
    } else {
        for (double v : f.values) acc += std::pow(std::abs(v), ell);
    }
    return std::pow(acc * f.grid.cell_volume(), 1.0 / ell);
}

inline double mass(const Field& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc * f.grid.cell_volume();
}

inline double min_value(const Field& f) {
    double m = std::numeric_limits<double>::max();
    for (double v : f.values) m = std::min(m, v);
    return m;
}

inline double inner_product(const Field& f, const Field& g) {
    detail::check_same_grid(f.grid, g.grid, "inner_product");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f.values[i] * g.values[i];
    return acc * f.grid.cell_volume();
}

/// Fraction of |f|-mass in the outer 10% shell of the box. Stable kernels have
/// polynomial tails; aliasing must be surfaced, not silently wrapped.
inline double boundary_mass(const Field& f) {
    const Grid& g = f.grid;
    const int n = g.n_per_axis();
    const double cut = 0.9 * g.extent();
    double outer = 0.0, total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double a = std::abs(f.values[i]);
        total += a;
        bool in_shell;
        if (g.dim() == 1) {
            in_shell = std::abs(g.coord(static_cast<int>(i))) >= cut;
        } else {
            int i0 = static_cast<int>(i) / n, i1 = static_cast<int>(i) % n;
            in_shell = std::abs(g.coord(i0)) >= cut || std::abs(g.coord(i1)) >= cut;
        }
        if (in_shell) outer += a;
    }
    return total > 0.0 ? outer / total : 0.0;
}

inline void warn_boundary_mass(const Field& f, const char* who) {
    double bm = boundary_mass(f);
    if (bm > 1e-3)
        warnings::emit(std::string(who) + ": boundary mass " + std::to_string(bm) +
                       " in outer 10% shell; enlarge the box or coarsen time");
}

// -- elementwise helpers ----------------------------------------------------

inline Field operator+(const Field& a, const Field& b) {
    detail::check_same_grid(a.grid, b.grid, "operator+");
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] + b.values[i];
    return out;
}

inline Field operator-(const Field& a, const Field& b) {
    detail::check_same_grid(a.grid, b.grid, "operator-");
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] - b.values[i];
    return out;
}

inline Field operator*(double c, const Field& a) {
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = c * a.values[i];
    return out;
}

inline Field pointwise(const Field& a, const Field& b) {
    detail::check_same_grid(a.grid, b.grid, "pointwise");
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

/// Unit-mass single-cell spike at the grid node nearest to x (or the origin).
inline Field delta_field(const Grid& g, const std::vector<double>& x = {}) {
    Field out(g, 0.0, "delta");
    auto axis_index = [&](double xi) {
        int k = static_cast<int>(std::lround((xi + g.extent()) / g.dx()));
        k %= g.n_per_axis();
        if (k < 0) k += g.n_per_axis();
        return k;
    };
    double x0 = x.size() > 0 ? x[0] : 0.0;
    double x1 = x.size() > 1 ? x[1] : 0.0;
    std::size_t flat = g.dim() == 1
                           ? static_cast<std::size_t>(axis_index(x0))
                           : static_cast<std::size_t>(axis_index(x0)) * g.n_per_axis() + axis_index(x1);
    out.values[flat] = 1.0 / g.cell_volume();
    return out;
}

/// Periodic multilinear interpolation of f at an arbitrary point.
inline double interpolate(const Field& f, const double* x) {
    const Grid& g = f.grid;
    const int n = g.n_per_axis();
    auto locate = [&](double xi, int& k0, double& w) {
        double u = (xi + g.extent()) / g.dx();
        double fl = std::floor(u);
        w = u - fl;
        k0 = static_cast<int>(fl) % n;
        if (k0 < 0) k0 += n;
    };
    if (g.dim() == 1) {
        int k0;
        double w;
        locate(x[0], k0, w);
        int k1 = (k0 + 1) % n;
        return (1.0 - w) * f.values[k0] + w * f.values[k1];
    }
    int i0, j0;
    double wi, wj;
    locate(x[0], i0, wi);
    locate(x[1], j0, wj);
    int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
    auto at = [&](int i, int j) { return f.values[static_cast<std::size_t>(i) * n + j]; };
    return (1.0 - wi) * ((1.0 - wj) * at(i0, j0) + wj * at(i0, j1)) +
           wi * ((1.0 - wj) * at(i1, j0) + wj * at(i1, j1));
}

/// Spectral energy sum_k |F_k|^2 / (2L)^d; equals the squared L2 norm (Parseval).
inline double spectral_energy(const SpectralField& s) {
    double acc = 0.0;
    for (const auto& c : s.coefficients) acc += std::norm(c);
    double vol = std::pow(2.0 * s.grid.extent(), s.grid.dim());
    return acc / vol;
}

}  // namespace mckv
