#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "mckv/detail/rng.hpp"
#include "mckv/grid.hpp"
#include "mckv/semigroup.hpp"

using namespace mckv;

namespace {

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
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

struct QuietWarnings {
    QuietWarnings() { warnings::enabled() = false; }
    ~QuietWarnings() { warnings::enabled() = true; }
};

}  // namespace

TEST_CASE("gaussian heat kernel at alpha=2") {
    Grid g = make_grid(1, 2048, 20.0);
    StableLaw law(2.0);
    Field p = heat_kernel(g, 1.0, law);
    // closed form (4 pi)^{-1/2} exp(-x^2/4)
    double linf = 0.0;
    for (int k = 0; k < g.n_per_axis(); ++k) {
        double x = g.coord(k);
        linf = std::max(linf, std::abs(p.values[k] - std::exp(-x * x / 4.0) / std::sqrt(4.0 * std::numbers::pi)));
    }
    CHECK(linf < 1e-10);
    CHECK(lp_norm(p, 2.0) == Catch::Approx(std::pow(8.0 * std::numbers::pi, -0.25)).margin(1e-4));
    CHECK(mass(p) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cauchy kernel at alpha=1") {
    QuietWarnings quiet;
    Grid g = make_grid(1, 8192, 100.0);
    StableLaw law(1.0);
    Field p = heat_kernel(g, 1.0, law);
    CHECK(lp_norm(p, kInf) == Catch::Approx(1.0 / std::numbers::pi).margin(1e-4));
    CHECK(mass(p) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("heat kernel is even with unit mass for generic alpha") {
    QuietWarnings quiet;
    (void)quiet;
    Grid g = make_grid(1, 1024, 40.0);
    for (double alpha : {1.3, 1.7, 2.0}) {
        Field p = heat_kernel(g, 0.7, StableLaw(alpha));
        CHECK(mass(p) == Catch::Approx(1.0).margin(1e-6));
        const int n = g.n_per_axis();
        for (int k = 1; k < n / 2; k += 37)
            CHECK(p.values[k] == Catch::Approx(p.values[n - k]).margin(1e-12));
    }
}

TEST_CASE("heat kernel rejects bad times") {
    Grid g = make_grid(1, 64, 10.0);
    StableLaw law(2.0);
    CHECK_THROWS_AS(heat_kernel(g, 0.0, law), ConfigError);
    CHECK_THROWS_AS(heat_kernel(g, -1.0, law), ConfigError);
    // below the resolution floor (2dx)^alpha
    CHECK_THROWS_AS(heat_kernel(g, 0.5 * resolution_floor(g, law), law), ConfigError);
}

TEST_CASE("semigroup identity at t=0 and semigroup law") {
    Grid g = make_grid(1, 512, 15.0);
    detail::SplitMix64 rng(5);
    Field f(g);
    for (auto& v : f.values) v = rng.normal();
    StableLaw law(1.5);

    Field id = semigroup_apply(f, 0.0, law);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(id.values[i] == f.values[i]);

    for (int trial = 0; trial < 20; ++trial) {
        double s = rng.uniform(0.01, 0.8), t = rng.uniform(0.01, 0.8);
        Field two = semigroup_apply(semigroup_apply(f, s, law), t, law);
        Field one = semigroup_apply(f, s + t, law);
        double err = lp_norm(two - one, 2.0) / lp_norm(one, 2.0);
        CHECK(err < 1e-10);
    }
    CHECK_THROWS_AS(semigroup_apply(f, -0.1, law), ConfigError);
}

TEST_CASE("alpha=2 semigroup spreads a point mass with variance 2t per coordinate") {
    Grid g = make_grid(1, 1024, 20.0);
    Field d = delta_field(g);
    double t = 0.5;
    Field evolved = semigroup_apply(d, t, StableLaw(2.0));
    double var = 0.0;
    for (int k = 0; k < g.n_per_axis(); ++k) {
        double x = g.coord(k);
        var += x * x * evolved.values[k];
    }
    var *= g.cell_volume();
    CHECK(var == Catch::Approx(2.0 * t).margin(1e-3));
}

TEST_CASE("gradient kernel: zero mass, odd, gaussian closed form") {
    Grid g = make_grid(1, 2048, 20.0);
    StableLaw law(2.0);
    Field gk = grad_heat_kernel(g, 1.0, law, 1);
    CHECK(std::abs(mass(gk)) < 1e-10);

    double linf = 0.0;
    for (int k = 0; k < g.n_per_axis(); ++k) {
        double x = g.coord(k);
        double expected = -(x / 2.0) * std::exp(-x * x / 4.0) / std::sqrt(4.0 * std::numbers::pi);
        linf = std::max(linf, std::abs(gk.values[k] - expected));
    }
    CHECK(linf < 1e-6);

    const int n = g.n_per_axis();
    for (int k = 1; k < n / 2; k += 101)
        CHECK(gk.values[k] == Catch::Approx(-gk.values[n - k]).margin(1e-12));
    CHECK_THROWS_AS(grad_heat_kernel(g, -1.0, law, 1), ConfigError);
    CHECK_THROWS_AS(grad_heat_kernel(g, 1.0, law, 2), ConfigError);
}

TEST_CASE("L1 norm of the gradient kernel scales as t^{-1/alpha}") {
    QuietWarnings quiet;
    Grid g = make_grid(1, 4096, 40.0);
    for (double alpha : {1.5, 2.0}) {
        StableLaw law(alpha);
        std::vector<double> ts, norms;
        for (double t = 0.05; t <= 1.0 + 1e-12; t *= std::pow(20.0, 1.0 / 7.0)) {
            ts.push_back(t);
            norms.push_back(lp_norm(grad_heat_kernel(g, t, law, 1), 1.0));
        }
        CHECK(fit_loglog_slope(ts, norms) == Catch::Approx(-1.0 / alpha).margin(0.03));
    }
}

TEST_CASE("thermic derivative: order zero is the semigroup, linearity holds") {
    Grid g = make_grid(1, 256, 12.0);
    detail::SplitMix64 rng(2);
    Field f(g), h(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.values[i] = rng.normal();
        h.values[i] = rng.normal();
    }
    StableLaw law(1.5);
    Field a = thermic_derivative(f, 0.3, 0, law);
    Field b = semigroup_apply(f, 0.3, law);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(a.values[i] == Catch::Approx(b.values[i]).margin(1e-14));

    Field lin = thermic_derivative(2.0 * f + (-3.0) * h, 0.2, 1, law);
    Field parts = 2.0 * thermic_derivative(f, 0.2, 1, law) + (-3.0) * thermic_derivative(h, 0.2, 1, law);
    double scale = lp_norm(parts, kInf);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(lin.values[i] - parts.values[i]) < 1e-12 * std::max(1.0, scale));
    CHECK_THROWS_AS(thermic_derivative(f, 0.0, 1, law), ConfigError);
}

TEST_CASE("first thermic derivative agrees with a centered finite difference in v") {
    Grid g = make_grid(1, 1024, 20.0);
    Field d = delta_field(g);
    StableLaw law(2.0);
    double v = 0.5, h = 1e-4;
    Field analytic = thermic_derivative(d, v, 1, law);
    Field fd = (1.0 / (2.0 * h)) * (semigroup_apply(d, v + h, law) - semigroup_apply(d, v - h, law));
    CHECK(lp_norm(analytic - fd, 2.0) / lp_norm(analytic, 2.0) < 1e-4);
}

TEST_CASE("stable scaling identity via resampling") {
    QuietWarnings quiet;
    for (double alpha : {1.5, 2.0}) {
        // box large enough that the wrapped stable tails stay below the budget
        Grid g = alpha < 2.0 ? make_grid(1, 16384, 400.0) : make_grid(1, 4096, 60.0);
        StableLaw law(alpha);
        double t = 0.4;
        Field pt = heat_kernel(g, t, law);
        Field p1 = heat_kernel(g, 1.0, law);
        // p_t(x) = t^{-1/alpha} p_1(t^{-1/alpha} x)
        Field rescaled(g);
        double scale = std::pow(t, -1.0 / alpha);
        for (int k = 0; k < g.n_per_axis(); ++k) {
            double x = scale * g.coord(k);
            rescaled.values[k] = scale * interpolate(p1, &x);
        }
        CHECK(lp_norm(pt - rescaled, 1.0) < 1e-3);
    }
}

TEST_CASE("coordinate-product mode in 2d factorizes") {
    QuietWarnings quiet;
    (void)quiet;
    Grid g = make_grid(2, 64, 10.0);
    StableLaw law(1.5, StableLaw::Mode::coordinate_product);
    Field p2 = heat_kernel(g, 0.5, law);
    Grid g1 = make_grid(1, 64, 10.0);
    Field p1 = heat_kernel(g1, 0.5, StableLaw(1.5));
    const int n = g.n_per_axis();
    double linf = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            linf = std::max(linf,
                            std::abs(p2.values[static_cast<std::size_t>(i) * n + j] - p1.values[i] * p1.values[j]));
    CHECK(linf < 1e-8);
}
