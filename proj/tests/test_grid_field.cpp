#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "mckv/detail/rng.hpp"
#include "mckv/grid.hpp"
#include "mckv/io.hpp"

using namespace mckv;

namespace {

Field gaussian_field(const Grid& g, double var, double mean = 0.0) {
    Field f(g, 0.0, "gaussian");
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
    for (int k = 0; k < g.n_per_axis(); ++k) {
        double x = g.coord(k) - mean;
        f.values[k] = norm * std::exp(-x * x / (2.0 * var));
    }
    return f;
}

}  // namespace

TEST_CASE("make_grid accepts valid shapes and computes spacing") {
    Grid g = make_grid(1, 256, 20.0);
    CHECK(g.dx() == Catch::Approx(0.15625).epsilon(0));
    CHECK(g.total_nodes() == 256);

    Grid g2 = make_grid(2, 64, 10.0);
    CHECK(g2.total_nodes() == 4096);
}

TEST_CASE("make_grid rejects bad input") {
    CHECK_THROWS_AS(make_grid(1, 100, 20.0), ConfigError);  // not a power of two
    CHECK_THROWS_AS(make_grid(3, 64, 10.0), ConfigError);
    CHECK_THROWS_AS(make_grid(1, 16, 10.0), ConfigError);   // below 32
    CHECK_THROWS_AS(make_grid(1, 64, -1.0), ConfigError);
}

TEST_CASE("frequency set is the DFT set scaled by pi/L") {
    Grid g = make_grid(1, 64, 8.0);
    CHECK(g.freq(0) == 0.0);
    CHECK(g.freq(1) == Catch::Approx(std::numbers::pi / 8.0));
    CHECK(g.freq(63) == Catch::Approx(-std::numbers::pi / 8.0));
    CHECK(g.freq(32) == Catch::Approx(-32.0 * std::numbers::pi / 8.0));
}

TEST_CASE("spectral round trip is identity to 1e-12") {
    for (int d : {1, 2}) {
        Grid g = make_grid(d, 64, 5.0);
        Field f(g);
        detail::SplitMix64 rng(42);
        for (auto& v : f.values) v = rng.normal();
        Field back = to_physical(to_spectral(f));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            num += std::abs(back.values[i] - f.values[i]);
            den += std::abs(f.values[i]);
        }
        CHECK(num / den < 1e-12);
    }
}

TEST_CASE("spectral coefficients follow the integral convention") {
    // F f(xi) = int f e^{-ix xi} dx for a centered Gaussian: exp(-var xi^2 / 2).
    Grid g = make_grid(1, 512, 20.0);
    Field f = gaussian_field(g, 1.0);
    SpectralField s = to_spectral(f);
    for (int k : {0, 1, 5, 17}) {
        double xi = g.freq(k);
        double expected = std::exp(-0.5 * xi * xi);
        CHECK(s.coefficients[k].real() == Catch::Approx(expected).margin(1e-10));
        CHECK(std::abs(s.coefficients[k].imag()) < 1e-10);
    }
}

TEST_CASE("convolution against a discrete delta is the identity") {
    Grid g = make_grid(1, 256, 10.0);
    Field f = gaussian_field(g, 0.5);
    Field d = delta_field(g);
    Field conv = convolve(f, d);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(conv.values[i] == Catch::Approx(f.values[i]).margin(1e-10));
}

TEST_CASE("Gaussian convolution closed form") {
    Grid g = make_grid(1, 1024, 20.0);
    double s1 = 0.5 * 0.5, s2 = 0.7 * 0.7;
    Field a = gaussian_field(g, s1);
    Field b = gaussian_field(g, s2);
    Field c = convolve(a, b);
    Field expected = gaussian_field(g, s1 + s2);
    double linf = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        linf = std::max(linf, std::abs(c.values[i] - expected.values[i]));
    CHECK(linf < 1e-8);
}

TEST_CASE("convolution is commutative and bilinear") {
    Grid g = make_grid(1, 128, 10.0);
    detail::SplitMix64 rng(7);
    Field f(g), h(g), w(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.values[i] = rng.normal();
        h.values[i] = rng.normal();
        w.values[i] = rng.normal();
    }
    Field fh = convolve(f, h);
    Field hf = convolve(h, f);
    double scale = lp_norm(fh, kInf);
    for (std::size_t i = 0; i < fh.size(); ++i)
        CHECK(std::abs(fh.values[i] - hf.values[i]) < 1e-12 * std::max(1.0, scale));

    // bilinearity: (f + 2w) * h = f*h + 2 (w*h)
    Field lhs = convolve(f + 2.0 * w, h);
    Field rhs = fh + 2.0 * convolve(w, h);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(std::abs(lhs.values[i] - rhs.values[i]) < 1e-12 * std::max(1.0, scale));
}

TEST_CASE("mass of a convolution factorizes") {
    Grid g = make_grid(2, 64, 6.0);
    detail::SplitMix64 rng(11);
    Field f(g), h(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.values[i] = rng.normal();
        h.values[i] = rng.normal();
    }
    CHECK(mass(convolve(f, h)) == Catch::Approx(mass(f) * mass(h)).margin(1e-10));
}

TEST_CASE("lp_norm basics") {
    Grid g = make_grid(1, 256, 10.0);
    Field cell(g);
    cell.values[17] = 1.0 / g.cell_volume();
    CHECK(lp_norm(cell, 1.0) == Catch::Approx(1.0));

    Field zero(g);
    for (double ell : {1.0, 2.0, 3.5, kInf}) CHECK(lp_norm(zero, ell) == 0.0);

    CHECK_THROWS_AS(lp_norm(cell, 0.5), ConfigError);
}

TEST_CASE("L2 norm of the standard Gaussian density") {
    Grid g = make_grid(1, 2048, 20.0);
    Field f = gaussian_field(g, 1.0);
    double expected = std::sqrt(1.0 / (2.0 * std::sqrt(std::numbers::pi)));
    CHECK(lp_norm(f, 2.0) == Catch::Approx(expected).margin(1e-4));
}

TEST_CASE("Parseval: squared L2 norm equals scaled spectral energy") {
    for (int d : {1, 2}) {
        Grid g = make_grid(d, 64, 7.0);
        detail::SplitMix64 rng(3);
        Field f(g);
        for (auto& v : f.values) v = rng.normal();
        double l2 = lp_norm(f, 2.0);
        double energy = spectral_energy(to_spectral(f));
        CHECK(std::abs(l2 * l2 - energy) / (l2 * l2) < 1e-10);
    }
}

TEST_CASE("grid mismatch raises") {
    Field a(make_grid(1, 64, 5.0));
    Field b(make_grid(1, 128, 5.0));
    CHECK_THROWS_AS(convolve(a, b), ConfigError);
}

TEST_CASE("field dump round trips bit-exactly") {
    Grid g = make_grid(2, 32, 3.5);
    Field f(g, 0.0, "roundtrip check");
    detail::SplitMix64 rng(99);
    for (auto& v : f.values) v = rng.normal() * 1e-7;
    std::stringstream buf;
    dump_field(f, buf);
    Field back = load_field(buf);
    REQUIRE(back.grid == f.grid);
    CHECK(back.tag == f.tag);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(std::memcmp(&back.values[i], &f.values[i], sizeof(double)) == 0);
    }
}

TEST_CASE("boundary mass flags heavy tails") {
    Grid g = make_grid(1, 256, 10.0);
    Field narrow = gaussian_field(g, 0.25);
    CHECK(boundary_mass(narrow) < 1e-10);
    Field flat(g, 1.0);
    CHECK(boundary_mass(flat) == Catch::Approx(0.1).epsilon(0.1));
}

TEST_CASE("periodic interpolation hits nodes exactly and wraps") {
    Grid g = make_grid(1, 64, 4.0);
    Field f = gaussian_field(g, 1.0);
    double x = g.coord(20);
    CHECK(interpolate(f, &x) == Catch::Approx(f.values[20]));
    double xm = g.coord(20) + 0.5 * g.dx();
    CHECK(interpolate(f, &xm) == Catch::Approx(0.5 * (f.values[20] + f.values[21])));
    double wrapped = g.coord(20) + 2.0 * g.extent();
    CHECK(interpolate(f, &wrapped) == Catch::Approx(f.values[20]).margin(1e-12));
}
