#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "mckv/besov.hpp"
#include "mckv/grid.hpp"
#include "mckv/kernels.hpp"
#include "mckv/semigroup.hpp"

using namespace mckv;

namespace {

Field gaussian_density(const Grid& g, double sigma, double mean = 0.0) {
    Field f(g, 0.0, "gaussian");
    for (int k = 0; k < g.n_per_axis(); ++k) {
        double x = g.coord(k) - mean;
        f.values[k] = std::exp(-x * x / (2.0 * sigma * sigma)) /
                      (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    return f;
}

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

}  // namespace

TEST_CASE("zero and constant kernels realize literally") {
    Grid g = make_grid(2, 64, 8.0);
    KernelSpec zero;
    zero.family = KernelFamily::zero;
    auto rz = realize_kernel(zero, g);
    REQUIRE(rz.base.dim() == 2);
    CHECK(rz.base.sup_norm() == 0.0);

    KernelSpec cv;
    cv.family = KernelFamily::constant_vector;
    cv.constant = {0.3, -1.2};
    auto rc = realize_kernel(cv, g);
    CHECK(rc.base.comp[0].values[17] == 0.3);
    CHECK(rc.base.comp[1].values[99] == -1.2);
}

TEST_CASE("power kernel: odd sampling with cell-average zero at the origin") {
    Grid g = make_grid(1, 256, 10.0);
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    Field b = realize_kernel(spec, g).base.comp[0];
    const int n = g.n_per_axis();
    CHECK(b.values[n / 2] == 0.0);  // origin cell
    CHECK(b.values[n / 2 + 8] == Catch::Approx(std::pow(g.coord(n / 2 + 8), -0.5)));
    CHECK(b.values[n / 2 - 8] == Catch::Approx(-std::pow(-g.coord(n / 2 - 8), -0.5)));

    Grid g2 = make_grid(2, 64, 10.0);
    CHECK_THROWS_AS(realize_kernel(spec, g2), ConfigError);
}

TEST_CASE("besov classification through refinement: stable below beta, divergent above") {
    // grid-realized distributions only reveal their class through refinement
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    StableLaw law(2.0);
    auto norm_at = [&](int n, double gamma) {
        Grid g = make_grid(1, n, 20.0);
        Field b = realize_kernel(spec, g).base.comp[0];
        return besov_norm(b, BesovIndex(gamma, kInf, kInf), law);
    };
    double below_coarse = norm_at(256, -0.6);
    double below_fine = norm_at(65536, -0.6);
    CHECK(below_fine / below_coarse > 0.5);
    CHECK(below_fine / below_coarse < 2.0);

    // above the true class the thermic part diverges like dx^{beta-gamma}
    double above_coarse = norm_at(256, -0.3);
    double above_fine = norm_at(65536, -0.3);
    CHECK(above_fine / above_coarse >= 2.0);
}

TEST_CASE("grad-of-holder kernel has the synthesized class, vector-valued in 2d") {
    KernelSpec spec;
    spec.family = KernelFamily::grad_of_holder;
    spec.beta = -0.4;
    spec.seed = 5;
    Grid g2 = make_grid(2, 128, 10.0);
    auto rk = realize_kernel(spec, g2);
    REQUIRE(rk.base.dim() == 2);
    for (const auto& c : rk.base.comp) require_finite(c, "grad_of_holder");

    // classification on the 1-d version: stable below beta, growing above
    StableLaw law(2.0);
    auto norm_at = [&](int n, double gamma) {
        Grid g = make_grid(1, n, 20.0);
        Field b = realize_kernel(spec, g).base.comp[0];
        return besov_norm(b, BesovIndex(gamma, kInf, kInf), law);
    };
    double below = norm_at(16384, -0.5) / norm_at(256, -0.5);
    double above = norm_at(16384, -0.1) / norm_at(256, -0.1);
    CHECK(below < 2.0);
    CHECK(above > 1.5 * below);
}

TEST_CASE("mollifying a constant kernel is exact") {
    Grid g = make_grid(1, 256, 10.0);
    KernelSpec cv;
    cv.family = KernelFamily::constant_vector;
    cv.constant = {2.5};
    MollifiedKernel mk = mollify(cv, g, 0.05, StableLaw(2.0));
    for (double v : mk.smoothed.base.comp[0].values) CHECK(v == Catch::Approx(2.5).margin(1e-12));
}

TEST_CASE("mollification floor is enforced") {
    Grid g = make_grid(1, 256, 10.0);
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    StableLaw law(2.0);
    CHECK_THROWS_AS(mollify(spec, g, 0.5 * resolution_floor(g, law), law), ConfigError);
    CHECK_THROWS_AS(mollify(spec, g, 0.0, law), ConfigError);
}

TEST_CASE("mollified norms stay uniformly below a fitted multiple of the base norm") {
    Grid g = make_grid(1, 2048, 20.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    Field b = realize_kernel(spec, g).base.comp[0];
    BesovIndex cls(spec.beta, kInf, kInf);
    double proxy = besov_norm(b, cls, law);
    double sup_ratio = 0.0;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        MollifiedKernel mk = mollify(spec, g, eps, law);
        sup_ratio = std::max(sup_ratio, besov_norm(mk.smoothed.base.comp[0], cls, law) / proxy);
    }
    CHECK(sup_ratio <= 2.0);  // fitted c; heat-flow smoothing contracts the thermic part
    CHECK(sup_ratio > 0.1);
}

TEST_CASE("mollified kernels are bounded with gradients growing as eps decreases") {
    Grid g = make_grid(1, 2048, 20.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    std::vector<double> grad_norms;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        MollifiedKernel mk = mollify(spec, g, eps, law);
        CHECK(std::isfinite(mk.sup_norm()));
        Field grad = detail::apply_multiplier(
            mk.smoothed.base.comp[0],
            [&](double a, double) {
                return std::abs(a) >= std::abs(g.freq(g.n_per_axis() / 2))
                           ? std::complex<double>(0.0)
                           : std::complex<double>(0.0, a);
            },
            "gradient");
        grad_norms.push_back(lp_norm(grad, kInf));
    }
    for (std::size_t i = 1; i < grad_norms.size(); ++i) {
        CHECK(std::isfinite(grad_norms[i]));
        CHECK(grad_norms[i] > grad_norms[i - 1]);
    }
}

TEST_CASE("mollifier convergence: smooth bump is near-invariant") {
    Grid g = make_grid(1, 2048, 20.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::smooth_bump;
    spec.beta = 0.0;
    spec.bump_width = 6.0;
    auto table = mollifier_convergence(spec, g, -0.7, {0.01, 0.005, 0.0025}, law);
    REQUIRE(table.rows.size() == 3);
    Field b = realize_kernel(spec, g).base.comp[0];
    double scale = besov_norm(b, BesovIndex(-0.7, kInf, kInf), law);
    CHECK(table.rows.front().distance / scale < 5e-3);
    CHECK(table.decreasing_with_slack.value());
}

TEST_CASE("mollifier convergence: power kernel decays at the predicted rate") {
    Grid g = make_grid(1, 2048, 20.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    double beta_tilde = -0.7;
    std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025, 0.0125};
    auto table = mollifier_convergence(spec, g, beta_tilde, eps_list, law);
    CHECK(table.decreasing_with_slack.value());

    std::vector<double> ds;
    for (const auto& row : table.rows) ds.push_back(row.distance);
    double slope = fit_loglog_slope(eps_list, ds);
    CHECK(slope == Catch::Approx((spec.beta - beta_tilde) / law.alpha).margin(0.1));
}

TEST_CASE("mollifier convergence guards its hypotheses") {
    Grid g = make_grid(1, 512, 10.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    CHECK_THROWS_AS(mollifier_convergence(spec, g, -0.5, {0.1}, law), ConfigError);
    CHECK_THROWS_AS(mollifier_convergence(spec, g, -0.4, {0.1}, law), ConfigError);

    auto single = mollifier_convergence(spec, g, -0.7, {0.1}, law);
    CHECK(single.rows.size() == 1);
    CHECK_FALSE(single.decreasing_with_slack.has_value());
    CHECK_FALSE(single.last_over_first.has_value());
}

TEST_CASE("mollification preserves the L1 pairing against smooth tests") {
    Grid g = make_grid(1, 16384, 20.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::power;
    spec.beta = -0.5;
    Field b = realize_kernel(spec, g).base.comp[0];
    Field test = gaussian_density(g, 1.0, 0.7);  // off-center so oddness cancels nothing

    std::vector<double> eps_list{0.001, 0.0005, 0.00025, 0.000125, 0.0000625};
    std::vector<double> pairings;
    for (double eps : eps_list)
        pairings.push_back(inner_product(mollify(spec, g, eps, law).smoothed.base.comp[0], test));
    std::vector<double> gaps;
    for (std::size_t i = 1; i < pairings.size(); ++i) gaps.push_back(std::abs(pairings[i] - pairings[i - 1]));
    for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1] * 1.05);
    CHECK(gaps.back() < 1e-4);
}

TEST_CASE("vector kernels mollify coordinatewise") {
    Grid g = make_grid(2, 64, 8.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::grad_of_holder;
    spec.beta = -0.3;
    spec.seed = 9;
    auto rk = realize_kernel(spec, g);
    MollifiedKernel mk = mollify(spec, g, 0.3, law);
    for (int c = 0; c < 2; ++c) {
        Field direct = semigroup_apply(rk.base.comp[c], 0.3, law);
        double scale = std::max(1.0, lp_norm(direct, kInf));
        for (std::size_t i = 0; i < direct.size(); ++i)
            CHECK(std::abs(direct.values[i] - mk.smoothed.base.comp[c].values[i]) < 1e-12 * scale);
    }
}

TEST_CASE("time-dependent kernels are mollified in time as well") {
    Grid g = make_grid(1, 256, 10.0);
    StableLaw law(2.0);
    KernelSpec spec;
    spec.family = KernelFamily::smooth_bump;
    spec.time_profile = TimeProfile::sine;
    spec.time_omega = 3.0;
    MollifiedKernel mk = mollify(spec, g, 0.05, law);
    REQUIRE(mk.smoothed.time_factor);
    // smoothing a sine changes it at order eps^2 omega^2
    for (double s : {0.0, 0.4, 1.1}) {
        double raw = 1.0 + 0.5 * std::sin(3.0 * s);
        CHECK(mk.smoothed.factor(s) == Catch::Approx(raw).margin(0.02));
    }
    // and the mollified factor is what at_time applies
    auto slice = mk.at_time(0.4);
    CHECK(slice.comp[0].values[128] ==
          Catch::Approx(mk.smoothed.base.comp[0].values[128] * mk.smoothed.factor(0.4)));
}
