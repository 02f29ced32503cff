#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "mckv/besov.hpp"
#include "mckv/errors.hpp"

namespace mckv {

/// Integrability exponent in [1,inf]; infinity is an honest IEEE infinity so
/// that 1/inf == 0 exactly and boundary logic stays exact.
struct Exponent {
    double v = kInf;

    Exponent() = default;
    Exponent(double x) : v(x) {
        if (!(x >= 1.0)) throw ConfigError("Exponent: must be >= 1 (or inf)");
    }
    static Exponent infinity() { return Exponent(kInf); }

    bool is_inf() const { return std::isinf(v); }
    double inv() const { return is_inf() ? 0.0 : 1.0 / v; }
    Exponent conj() const {
        if (is_inf()) return Exponent(1.0);
        if (v == 1.0) return infinity();
        return Exponent(v / (v - 1.0));
    }
    double value() const { return v; }
};

/// The parameter tuple (alpha, beta, p, q, r, d) of the interaction-kernel class.
struct ParameterSet {
    double alpha;
    double beta;
    Exponent p, q, r;
    int d;

    ParameterSet(double alpha_, double beta_, Exponent p_, Exponent q_, Exponent r_, int d_)
        : alpha(alpha_), beta(beta_), p(p_), q(q_), r(r_), d(d_) {
        if (!(alpha > 1.0 && alpha <= 2.0)) throw ConfigError("ParameterSet: alpha must lie in (1,2]");
        if (!(beta > -1.0 && beta <= 0.0)) throw ConfigError("ParameterSet: beta must lie in (-1,0]");
        if (d < 1) throw ConfigError("ParameterSet: d must be a positive integer");
    }
};

/// Gap of the weak well-posedness condition: beta - (1 - alpha + d/p + alpha/r).
inline double gap(const ParameterSet& ps) {
    return ps.beta - (1.0 - ps.alpha + ps.d * ps.p.inv() + ps.alpha * ps.r.inv());
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = false;

    bool empty() const {
        if (lo < hi) return false;
        if (lo > hi) return true;
        return !(lo_closed && hi_closed);
    }
    bool contains(double x) const {
        if (x < lo || (x == lo && !lo_closed)) return false;
        if (x > hi || (x == hi && !hi_closed)) return false;
        return true;
    }
};

/// Certificate for strong uniqueness via the Krylov-Rockner / Xie-Zhang route:
/// drift in L^s(H^{gamma,ell}) with alpha/s + d/ell < alpha - 1.
struct XZWitness {
    double gamma = 0.0;
    double ell = 0.0;
    double s = 0.0;
    bool verified = false;
};

struct ThresholdReport {
    double gamma_gap = 0.0;
    bool weak_ok = false;
    bool strong_ok = false;
    bool linear_ok = false;
    Interval rbar_interval;
    Interval r0_interval;
    bool kr_ok = false;
    std::optional<XZWitness> xz_certificate;
};

namespace detail {

inline Interval rbar_interval_of(const ParameterSet& ps) {
    Interval iv;
    iv.lo = ps.r.conj().value();
    iv.lo_closed = true;
    double denom = -ps.beta / ps.alpha + ps.d * ps.p.inv() / ps.alpha;
    iv.hi = denom > 0.0 ? 1.0 / denom : kInf;
    iv.hi_closed = false;
    return iv;
}

}  // namespace detail

/// Weak well-posedness: beta > 1 - alpha + d/p + alpha/r, i.e. gap > 0.
inline ThresholdReport check_weak(const ParameterSet& ps) {
    ThresholdReport rep;
    rep.gamma_gap = gap(ps);
    rep.weak_ok = rep.gamma_gap > 0.0;
    rep.linear_ok = ps.beta > 0.5 * (1.0 - ps.alpha);
    rep.rbar_interval = detail::rbar_interval_of(ps);
    return rep;
}

/// Linear-SDE threshold beta > (1-alpha)/2, for contrast with the McKean case.
inline bool check_linear(const ParameterSet& ps) { return ps.beta > 0.5 * (1.0 - ps.alpha); }

/// Strong well-posedness: beta > 2 - (3/2)alpha + d/p + alpha/r. When it holds,
/// emit a witness (gamma, ell, s) for the pathwise-uniqueness criterion and
/// verify alpha/s + d/ell < alpha - 1 numerically. The midpoint heuristic can
/// leave ell too small in tight corners; ell is doubled until the constraint
/// closes (the admissible region is non-empty whenever strong_ok).
inline ThresholdReport check_strong(const ParameterSet& ps) {
    ThresholdReport rep = check_weak(ps);
    const double threshold = 2.0 - 1.5 * ps.alpha + ps.d * ps.p.inv() + ps.alpha * ps.r.inv();
    rep.strong_ok = ps.beta > threshold;
    if (!rep.strong_ok) return rep;

    const double G = rep.gamma_gap;
    double lo_frac = std::max(0.0, (1.0 - 0.5 * ps.alpha) / G);
    double hi_frac = std::min(1.0, 1.0 / G);
    XZWitness w;
    const double theta_bar = 0.5 * (lo_frac + hi_frac);
    w.gamma = theta_bar * G;

    // s between the Serrin-type lower edge alpha/(alpha-1) and the (S_I) upper
    // bound r (1 + (1/alpha)(-beta + theta*Gamma + d/p) r)^{-1}.
    const double lo_s = ps.alpha / (ps.alpha - 1.0);
    const double c = (-ps.beta + w.gamma + ps.d * ps.p.inv()) / ps.alpha;
    const double hi_s = ps.r.is_inf() ? 1.0 / c : ps.r.value() / (1.0 + c * ps.r.value());
    w.s = 0.5 * (lo_s + hi_s);

    w.ell = std::max(std::ceil(2.0 * ps.d / ps.alpha), 2.0) * 8.0;
    while (ps.alpha / w.s + ps.d / w.ell >= ps.alpha - 1.0 && w.ell < 0x1p26) w.ell *= 2.0;
    w.verified = w.s > lo_s && w.s < hi_s && w.gamma > 1.0 - 0.5 * ps.alpha && w.gamma < 1.0 &&
                 ps.alpha / w.s + ps.d / w.ell < ps.alpha - 1.0;
    rep.xz_certificate = w;
    return rep;
}

struct DriftIntegrability {
    Interval r0_interval;  // (0, (1/r + 1/rbar)^{-1}]
    bool kr_ok = false;    // exists r0 in the interval with alpha/r0 < alpha-1
};

/// Integrability window for the mollified non-linear drift, and the
/// Krylov-Rockner flag alpha/r0 < alpha - 1 evaluated at the top of the window.
inline DriftIntegrability drift_integrability(const ParameterSet& ps, double rbar) {
    Interval rbar_iv = detail::rbar_interval_of(ps);
    if (!rbar_iv.contains(rbar))
        throw ConfigError("drift_integrability: rbar outside the admissible interval");
    DriftIntegrability out;
    double inv_r0_min = ps.r.inv() + 1.0 / rbar;  // rbar >= r' >= 1 is finite
    out.r0_interval.lo = 0.0;
    out.r0_interval.lo_closed = false;
    out.r0_interval.hi = 1.0 / inv_r0_min;
    out.r0_interval.hi_closed = true;
    out.kr_ok = ps.alpha * inv_r0_min < ps.alpha - 1.0;
    return out;
}

/// Full report for one parameter tuple. rbar for the drift window is taken
/// near the top of the admissible interval, where the criterion is sharpest.
inline ThresholdReport full_report(const ParameterSet& ps) {
    ThresholdReport rep = check_strong(ps);
    if (rep.weak_ok && !rep.rbar_interval.empty()) {
        double hi = rep.rbar_interval.hi;
        double rbar = std::isinf(hi) ? std::max(rep.rbar_interval.lo * 4.0, 8.0)
                                     : rep.rbar_interval.lo + 0.99 * (hi - rep.rbar_interval.lo);
        auto di = drift_integrability(ps, rbar);
        rep.r0_interval = di.r0_interval;
        rep.kr_ok = di.kr_ok;
    }
    return rep;
}

}  // namespace mckv
