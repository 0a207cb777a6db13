#pragma once

/// Riesz potentials I_a f for radial f on R^N:
///   I_a f(x) = c(N,a) * integral over R^N of f(y) |x-y|^{a-N} dy
///            = c(N,a) * int_0^inf f(s) K(r,s) s^{N-1} ds,     r = |x|,
/// where K is the spherical average of |x-y|^{a-N}.  In the variable
/// w = 1 - cos(theta) the average is cancellation-free:
///   K(r,s) = omega_{N-2} int_0^2 [(2-w)w]^{(N-3)/2} [(r-s)^2 + 2rsw]^{(a-N)/2} dw,
/// with a logarithmic-strength concentration at w=0 when r is close to s,
/// handled by dyadic panels plus an analytic sliver.  On top of the kernel:
/// tail-extrapolated application to sampled radial functions, the power-law
/// asymptotics report for I_1 of inverse-power potentials, the iterated-
/// potential ratio sup I_1[(I_1 V)^2]/I_1 V, and the Green-boundedness probe
/// sup I_2 V.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fujita/numerics.hpp"

namespace fujita {

// ============================================================================
// Constants and the angular kernel
// ============================================================================

/// Normalizing constant c(N,a) = Gamma((N-a)/2) / (pi^{N/2} 2^a Gamma(a/2)).
inline double riesz_constant(int N, double a) {
    if (!(a > 0.0 && a < double(N)))
        throw std::invalid_argument("riesz_constant: need 0 < a < N");
    return std::tgamma(0.5 * (N - a)) /
           (std::pow(M_PI, 0.5 * N) * std::pow(2.0, a) * std::tgamma(0.5 * a));
}

/// Spherical average of |x-y|^{a-N} over |y|=s with |x|=r (no c(N,a) factor).
/// Exactly symmetric in (r, s).  Diverges (returns +inf) only at r=s with
/// a <= 1, which quadratures never sample.
inline double angular_kernel(int N, double a, double r, double s) {
    if (N < 3) throw std::invalid_argument("angular_kernel: N must be >= 3");
    if (r < 0.0 || s < 0.0) throw std::domain_error("angular_kernel: negative radius");
    if (r == 0.0 || s == 0.0)
        return unit_sphere_area(N - 1) * std::pow(std::max(r, s), a - N);

    const double d2 = (r - s) * (r - s);
    const double m2 = 2.0 * r * s;
    const double ex = 0.5 * (N - 3);
    const double pw = 0.5 * (a - N);
    auto g = [&](double w) { return std::pow((2.0 - w) * w, ex) * std::pow(d2 + m2 * w, pw); };

    // far off-diagonal: integrand smooth on [0,2], one high-order panel
    if (d2 > 4.0 * m2) return unit_sphere_area(N - 2) * gl_panel(g, 0.0, 2.0, 64);

    // near-diagonal: dyadic panels [hi/2, hi] marching toward the w=0
    // concentration, finished by the closed-form sliver once 2rsw << (r-s)^2
    const QuadRule& q8 = gauss_legendre(8);
    double total = 0.0, hi = 2.0;
    for (int m = 1;; ++m) {
        const double lo = 0.5 * hi;
        const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        double panel = 0.0;
        for (std::size_t i = 0; i < q8.nodes.size(); ++i)
            panel += q8.weights[i] * g(mid + hw * q8.nodes[i]);
        total += hw * panel;
        hi = lo;
        if (d2 > 0.0 && m2 * hi < 1e-6 * d2) {
            // remaining integral with (2-w)w ~ 2w and d2+m2 w ~ d2
            total += std::pow(2.0, ex) * std::pow(d2, pw) * std::pow(hi, ex + 1.0) / (ex + 1.0);
            break;
        }
        if (m >= 140 || (total > 0.0 && hw * 8.0 * g(mid) < 1e-17 * total && m > 20)) {
            if (d2 == 0.0 && a <= 1.0) return std::numeric_limits<double>::infinity();
            break;
        }
    }
    return unit_sphere_area(N - 2) * total;
}

// ============================================================================
// RadialFunction
// ============================================================================

/// A radial function sampled on a log-spaced grid, with a power-law decay
/// hint q used to extrapolate the tail: f(r) ~ f(r_max) (r_max/r)^q beyond
/// the grid.  Inside r_min the value is clamped (the families of interest
/// are bounded at the origin); between samples, linear interpolation in ln r.
struct RadialFunction {
    std::vector<double> radii;   // strictly increasing, positive
    std::vector<double> values;
    std::optional<double> decay_hint;

    template <typename F>
    static RadialFunction sample(F&& f, double r_min, double r_max, std::size_t n,
                                 std::optional<double> q = std::nullopt) {
        if (!(0.0 < r_min && r_min < r_max))
            throw std::invalid_argument("RadialFunction::sample: bad radial range");
        RadialFunction g;
        g.radii = logspace(r_min, r_max, n);
        g.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) g.values[i] = f(g.radii[i]);
        g.decay_hint = q;
        g.check_decay_hint();
        return g;
    }

    bool all_zero() const {
        for (double v : values)
            if (v != 0.0) return false;
        return true;
    }

    double r_min() const { return radii.front(); }
    double r_max() const { return radii.back(); }

    /// Verify the tail really decays at least like r^{-q} over the last
    /// decade (fitted ln-slope at most -q, with a small allowance).
    void check_decay_hint() const {
        if (!decay_hint || all_zero()) return;
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            if (radii[i] < r_max() / 10.0) continue;
            const double av = std::abs(values[i]);
            if (av == 0.0) continue;
            lx.push_back(std::log(radii[i]));
            ly.push_back(std::log(av));
        }
        if (lx.size() < 3) return;  // too few tail samples to contradict the hint
        const LineFit f = fit_line(lx, ly);
        if (f.slope > -*decay_hint + 0.25)
            throw std::domain_error("RadialFunction: tail decays slower than the decay hint");
    }

    double eval(double r) const {
        if (r <= radii.front()) return values.front();
        if (r >= radii.back()) {
            if (!decay_hint) return values.back();
            return values.back() * std::pow(radii.back() / r, *decay_hint);
        }
        const auto it = std::upper_bound(radii.begin(), radii.end(), r);
        const std::size_t i = std::size_t(it - radii.begin());
        const double t = std::log(r / radii[i - 1]) / std::log(radii[i] / radii[i - 1]);
        return values[i - 1] + t * (values[i] - values[i - 1]);
    }
};

// ============================================================================
// riesz_apply
// ============================================================================

namespace detail {

/// Core radial quadrature: c(N,a) int_0^inf f(s) K(r,s) s^{N-1} ds with the
/// s-range [0, r_max] resolved by log-spaced segments, dyadically graded
/// toward s = x where the kernel concentrates, plus the analytic power tail
/// f ~ f(r_max)(r_max/s)^q beyond r_max (requires q > a).
template <typename F>
double riesz_apply_fn(F&& f, double a, int N, double x, double r_min, double r_max, double q) {
    if (!(q > a)) throw std::domain_error("riesz_apply: tail divergence (decay hint <= a)");
    std::vector<double> seg{0.0};
    for (double s : logspace(r_min, r_max, 120)) seg.push_back(s);
    if (r_min < x && x < r_max) {
        const double w = 0.5 * x;
        seg.push_back(x);
        for (int m = 1; m <= 41; ++m) {
            seg.push_back(x - w * std::ldexp(1.0, -m));
            seg.push_back(x + w * std::ldexp(1.0, -m));
        }
    }
    std::sort(seg.begin(), seg.end());
    seg.erase(std::unique(seg.begin(), seg.end()), seg.end());

    const QuadRule& q4 = gauss_legendre(4);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < seg.size(); ++k) {
        const double lo = seg[k], hi = seg[k + 1];
        // Panels of near-ulp width appear when x collides with a log-spaced
        // point; their nodes would round onto the kernel diagonal.  The
        // dyadic grading bottoms out at 2^-42 relative width, well above this.
        if (!(hi > lo + 1e-13 * hi)) continue;
        const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < q4.nodes.size(); ++i) {
            const double s = mid + hw * q4.nodes[i];
            total += hw * q4.weights[i] * f(s) * std::pow(s, N - 1) * angular_kernel(N, a, x, s);
        }
    }
    // int_{r_max}^inf f(r_max)(r_max/s)^q omega_{N-1} s^{a-N} s^{N-1} ds
    total += unit_sphere_area(N - 1) * f(r_max) * std::pow(r_max, a) / (q - a);
    return riesz_constant(N, a) * total;
}

}  // namespace detail

/// I_a f at radius x for a sampled radial function.
inline double riesz_apply(const RadialFunction& f, double a, int N, double x) {
    if (f.all_zero()) return 0.0;
    if (!f.decay_hint) throw std::domain_error("riesz_apply: a decay hint is required");
    return detail::riesz_apply_fn([&f](double s) { return f.eval(s); }, a, N, x, f.r_min(),
                                  f.r_max(), *f.decay_hint);
}

// ============================================================================
// Asymptotics, iterated-potential ratio, Green boundedness
// ============================================================================

/// Large-|x| law of I_1 V for V = omega/(1+r^b), b > 2: fitted ln-ln slope of
/// I_1 V over x in [10, 10^3] against the theoretical exponent
///   1-b (N > b),  1-N (N < b),  1-b with a logarithmic factor (N = b).
struct I1AsymptoticsReport {
    std::vector<double> xs, values;
    double slope_fit = 0.0;
    double slope_theory = 0.0;
    bool log_factor = false;   // set when N == b
    double fit_residual = 0.0; // max |ln value - fit|
};

inline I1AsymptoticsReport verify_I1_asymptotics(double omega, double b, int N) {
    if (!(b > 2.0)) throw std::invalid_argument("verify_I1_asymptotics: b must exceed 2");
    if (!(omega > 0.0)) throw std::invalid_argument("verify_I1_asymptotics: omega must be positive");
    auto V = [&](double s) { return omega / (1.0 + std::pow(s, b)); };

    I1AsymptoticsReport rep;
    rep.xs = logspace(10.0, 1.0e3, 9);
    std::vector<double> lx, ly;
    for (double x : rep.xs) {
        const double y = detail::riesz_apply_fn(V, 1.0, N, x, 1e-3, 1e4, b);
        rep.values.push_back(y);
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    const LineFit f = fit_line(lx, ly);
    rep.slope_fit = f.slope;
    rep.fit_residual = f.max_abs_residual;
    if (double(N) > b) rep.slope_theory = 1.0 - b;
    else if (double(N) < b) rep.slope_theory = 1.0 - N;
    else {
        rep.slope_theory = 1.0 - b;
        rep.log_factor = true;
    }
    if (rep.fit_residual > 0.5)
        throw std::runtime_error("verify_I1_asymptotics: fit residual too large");
    return rep;
}

/// sup over a log grid of I_1[(I_1 |V|)^2](x) / I_1 |V|(x); finiteness is the
/// empirical certificate behind the iterated-potential hypothesis.  `samples`
/// controls the resolution of the intermediate sampled function (the grid
/// refinement knob).
inline double hmv_condition_ratio(const RadialFunction& V, int N, std::size_t samples = 80) {
    if (V.all_zero())
        throw std::invalid_argument("hmv_condition_ratio: V vanishes (empty domain)");
    if (!V.decay_hint) throw std::domain_error("hmv_condition_ratio: decay hint required");
    const double q = *V.decay_hint;
    const double r_min = V.r_min(), r_max = V.r_max();
    auto absV = [&V](double s) { return std::abs(V.eval(s)); };

    // I_1 |V| sampled on its own log grid, with an empirical tail hint
    std::vector<double> xs = logspace(r_min, r_max, samples);
    std::vector<double> g1(samples);
    for (std::size_t i = 0; i < samples; ++i)
        g1[i] = detail::riesz_apply_fn(absV, 1.0, N, xs[i], r_min, r_max, q);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < samples; ++i) {
        if (xs[i] < r_max / 10.0 || g1[i] <= 0.0) continue;
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(g1[i]));
    }
    if (lx.size() < 3)
        throw std::runtime_error("hmv_condition_ratio: cannot fit the intermediate tail");
    const double q1 = -fit_line(lx, ly).slope;  // I_1|V| ~ r^{-q1}

    RadialFunction inner;
    inner.radii = xs;
    inner.values = g1;
    inner.decay_hint = q1;
    auto inner_sq = [&inner](double s) {
        const double v = inner.eval(s);
        return v * v;
    };

    double ratio = 0.0;
    for (std::size_t i = 0; i < samples; i += 2) {
        if (!(g1[i] > 1e-300))
            throw std::domain_error("hmv_condition_ratio: I_1 V vanishes at a sample");
        const double num =
            detail::riesz_apply_fn(inner_sq, 1.0, N, xs[i], r_min, r_max, 2.0 * q1);
        ratio = std::max(ratio, num / g1[i]);
    }
    return ratio;
}

/// sup I_2 V over a log grid (Green boundedness on flat space), or a
/// divergence flag when the tail decay cannot beat the kernel (hint <= 2).
struct GreenBoundReport {
    bool finite = false;
    double sup = std::numeric_limits<double>::infinity();
};

inline GreenBoundReport green_bounded_sup_I2(const RadialFunction& V, int N) {
    if (N < 3) throw std::invalid_argument("green_bounded_sup_I2: N must be >= 3");
    if (V.all_zero()) return {true, 0.0};
    if (!V.decay_hint) throw std::domain_error("green_bounded_sup_I2: decay hint required");
    if (*V.decay_hint <= 2.0) return {false, std::numeric_limits<double>::infinity()};

    GreenBoundReport rep;
    rep.finite = true;
    rep.sup = riesz_apply(V, 2.0, N, 0.0);
    for (double x : logspace(V.r_min(), V.r_max(), 25))
        rep.sup = std::max(rep.sup, riesz_apply(V, 2.0, N, x));
    return rep;
}

}  // namespace fujita
