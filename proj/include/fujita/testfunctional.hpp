#pragma once
// Dyadic cutoff functions and the nonexistence-proof ladder sums.
//
// The blow-up argument integrates the equation against space-time cutoffs
// phi_i built from one smooth profile g (1 on [0,1], 0 on [2,inf)) dilated to
// dyadic scales, and reduces everything to explicit dyadic sums weighted by
// the volume law nu(B_r).  Those sums are evaluated here exactly (no PDE
// grid).  Sharpness shows up as a ladder effect: for the critical law
// r^P ln^Q r every sum stays bounded along i = 4..64, while relaxing the
// logarithm to ln^{Q+eps} r makes the fitted ln(sum)-vs-ln(i) slope approach
// eps(p-1)/p.
//
// The sums keep a = 1/i only where it changes the structure at finite i: the
// delta-weight exponents and the sign gate of the negative-weight variant.
// Exponents that converge as a -> 0 are evaluated at their limit, which is
// the regime the boundedness statements address.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fujita/numerics.hpp"

namespace fujita {

// ============================================================================
// Cutoff family
// ============================================================================

/// Smooth dyadic cutoffs: eta_k(t) = g(t/4^k), gamma_k(r) = g(r/2^k), and the
/// averaged product phi_i = (1/i) sum_{k=i+1}^{2i} eta_k gamma_k, which equals
/// 1 on B(2^i) x [0, 4^i].  The derivative supports are disjoint across k.
struct CutoffFamily {
    std::size_t i = 2;

    /// |g'| never exceeds this (attained midway through the ramp).
    static constexpr double profile_derivative_bound = 1.875;

    explicit CutoffFamily(std::size_t scale_index) : i(scale_index) {
        if (i < 2) throw std::invalid_argument("CutoffFamily: scale index must be at least 2");
        if (i > 128) throw std::invalid_argument("CutoffFamily: scale index too large");
    }

    /// Quintic ramp profile: 1 on [0,1], 0 on [2,inf), C^2 at the joints.
    static double profile(double s) { return smoothstep_down(s - 1.0); }

    static double profile_derivative(double s) {
        const double u = s - 1.0;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double w = u * (1.0 - u);
        return -30.0 * w * w;
    }

    static double eta(std::size_t k, double t) { return profile(t / std::ldexp(1.0, 2 * int(k))); }
    static double gamma(std::size_t k, double r) { return profile(r / std::ldexp(1.0, int(k))); }

    static double eta_time_derivative(std::size_t k, double t) {
        const double scale = std::ldexp(1.0, 2 * int(k));
        return profile_derivative(t / scale) / scale;
    }
    static double gamma_radial_derivative(std::size_t k, double r) {
        const double scale = std::ldexp(1.0, int(k));
        return profile_derivative(r / scale) / scale;
    }

    double phi(double r, double t) const {
        double acc = 0.0;
        for (std::size_t k = i + 1; k <= 2 * i; ++k) acc += eta(k, t) * gamma(k, r);
        return acc / double(i);
    }

    double phi_radial_derivative(double r, double t) const {
        double acc = 0.0;
        for (std::size_t k = i + 1; k <= 2 * i; ++k) acc += eta(k, t) * gamma_radial_derivative(k, r);
        return acc / double(i);
    }

    double phi_time_derivative(double r, double t) const {
        double acc = 0.0;
        for (std::size_t k = i + 1; k <= 2 * i; ++k) acc += eta_time_derivative(k, t) * gamma(k, r);
        return acc / double(i);
    }

    /// i^{-theta} sum_k |eta_k gamma_k'|^theta.  Because the gradient supports
    /// are disjoint, this equals |phi_radial_derivative|^theta pointwise.
    double gradient_power_split(double r, double t, double theta) const {
        double acc = 0.0;
        for (std::size_t k = i + 1; k <= 2 * i; ++k)
            acc += std::pow(std::abs(eta(k, t) * gamma_radial_derivative(k, r)), theta);
        return acc / std::pow(double(i), theta);
    }
};

// ============================================================================
// Volume laws
// ============================================================================

/// nu(B_r) = r^P ln^Q r, the power-log family the sharpness statements quantify
/// over.  Only ever evaluated at dyadic radii >= 8, so ln r > 0 throughout.
inline auto power_log_law(double P, double Q) {
    return [P, Q](double r) { return std::pow(r, P) * std::pow(std::log(r), Q); };
}

namespace detail {

inline void require_ladder_args(std::size_t i, double p) {
    if (i < 2) throw std::invalid_argument("ladder sum: scale index must be at least 2");
    if (i > 128) throw std::invalid_argument("ladder sum: scale index too large");
    if (!(p > 1.0)) throw std::invalid_argument("ladder sum: p must exceed 1");
}

} // namespace detail

// ============================================================================
// Proof-side dyadic sums
// ============================================================================

/// Gradient-term bound: (1/i) * [ sum_{k=i+1}^{2i} 2^{2k+1}
///   * (2^{k+1})^{delta2 (p/i)/(p + 1/i - 1)} * 2^{-2pk/(p-1)} * nu(2^{k+1})
/// ]^{(p-1)/p}.
template <class VolumeLaw>
double j_sum(std::size_t i, double p, VolumeLaw&& nu, double delta2 = 0.0) {
    detail::require_ladder_args(i, p);
    const double a = 1.0 / double(i);
    double s = 0.0;
    for (std::size_t k = i + 1; k <= 2 * i; ++k) {
        const double kk = double(k);
        const double e = (2.0 * kk + 1.0) + (kk + 1.0) * delta2 * (p * a) / (p + a - 1.0) -
                         2.0 * p * kk / (p - 1.0);
        s += std::exp2(e) * nu(std::ldexp(1.0, int(k) + 1));
    }
    return a * std::pow(s, (p - 1.0) / p);
}

enum class LVariant {
    Time, ///< time-derivative term carrying the delta2 weight
    Final ///< terminal term, no delta weight
};

/// Time-derivative bound: [ i^{-p/(p-1)} sum_{k} 2^{-2pk/(p-1)} 2^{2k}
///   * (delta2 weight, Time variant only) * nu(2^{k+1}) ]^{(p-1)/p}.
template <class VolumeLaw>
double l_sum(std::size_t i, double p, VolumeLaw&& nu, double delta2 = 0.0,
             LVariant variant = LVariant::Time) {
    detail::require_ladder_args(i, p);
    const double a = 1.0 / double(i);
    double s = 0.0;
    for (std::size_t k = i + 1; k <= 2 * i; ++k) {
        const double kk = double(k);
        double e = 2.0 * kk - 2.0 * p * kk / (p - 1.0);
        if (variant == LVariant::Time) e += (kk + 1.0) * delta2 * (p * a) / (p + a - 1.0);
        s += std::exp2(e) * nu(std::ldexp(1.0, int(k) + 1));
    }
    return std::pow(std::pow(double(i), -p / (p - 1.0)) * s, (p - 1.0) / p);
}

/// Variant with the inverse transform weight, defined only when p - 1/i - 1 > 0;
/// delta1 replaces delta2 and its exponent denominator flips sign to p - 1/i - 1.
template <class VolumeLaw>
double j_sum_negative_weight(std::size_t i, double p, VolumeLaw&& nu, double delta1 = 0.0) {
    detail::require_ladder_args(i, p);
    const double a = 1.0 / double(i);
    if (!(p - a - 1.0 > 0.0))
        throw std::domain_error("j_sum_negative_weight: requires p - 1/i - 1 > 0 "
                                "(scale index too small for this p)");
    double s = 0.0;
    for (std::size_t k = i + 1; k <= 2 * i; ++k) {
        const double kk = double(k);
        const double e = (2.0 * kk + 1.0) + (kk + 1.0) * delta1 * (p * a) / (p - a - 1.0) -
                         2.0 * p * kk / (p - 1.0);
        s += std::exp2(e) * nu(std::ldexp(1.0, int(k) + 1));
    }
    return a * std::pow(s, (p - 1.0) / p);
}

// ============================================================================
// Reports and ladders
// ============================================================================

struct FunctionalReport {
    std::size_t i = 0;
    double j = std::numeric_limits<double>::quiet_NaN();
    double l_time = std::numeric_limits<double>::quiet_NaN();
    double l_final = std::numeric_limits<double>::quiet_NaN();
    /// NaN when the sign gate p - 1/i - 1 > 0 fails at this scale.
    double j_negative = std::numeric_limits<double>::quiet_NaN();
};

template <class VolumeLaw>
FunctionalReport functional_report(std::size_t i, double p, VolumeLaw&& nu, double delta1 = 0.0,
                                   double delta2 = 0.0) {
    FunctionalReport rep;
    rep.i = i;
    rep.j = j_sum(i, p, nu, delta2);
    rep.l_time = l_sum(i, p, nu, delta2, LVariant::Time);
    rep.l_final = l_sum(i, p, nu, 0.0, LVariant::Final);
    if (p - 1.0 / double(i) - 1.0 > 0.0) rep.j_negative = j_sum_negative_weight(i, p, nu, delta1);
    return rep;
}

struct LadderFit {
    std::vector<double> scales; ///< the i values
    std::vector<double> values; ///< the sums
    double slope = 0.0;         ///< least-squares slope of ln(value) vs ln(i)
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

/// Fit ln(sum) against ln(i) over every integer scale in [i_min, i_max]; the
/// slope is the desk-scale surrogate for the i -> infinity boundedness claims.
template <class SumOfScale>
LadderFit ladder_fit(SumOfScale&& sum_of, std::size_t i_min = 4, std::size_t i_max = 64) {
    if (i_min < 2 || i_max <= i_min)
        throw std::invalid_argument("ladder_fit: need 2 <= i_min < i_max");
    LadderFit fit;
    std::vector<double> lx, ly;
    for (std::size_t i = i_min; i <= i_max; ++i) {
        const double v = sum_of(i);
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::domain_error("ladder_fit: sums must be finite and positive");
        fit.scales.push_back(double(i));
        fit.values.push_back(v);
        lx.push_back(std::log(double(i)));
        ly.push_back(std::log(v));
    }
    const LineFit lf = fit_line(lx, ly);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.slope_stderr = lf.slope_stderr;
    return fit;
}

} // namespace fujita
