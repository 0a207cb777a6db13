#pragma once

/// Radial potential families and the exponent algebra tying them to the
/// critical power: alpha(omega), the perturbed Fujita exponent
/// p*(omega) = 1 + 2/(N + alpha(omega)), and the pair P = 2/(p-1), Q = 1/(p-1)
/// entering the volume-growth conditions.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fujita/geometry.hpp"

namespace fujita {

// ============================================================================
// Exponent algebra
// ============================================================================

/// Larger root of alpha(alpha + N - 2) = omega.
inline double alpha_of_omega(int N, double omega) {
    if (N < 3) throw std::invalid_argument("alpha_of_omega: N must be >= 3");
    const double disc = double(N - 2) * double(N - 2) + 4.0 * omega;
    if (disc < 0.0)
        throw std::domain_error("alpha_of_omega: omega below -(N-2)^2/4, no real root");
    return 0.5 * (-(N - 2.0) + std::sqrt(disc));
}

/// Critical power 1 + 2/(N + alpha(omega)); reduces to 1 + 2/N at omega = 0.
inline double fujita_exponent_theory(int N, double omega) {
    return 1.0 + 2.0 / (N + alpha_of_omega(N, omega));
}

/// The exponent pair attached to a power p > 1, optionally carrying the
/// critical-power data of a potential.
struct ExponentBundle {
    double p;
    double P;  // 2/(p-1)
    double Q;  // 1/(p-1)
    std::optional<double> alpha;
    std::optional<double> p_star;

    static ExponentBundle for_power(double p) {
        if (!(p > 1.0)) throw std::invalid_argument("ExponentBundle: p must exceed 1");
        return {p, 2.0 / (p - 1.0), 1.0 / (p - 1.0), std::nullopt, std::nullopt};
    }

    static ExponentBundle with_theory(double p, int N, double omega) {
        ExponentBundle b = for_power(p);
        b.alpha = alpha_of_omega(N, omega);
        b.p_star = fujita_exponent_theory(N, omega);
        return b;
    }
};

// ============================================================================
// Potential families
// ============================================================================

/// A rotationally symmetric potential V(r).  Families:
///   Zero                        V = 0
///   InversePower{omega, b}      V = omega/(1+r^b)
///   RegularizedInverseSquare    V = (omega/r^2)(1+r^{-theta}) for r >= 1,
///                               cubic Hermite cap on [0,1] keeping V in C^1
///   HardyExample{N, omega}      V = (alpha(omega) N + omega r^2)/(1+r^2)^2,
///                               whose exact profile h = (1+r^2)^{alpha/2}
///                               solves the conjugation equation in closed form
///   Tabulated                   linear interpolation of sampled values
struct PotentialSpec {
    enum class Family { Zero, InversePower, RegularizedInverseSquare, HardyExample, Tabulated };

    Family family = Family::Zero;
    double omega = 0.0;
    double b = 0.0;      // InversePower decay exponent
    double theta = 0.0;  // RegularizedInverseSquare perturbation exponent
    int N = 3;           // HardyExample ambient dimension
    std::vector<double> tab_r, tab_v;

    static PotentialSpec zero() { return {}; }

    static PotentialSpec inverse_power(double omega, double b) {
        if (!(b > 0.0)) throw std::invalid_argument("inverse_power: b must be positive");
        PotentialSpec s;
        s.family = Family::InversePower;
        s.omega = omega;
        s.b = b;
        return s;
    }

    static PotentialSpec regularized_inverse_square(double omega, double theta) {
        if (omega < 0.0)
            throw std::invalid_argument("regularized_inverse_square: omega must be >= 0");
        if (!(theta > 0.0))
            throw std::invalid_argument("regularized_inverse_square: theta must be positive");
        PotentialSpec s;
        s.family = Family::RegularizedInverseSquare;
        s.omega = omega;
        s.theta = theta;
        return s;
    }

    static PotentialSpec hardy_example(int N, double omega) {
        const double floor = -0.25 * double(N - 2) * double(N - 2);
        if (omega < floor || omega >= 0.0)
            throw std::invalid_argument("hardy_example: omega must lie in [-(N-2)^2/4, 0)");
        PotentialSpec s;
        s.family = Family::HardyExample;
        s.N = N;
        s.omega = omega;
        return s;
    }

    static PotentialSpec tabulated(std::vector<double> radii, std::vector<double> values) {
        if (radii.size() != values.size() || radii.size() < 2)
            throw std::invalid_argument("tabulated: need >= 2 matching samples");
        for (std::size_t i = 1; i < radii.size(); ++i)
            if (!(radii[i] > radii[i - 1]))
                throw std::invalid_argument("tabulated: radii must be strictly increasing");
        PotentialSpec s;
        s.family = Family::Tabulated;
        s.tab_r = std::move(radii);
        s.tab_v = std::move(values);
        return s;
    }

    double eval(double r) const {
        if (r < 0.0) throw std::domain_error("PotentialSpec::eval: negative radius");
        switch (family) {
            case Family::Zero:
                return 0.0;
            case Family::InversePower:
                return omega / (1.0 + std::pow(r, b));
            case Family::RegularizedInverseSquare: {
                if (r >= 1.0) return omega / (r * r) * (1.0 + std::pow(r, -theta));
                // Hermite cap: V(0)=V'(0)=0, matching value and slope at r=1
                // (the outer branch has V(1) = 2*omega, V'(1) = -omega*(4+theta))
                const double v1 = 2.0 * omega;
                const double d1 = -omega * (4.0 + theta);
                return v1 * (3.0 - 2.0 * r) * r * r + d1 * (r - 1.0) * r * r;
            }
            case Family::HardyExample: {
                const double a = alpha_of_omega(N, omega);
                const double q = 1.0 + r * r;
                return (a * N + omega * r * r) / (q * q);
            }
            case Family::Tabulated: {
                if (r <= tab_r.front()) return tab_v.front();
                if (r >= tab_r.back()) return tab_v.back();
                const auto it = std::upper_bound(tab_r.begin(), tab_r.end(), r);
                const std::size_t i = std::size_t(it - tab_r.begin());
                const double t = (r - tab_r[i - 1]) / (tab_r[i] - tab_r[i - 1]);
                return tab_v[i - 1] + t * (tab_v[i] - tab_v[i - 1]);
            }
        }
        throw std::logic_error("PotentialSpec::eval: unreachable");
    }

    /// Potential sampled at every grid node (incl. the Dirichlet node).
    std::vector<double> values_on(const RadialGrid& g) const {
        std::vector<double> out(g.r.size());
        for (std::size_t j = 0; j < g.r.size(); ++j) out[j] = eval(g.r[j]);
        return out;
    }

    std::string family_name() const {
        switch (family) {
            case Family::Zero: return "zero";
            case Family::InversePower: return "inverse_power";
            case Family::RegularizedInverseSquare: return "regularized_inverse_square";
            case Family::HardyExample: return "hardy_example";
            case Family::Tabulated: return "tabulated";
        }
        return "?";
    }
};

/// Exact conjugation profile for the HardyExample family:
/// h(r) = (1+r^2)^{alpha(omega)/2}.
inline double hardy_closed_form_h(int N, double omega, double r) {
    return std::pow(1.0 + r * r, 0.5 * alpha_of_omega(N, omega));
}

}  // namespace fujita
