#pragma once

/// Small numerical toolbox shared by the library: Gauss-Legendre rules,
/// tridiagonal solves, and least-squares line/plane fits.  Everything here is
/// dependency-free and cheap enough to live in a header.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fujita {

// ============================================================================
// Gauss-Legendre quadrature
// ============================================================================

struct QuadRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1], computed once
/// by Newton iteration on P_n and cached per order.
inline const QuadRule& gauss_legendre(int n) {
    static auto make = [](int m) {
        QuadRule q;
        q.nodes.resize(m);
        q.weights.resize(m);
        for (int i = 0; i < m; ++i) {
            // Chebyshev-like initial guess, then Newton on P_m(x) = 0.
            double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= m; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            q.nodes[i] = x;
            q.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return q;
    };
    static const QuadRule q4 = make(4);
    static const QuadRule q8 = make(8);
    static const QuadRule q16 = make(16);
    static const QuadRule q64 = make(64);
    switch (n) {
        case 4: return q4;
        case 8: return q8;
        case 16: return q16;
        case 64: return q64;
        default: break;
    }
    throw std::invalid_argument("gauss_legendre: unsupported order");
}

/// Integrate f over [a,b] with one n-point Gauss-Legendre panel.
template <class F>
double gl_panel(const F& f, double a, double b, int n = 8) {
    const QuadRule& q = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
        acc += q.weights[i] * f(mid + half * q.nodes[i]);
    return half * acc;
}

// ============================================================================
// Tridiagonal systems
// ============================================================================

/// Solve (sub, diag, sup) x = rhs by the Thomas algorithm.  All spans have the
/// same length n; sub[0] and sup[n-1] are ignored.  Overwrites nothing; the
/// scratch vectors are kept local so the call is re-entrant.
inline std::vector<double> thomas_solve(std::span<const double> sub,
                                        std::span<const double> diag,
                                        std::span<const double> sup,
                                        std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n)
        throw std::invalid_argument("thomas_solve: size mismatch");
    std::vector<double> cp(n), dp(n), x(n);
    if (diag[0] == 0.0) throw std::domain_error("thomas_solve: zero pivot");
    cp[0] = sup[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for (std::size_t j = 1; j < n; ++j) {
        const double m = diag[j] - sub[j] * cp[j - 1];
        if (m == 0.0) throw std::domain_error("thomas_solve: zero pivot");
        cp[j] = sup[j] / m;
        dp[j] = (rhs[j] - sub[j] * dp[j - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) x[j] = dp[j] - cp[j] * x[j + 1];
    return x;
}

// ============================================================================
// Least squares
// ============================================================================

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_stderr = 0.0;   // from residual variance
    double max_abs_residual = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    double xb = 0.0, yb = 0.0;
    for (std::size_t i = 0; i < n; ++i) { xb += x[i]; yb += y[i]; }
    xb /= n;
    yb /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xb) * (x[i] - xb);
        sxy += (x[i] - xb) * (y[i] - yb);
    }
    if (sxx == 0.0) throw std::domain_error("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = yb - f.slope * xb;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
        f.max_abs_residual = std::max(f.max_abs_residual, std::abs(r));
    }
    if (n > 2) f.slope_stderr = std::sqrt(ss / double(n - 2) / sxx);
    return f;
}

struct PlaneFit {
    std::array<double, 3> coef{};     // y ~ c0 + c1*x1 + c2*x2
    std::array<double, 3> stderr_{};  // per-coefficient standard errors
    double max_abs_residual = 0.0;
};

/// Least squares with two regressors, solved through the 3x3 normal equations
/// with full pivoting (the regressors can be strongly collinear; the standard
/// errors then come out large, which is the honest answer).
inline PlaneFit fit_plane(std::span<const double> x1, std::span<const double> x2,
                          std::span<const double> y) {
    const std::size_t n = y.size();
    if (x1.size() != n || x2.size() != n || n < 4)
        throw std::invalid_argument("fit_plane: need >= 4 points");
    double A[3][3] = {{0}}, b[3] = {0};
    for (std::size_t i = 0; i < n; ++i) {
        const double row[3] = {1.0, x1[i], x2[i]};
        for (int r = 0; r < 3; ++r) {
            b[r] += row[r] * y[i];
            for (int c = 0; c < 3; ++c) A[r][c] += row[r] * row[c];
        }
    }
    // invert A (3x3, Gauss-Jordan); we also need the inverse for the errors
    double inv[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    double M[3][3];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) M[r][c] = A[r][c];
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        if (M[piv][col] == 0.0) throw std::domain_error("fit_plane: singular normal matrix");
        std::swap(M[piv], M[col]);
        std::swap(inv[piv], inv[col]);
        const double d = M[col][col];
        for (int c = 0; c < 3; ++c) { M[col][c] /= d; inv[col][c] /= d; }
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = M[r][col];
            for (int c = 0; c < 3; ++c) {
                M[r][c] -= f * M[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    PlaneFit fit;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) fit.coef[r] += inv[r][c] * b[c];
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = fit.coef[0] + fit.coef[1] * x1[i] + fit.coef[2] * x2[i];
        const double res = y[i] - pred;
        ss += res * res;
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(res));
    }
    const double sigma2 = (n > 3) ? ss / double(n - 3) : 0.0;
    for (int r = 0; r < 3; ++r) fit.stderr_[r] = std::sqrt(std::max(0.0, sigma2 * inv[r][r]));
    return fit;
}

// ============================================================================
// Misc
// ============================================================================

/// Falling quintic smoothstep: 1 at s<=0, 0 at s>=1, C^2 joins.
inline double smoothstep_down(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return 1.0 + s * s * s * (-10.0 + s * (15.0 - 6.0 * s));
}

/// n log-spaced points from lo to hi inclusive.
inline std::vector<double> logspace(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("logspace: bad range");
    std::vector<double> out(n);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i) out[i] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

/// Area of the unit sphere S^{n} embedded in R^{n+1}.
inline double unit_sphere_area(int n) {
    if (n < 0) throw std::invalid_argument("unit_sphere_area: negative dimension");
    return 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

}  // namespace fujita
