#pragma once

/// Rotationally symmetric model geometries dr^2 + psi(r)^2 dtheta^2, the radial
/// grids used everywhere else, and the finite-volume radial Laplacian.
///
/// Two warp profiles are supported:
///   * Euclidean:       psi(r) = r
///   * LogPolynomial:   psi(r) = (r^{alpha-1} ln^{alpha/2} r)^{1/(k-1)} at large r,
///                      psi(r) = r near the origin, blended C^1 on [1, 2]
/// The log-polynomial surface area is then S(r) = omega_{k-1} r^{alpha-1} ln^{alpha/2} r
/// beyond the blend window, which gives ball volumes ~ r^alpha ln^{alpha/2} r.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fujita/numerics.hpp"

namespace fujita {

// ============================================================================
// ModelManifold
// ============================================================================

enum class WarpKind { Euclidean, LogPolynomial };

struct ModelManifold {
    WarpKind kind = WarpKind::Euclidean;
    int dim = 3;          // k >= 2
    double alpha = 0.0;   // log-polynomial volume exponent, > 0

    // blend window for the log-polynomial profile; both branches positive here
    static constexpr double blend_lo = 1.0;
    static constexpr double blend_hi = 2.0;

    static ModelManifold euclidean(int k) {
        if (k < 2) throw std::invalid_argument("ModelManifold: dimension must be >= 2");
        return {WarpKind::Euclidean, k, 0.0};
    }

    static ModelManifold log_polynomial(int k, double alpha) {
        if (k < 2) throw std::invalid_argument("ModelManifold: dimension must be >= 2");
        if (!(alpha > 0.0))
            throw std::invalid_argument("ModelManifold: log-polynomial profile needs alpha > 0");
        return {WarpKind::LogPolynomial, k, alpha};
    }

    double sphere_factor() const { return unit_sphere_area(dim - 1); }

    /// Warp function psi(r).
    double warp(double r) const {
        if (r < 0.0) throw std::invalid_argument("warp: negative radius");
        if (kind == WarpKind::Euclidean || r <= blend_lo) return r;
        const double outer = std::pow(std::pow(r, alpha - 1.0) * std::pow(std::log(r), 0.5 * alpha),
                                      1.0 / (dim - 1));
        if (r >= blend_hi) return outer;
        const double w = 1.0 - smoothstep_down((r - blend_lo) / (blend_hi - blend_lo));
        return (1.0 - w) * r + w * outer;
    }

    /// Boundary area of the geodesic sphere of radius r.
    double surface_area(double r) const {
        return sphere_factor() * std::pow(warp(r), dim - 1);
    }

    /// Volume of the geodesic ball of radius r (composite Gauss-Legendre;
    /// uniform panels through the blend window, then log-spaced ones).
    double ball_volume(double r) const {
        if (r < 0.0) throw std::invalid_argument("ball_volume: negative radius");
        if (r == 0.0) return 0.0;
        auto S = [this](double s) { return surface_area(s); };
        const double r0 = std::min(r, 4.0);
        double vol = 0.0;
        const int n0 = 32;
        for (int i = 0; i < n0; ++i)
            vol += gl_panel(S, r0 * i / n0, r0 * (i + 1) / n0, 8);
        if (r > r0) {
            // ~24 panels per decade keeps the tail integral at round-off level
            const int per_decade = 24;
            const int n1 = std::max(2, int(per_decade * std::log10(r / r0)) + 1);
            const double step = std::log(r / r0) / n1;
            for (int i = 0; i < n1; ++i)
                vol += gl_panel(S, r0 * std::exp(step * i), r0 * std::exp(step * (i + 1)), 8);
        }
        return vol;
    }
};

// ============================================================================
// RadialGrid
// ============================================================================

/// Node-centred radial grid on [0, r_max]: uniform spacing on [0, 1], then
/// geometrically stretched (ratio <= 1.02).  Nodes r[0]=0 .. r[M]=r_max; the
/// outermost node carries the homogeneous Dirichlet condition, so evolved
/// fields are indexed 0..M-1.  Cell j spans [interface[j-1], interface[j]]
/// with interface[-1] = 0; the trailing half-cell [interface[M-1], r_max]
/// belongs to the Dirichlet node, so the M+1 volumes partition the whole ball
/// and sum to its volume.
struct RadialGrid {
    std::vector<double> r;         // nodes, size M+1
    std::vector<double> interface; // size M: midpoint between nodes j and j+1
    std::vector<double> volume;    // size M+1: cell volumes incl. the boundary half-cell
    double dr_uniform = 0.0;       // spacing of the uniform inner region
    double ratio = 1.0;

    /// Number of evolved cells (the Dirichlet half-cell is excluded).
    std::size_t cells() const { return volume.size() - 1; }
    double r_max() const { return r.back(); }

    /// Smallest spacing of the inner (uniform) region; the natural accuracy
    /// scale for time steps.
    double dr_min() const { return dr_uniform; }

    static RadialGrid build(const ModelManifold& m, double r_max, int cells,
                            double ratio = 1.02) {
        if (!(r_max > 0.0)) throw std::invalid_argument("RadialGrid: r_max must be positive");
        if (cells < 16) throw std::invalid_argument("RadialGrid: need at least 16 cells");
        if (!(ratio > 1.0 && ratio <= 1.02))
            throw std::invalid_argument("RadialGrid: stretch ratio must lie in (1, 1.02]");

        auto nodes_for = [&](double dr0) {
            const double uniform_to = std::min(1.0, r_max);
            // snap the spacing so the uniform region divides evenly (no sliver)
            const int n_uni = std::max(1, int(std::lround(uniform_to / dr0)));
            std::vector<double> rs;
            rs.reserve(std::size_t(n_uni) + 64);
            for (int i = 0; i <= n_uni; ++i) rs.push_back(uniform_to * i / n_uni);
            double rr = uniform_to, d = uniform_to / n_uni;
            while (rr < r_max - 1e-14) {
                d *= ratio;
                rr += d;
                if (rr >= r_max - 0.3 * d) {  // avoid a sliver cell at the wall
                    rs.push_back(r_max);
                    break;
                }
                rs.push_back(rr);
            }
            if (rs.back() != r_max) rs.push_back(r_max);
            return rs;
        };

        // Bisect the base spacing so the cell count comes out as requested.
        // The lower bracket puts 2*cells nodes in the uniform region alone, so
        // the count there always exceeds the request.
        double lo = std::min(1.0, r_max) / (2.0 * cells), hi = std::min(1.0, r_max);
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (int(nodes_for(mid).size()) - 1 > cells) lo = mid;
            else hi = mid;
            if (hi / lo < 1.0 + 1e-12) break;
        }
        RadialGrid g;
        g.r = nodes_for(std::sqrt(lo * hi));
        g.ratio = ratio;
        g.dr_uniform = g.r[1] - g.r[0];

        const std::size_t M = g.r.size() - 1;
        g.interface.resize(M);
        for (std::size_t j = 0; j < M; ++j) g.interface[j] = 0.5 * (g.r[j] + g.r[j + 1]);
        g.volume.resize(M + 1);
        auto S = [&m](double s) { return m.surface_area(s); };
        for (std::size_t j = 0; j < M; ++j) {
            const double a = (j == 0) ? 0.0 : g.interface[j - 1];
            g.volume[j] = gl_panel(S, a, g.interface[j], 8);
        }
        g.volume[M] = gl_panel(S, g.interface[M - 1], g.r[M], 8);
        return g;
    }
};

// ============================================================================
// Finite-volume radial Laplacian
// ============================================================================

/// Tridiagonal operator row j:  (Lv)_j = sub[j] v_{j-1} + diag[j] v_j + sup[j] v_{j+1}
/// acting on cell values v_0..v_{M-1}; v_M = 0 (Dirichlet) is folded into the
/// last row, the zero-flux condition at r=0 into the first.  `cellw` holds the
/// weighted cell volumes W_j: the operator is self-adjoint under the inner
/// product sum_j W_j u_j v_j, has nonnegative off-diagonal entries and row sums
/// <= 0 (sub-Markovian).
struct TridiagonalOperator {
    std::vector<double> sub, diag, sup;
    std::vector<double> cellw;

    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(std::span<const double> v) const {
        const std::size_t n = size();
        if (v.size() != n) throw std::invalid_argument("TridiagonalOperator::apply: size mismatch");
        std::vector<double> out(n);
        for (std::size_t j = 0; j < n; ++j) {
            double acc = diag[j] * v[j];
            if (j > 0) acc += sub[j] * v[j - 1];
            if (j + 1 < n) acc += sup[j] * v[j + 1];
            out[j] = acc;
        }
        return out;
    }

    /// L - diag(q): used to absorb a potential term into the linear part.
    TridiagonalOperator with_potential(std::span<const double> q) const {
        if (q.size() != size())
            throw std::invalid_argument("with_potential: size mismatch");
        TridiagonalOperator op = *this;
        for (std::size_t j = 0; j < size(); ++j) op.diag[j] -= q[j];
        return op;
    }

    double weighted_mass(std::span<const double> v) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < size(); ++j) acc += cellw[j] * v[j];
        return acc;
    }
};

/// Flux-form discrete Laplacian, optionally conjugated by a node profile h>0:
///   (Lv)_j = [F_{j+1/2} - F_{j-1/2}] / W_j,
///   F_{j+1/2} = w_{j+1/2} S(r_{j+1/2}) (v_{j+1} - v_j) / (r_{j+1} - r_j)
/// with interface weight w_{j+1/2} = h_j h_{j+1} and W_j = h_j^2 V_j.  That
/// specific weighting makes the conjugation identity
///   L_h v = (1/h) [ L (h v) - (L h) v ]
/// hold exactly at the discrete level, not just up to truncation error.
/// Pass h = {} for the unweighted operator (w = 1, W = V).
inline TridiagonalOperator laplacian_operator(const RadialGrid& g, const ModelManifold& m,
                                              std::span<const double> h = {}) {
    const std::size_t M = g.cells();
    const bool weighted = !h.empty();
    if (weighted && h.size() != M + 1)
        throw std::invalid_argument("laplacian_operator: h must be a node profile (M+1 values)");
    if (weighted)
        for (std::size_t j = 0; j <= M; ++j)
            if (!(h[j] > 0.0)) throw std::domain_error("laplacian_operator: h must be positive");

    TridiagonalOperator op;
    op.sub.assign(M, 0.0);
    op.diag.assign(M, 0.0);
    op.sup.assign(M, 0.0);
    op.cellw.resize(M);

    std::vector<double> flux_coef(M);  // w_{j+1/2} S_{j+1/2} / (r_{j+1} - r_j)
    for (std::size_t j = 0; j < M; ++j) {
        const double w = weighted ? h[j] * h[j + 1] : 1.0;
        flux_coef[j] = w * m.surface_area(g.interface[j]) / (g.r[j + 1] - g.r[j]);
        op.cellw[j] = (weighted ? h[j] * h[j] : 1.0) * g.volume[j];
    }
    for (std::size_t j = 0; j < M; ++j) {
        const double outgoing = flux_coef[j] / op.cellw[j];
        const double incoming = (j > 0) ? flux_coef[j - 1] / op.cellw[j] : 0.0;
        if (j + 1 < M) op.sup[j] = outgoing;
        // j = M-1 couples to the Dirichlet node: the flux still leaves, the
        // neighbour value is pinned at zero, so only the diagonal keeps it.
        op.sub[j] = incoming;
        op.diag[j] = -(outgoing + incoming);
    }
    return op;
}

}  // namespace fujita
