#pragma once
// Phase-diagram sweeps: classify u_t = L u - V u + u^p across a p-grid and a
// ladder of data amplitudes, bracket the empirical critical exponent, and
// attach the theoretical exponent whenever the configuration supplies one.
// Points are independent, so the grid is statically partitioned across
// worker threads; aggregation and rendering are single-threaded.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fujita/evolution.hpp"
#include "fujita/geometry.hpp"
#include "fujita/potentials.hpp"

namespace fujita {

// ============================================================================
// Configuration
// ============================================================================

struct SweepConfig {
    ModelManifold manifold = ModelManifold::euclidean(3);
    PotentialSpec potential = PotentialSpec::zero();

    double p_min = 1.3; ///< grid within (1, 10]
    double p_max = 2.2;
    double p_step = 0.1;

    std::vector<double> amplitudes = {0.01}; ///< Gaussian data ladder
    double sigma = 1.0;

    double r_max = 200.0; ///< computational ball radius
    std::size_t cells = 2000;
    double stretch = 1.02;

    /// Per-point evolution budget; p, amplitude and sigma are overwritten.
    EvolutionConfig evolution;

    unsigned workers = 0; ///< 0 = hardware concurrency
};

inline std::vector<double> sweep_p_grid(const SweepConfig& cfg) {
    if (!(cfg.p_step > 0.0)) throw std::invalid_argument("sweep: p_step must be positive");
    if (!(cfg.p_min > 1.0) || cfg.p_max > 10.0 || cfg.p_max < cfg.p_min)
        throw std::invalid_argument("sweep: p-grid must lie within (1, 10]");
    std::vector<double> ps;
    for (double p = cfg.p_min; p <= cfg.p_max + 1e-9 * cfg.p_step; p += cfg.p_step)
        ps.push_back(p);
    return ps;
}

// ============================================================================
// Report
// ============================================================================

struct SweepPoint {
    double p = 0.0;
    double amplitude = 0.0;
    Classification cls = Classification::Undecided;
    double t_blowup = std::numeric_limits<double>::quiet_NaN();
    double sup_final = 0.0;
    bool boundary_flag = false;
};

struct SweepReport {
    std::vector<SweepPoint> points; ///< ordered by (p, amplitude)

    /// Small-data class per p value (taken at the smallest amplitude, which is
    /// the regime the dichotomy speaks about).
    std::vector<double> p_values;
    std::vector<Classification> p_class;

    double p_lo = std::numeric_limits<double>::quiet_NaN(); ///< largest blow-up p
    double p_hi = std::numeric_limits<double>::quiet_NaN(); ///< smallest global p
    double undecided_band = std::numeric_limits<double>::quiet_NaN();
    bool monotonic = true; ///< false = repair flag: a global p below a blow-up p

    std::optional<double> p_star_theory;
    std::string theory_provenance; ///< which result supplied p_star
};

namespace detail {

/// Theoretical critical exponent for the configuration, when one is known.
inline std::pair<std::optional<double>, std::string> sweep_theory(const SweepConfig& cfg) {
    using Family = PotentialSpec::Family;
    const auto& man = cfg.manifold;
    const auto& pot = cfg.potential;
    if (man.kind == WarpKind::Euclidean) {
        switch (pot.family) {
            case Family::Zero:
                return {1.0 + 2.0 / man.dim, "flat space, zero potential: 1 + 2/N"};
            case Family::HardyExample:
            case Family::RegularizedInverseSquare:
                return {fujita_exponent_theory(man.dim, pot.omega),
                        "quadratic-decay coupling: 1 + 2/(N + alpha(omega))"};
            case Family::InversePower:
                if (pot.b > 2.0)
                    return {1.0 + 2.0 / man.dim,
                            "integrable tail (b > 2), bounded transform profile: 1 + 2/N"};
                return {std::nullopt, ""};
            case Family::Tabulated:
                return {std::nullopt, ""};
        }
    }
    if (man.kind == WarpKind::LogPolynomial && pot.family == Family::Zero)
        return {1.0 + 2.0 / man.alpha, "volume growth power: 1 + 2/alpha"};
    return {std::nullopt, ""};
}

} // namespace detail

// ============================================================================
// The sweep
// ============================================================================

/// Classify every (p, amplitude) point, bracket the critical exponent from the
/// smallest-amplitude row, and attach theory when available.  Throws when every
/// point comes back UNDECIDED (budget exhausted) or the grid is empty.
inline SweepReport fujita_sweep(const SweepConfig& cfg) {
    const std::vector<double> ps = sweep_p_grid(cfg);
    if (ps.empty()) throw std::invalid_argument("sweep: empty p-grid");
    if (cfg.amplitudes.empty()) throw std::invalid_argument("sweep: empty amplitude ladder");
    for (double a : cfg.amplitudes)
        if (!(a > 0.0)) throw std::invalid_argument("sweep: amplitudes must be positive");
    if (!(cfg.evolution.T_max > 0.0)) throw std::invalid_argument("sweep: budget must be positive");

    std::vector<double> ladder = cfg.amplitudes;
    std::sort(ladder.begin(), ladder.end());

    const RadialGrid grid = RadialGrid::build(cfg.manifold, cfg.r_max, int(cfg.cells), cfg.stretch);
    TridiagonalOperator L = laplacian_operator(grid, cfg.manifold);
    if (cfg.potential.family != PotentialSpec::Family::Zero) {
        const std::vector<double> vx = cfg.potential.values_on(grid);
        L = L.with_potential(std::span(vx.data(), grid.cells()));
    }

    std::vector<SweepPoint> points(ps.size() * ladder.size());
    auto run_point = [&](std::size_t flat) {
        const double p = ps[flat / ladder.size()];
        const double amp = ladder[flat % ladder.size()];
        EvolutionConfig ev = cfg.evolution;
        ev.p = p;
        ev.amplitude = amp;
        ev.sigma = cfg.sigma;
        ev.initial_values.clear();
        ev.time_lattice.clear();
        const EvolutionOutcome out = evolve_nonlinear(ev, grid, L);
        SweepPoint& pt = points[flat];
        pt.p = p;
        pt.amplitude = amp;
        pt.cls = out.cls;
        if (out.t_blowup) pt.t_blowup = *out.t_blowup;
        pt.sup_final = out.final_sup;
        pt.boundary_flag = out.boundary_contaminated;
    };

    unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, unsigned(points.size()));
    if (workers <= 1) {
        for (std::size_t f = 0; f < points.size(); ++f) run_point(f);
    } else {
        // Static partition: worker w owns indices w, w + workers, ...
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t f = w; f < points.size(); f += workers) run_point(f);
            });
        for (auto& th : pool) th.join();
    }

    SweepReport rep;
    rep.points = std::move(points);

    bool any_decided = false;
    for (std::size_t k = 0; k < ps.size(); ++k) {
        rep.p_values.push_back(ps[k]);
        // smallest amplitude = first entry of the sorted ladder for this p
        const SweepPoint& small = rep.points[k * ladder.size()];
        rep.p_class.push_back(small.cls);
        if (small.cls != Classification::Undecided) any_decided = true;
    }
    if (!any_decided)
        throw std::runtime_error("sweep: evolution budget exhausted, every point UNDECIDED");

    for (std::size_t k = 0; k < rep.p_values.size(); ++k) {
        if (rep.p_class[k] == Classification::Blowup)
            rep.p_lo = std::isnan(rep.p_lo) ? rep.p_values[k] : std::max(rep.p_lo, rep.p_values[k]);
        if (rep.p_class[k] == Classification::Global)
            rep.p_hi = std::isnan(rep.p_hi) ? rep.p_values[k] : std::min(rep.p_hi, rep.p_values[k]);
    }
    if (!std::isnan(rep.p_lo) && !std::isnan(rep.p_hi)) {
        rep.undecided_band = rep.p_hi - rep.p_lo;
        rep.monotonic = rep.p_lo < rep.p_hi;
    }

    const auto [pstar, prov] = detail::sweep_theory(cfg);
    rep.p_star_theory = pstar;
    rep.theory_provenance = prov;
    return rep;
}

// ============================================================================
// Rendering
// ============================================================================

struct RenderedReport {
    std::string csv;      ///< header p,amplitude,class,t_blowup,sup_final,boundary_flag
    nlohmann::json json;  ///< mirrors SweepReport
    /// (p, class code) pairs with codes -1 blow-up, 0 undecided, +1 global.
    std::vector<std::pair<double, int>> plot;
    std::optional<double> plot_vertical; ///< theory exponent, when present
};

namespace detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

inline RenderedReport report_render(const SweepReport& rep) {
    if (rep.points.empty()) throw std::invalid_argument("report_render: empty report");

    RenderedReport out;
    out.csv = "p,amplitude,class,t_blowup,sup_final,boundary_flag\n";
    for (const SweepPoint& pt : rep.points) {
        out.csv += detail::format_double(pt.p);
        out.csv += ',';
        out.csv += detail::format_double(pt.amplitude);
        out.csv += ',';
        out.csv += to_string(pt.cls);
        out.csv += ',';
        out.csv += detail::format_double(pt.t_blowup);
        out.csv += ',';
        out.csv += detail::format_double(pt.sup_final);
        out.csv += ',';
        out.csv += pt.boundary_flag ? '1' : '0';
        out.csv += '\n';
    }

    nlohmann::json jpoints = nlohmann::json::array();
    for (const SweepPoint& pt : rep.points)
        jpoints.push_back({{"p", pt.p},
                           {"amplitude", pt.amplitude},
                           {"class", to_string(pt.cls)},
                           {"t_blowup", pt.t_blowup},
                           {"sup_final", pt.sup_final},
                           {"boundary_flag", pt.boundary_flag}});
    nlohmann::json jclass = nlohmann::json::array();
    for (std::size_t k = 0; k < rep.p_values.size(); ++k)
        jclass.push_back({{"p", rep.p_values[k]}, {"class", to_string(rep.p_class[k])}});
    out.json = {{"points", jpoints},
                {"small_data_class", jclass},
                {"bracket", {{"p_lo", rep.p_lo}, {"p_hi", rep.p_hi}}},
                {"undecided_band", rep.undecided_band},
                {"monotonic", rep.monotonic}};
    if (rep.p_star_theory) {
        out.json["p_star_theory"] = *rep.p_star_theory;
        out.json["theory_provenance"] = rep.theory_provenance;
    }

    for (std::size_t k = 0; k < rep.p_values.size(); ++k) {
        int code = 0;
        if (rep.p_class[k] == Classification::Blowup) code = -1;
        if (rep.p_class[k] == Classification::Global) code = 1;
        out.plot.emplace_back(rep.p_values[k], code);
    }
    out.plot_vertical = rep.p_star_theory;
    return out;
}

} // namespace fujita
