// Command-line laboratory driver.  Every subcommand reads one INI experiment
// configuration, runs a module pipeline, and writes its artifacts atomically
// into the output directory.  Exit codes: 0 success, 1 scientific failure
// (the run completed but an inequality or classification failed), 2 usage or
// configuration error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fujita/config.hpp"
#include "fujita/duhamel.hpp"
#include "fujita/evolution.hpp"
#include "fujita/experiments.hpp"
#include "fujita/geometry.hpp"
#include "fujita/htransform.hpp"
#include "fujita/io.hpp"
#include "fujita/potentials.hpp"
#include "fujita/riesz.hpp"
#include "fujita/semigroup.hpp"
#include "fujita/testfunctional.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Invocation {
    std::string config_path; // empty = built-in defaults
    std::string out_dir = ".";
    unsigned workers = 0; // resolved: flag > env > config
    bool workers_given = false;
    bool slow = false;
};

fujita::ExperimentConfig load_config(const Invocation& inv) {
    fujita::ExperimentConfig cfg;
    if (!inv.config_path.empty()) {
        try {
            cfg = fujita::parse_config(inv.config_path);
        } catch (const fujita::ConfigParseError&) {
            throw;
        } catch (const std::runtime_error& e) {
            // an unreadable configuration file is a usage error, not a
            // scientific one
            throw std::invalid_argument(e.what());
        }
    }
    if (inv.workers_given) {
        cfg.sweep.workers = inv.workers;
    } else if (const char* env = std::getenv("FUJITA_LAB_WORKERS")) {
        try {
            cfg.sweep.workers = unsigned(std::stoul(env));
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("FUJITA_LAB_WORKERS is not a number: ") + env);
        }
    }
    return cfg;
}

void write_artifact(const Invocation& inv, const std::string& name, const std::string& content) {
    const fs::path path = fs::path(inv.out_dir) / name;
    fujita::atomic_write_file(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Shared assembly
// ---------------------------------------------------------------------------

struct Workspace {
    fujita::RadialGrid grid;
    fujita::TridiagonalOperator laplacian;      // potential-free
    fujita::TridiagonalOperator schroedinger;   // potential folded in
    std::vector<double> potential_node_values;  // size M+1
    bool has_potential = false;
};

Workspace make_workspace(const fujita::ExperimentConfig& cfg) {
    Workspace w{fujita::RadialGrid::build(cfg.manifold, cfg.grid.r_max, int(cfg.grid.cells),
                                          cfg.grid.stretch),
                {}, {}, {}, false};
    w.laplacian = fujita::laplacian_operator(w.grid, cfg.manifold);
    w.potential_node_values = cfg.potential.values_on(w.grid);
    w.has_potential = cfg.potential.family != fujita::PotentialSpec::Family::Zero;
    w.schroedinger =
        w.has_potential
            ? w.laplacian.with_potential(
                  std::span(w.potential_node_values.data(), w.grid.cells()))
            : w.laplacian;
    return w;
}

/// Decay hint q with |V(r)| <~ r^{-q} for the sampled-function machinery.
std::optional<double> potential_decay_hint(const fujita::PotentialSpec& pot) {
    using Family = fujita::PotentialSpec::Family;
    switch (pot.family) {
        case Family::Zero: return std::nullopt;
        case Family::InversePower: return pot.b;
        case Family::RegularizedInverseSquare:
        case Family::HardyExample: return 2.0;
        case Family::Tabulated: return std::nullopt; // fitted below
    }
    return std::nullopt;
}

json condition_h_json(const fujita::ConditionH& c) {
    return {{"delta1", c.delta1}, {"delta2", c.delta2}, {"pass", c.pass}};
}

json growth_fit_json(const fujita::VolumeGrowthFit& f) {
    return {{"P_hat", f.P_hat},
            {"Q_hat", f.Q_hat},
            {"band_P", f.band_P},
            {"band_Q", f.band_Q},
            {"residual", f.residual}};
}

// ---------------------------------------------------------------------------
// Subcommand pipelines
// ---------------------------------------------------------------------------

int run_evolve(const Invocation& inv) {
    const auto cfg = load_config(inv);
    const Workspace w = make_workspace(cfg);
    const fujita::EvolutionOutcome out = fujita::evolve_nonlinear(cfg.evolution, w.grid,
                                                                  w.schroedinger);

    fujita::CsvWriter csv({"t", "sup_u", "mu_mass"});
    const int prec = cfg.output.precision;
    for (const auto& s : out.history)
        csv.row({fujita::csv_number(s.t, prec), fujita::csv_number(s.sup, prec),
                 fujita::csv_number(s.mass, prec)});
    write_artifact(inv, "evolve.csv", csv.str());

    json j{{"classification", fujita::to_string(out.cls)},
           {"final_sup", out.final_sup},
           {"boundary_contaminated", out.boundary_contaminated},
           {"steps", out.history.empty() ? 0 : out.history.size() - 1}};
    if (out.t_blowup) j["t_blowup"] = *out.t_blowup;
    write_artifact(inv, "evolve.json", dump(j));
    return 0;
}

int run_hsolve(const Invocation& inv) {
    const auto cfg = load_config(inv);
    const Workspace w = make_workspace(cfg);
    const fujita::HProfile h = fujita::solve_h(cfg.manifold, cfg.potential, w.grid);

    const int prec = cfg.output.precision;
    fujita::CsvWriter csv({"r", "h", "fitted_envelope"});
    const std::size_t M = w.grid.cells();
    const double r_ref = w.grid.r[M];
    const double h_ref = h.values[M];
    for (std::size_t j = 0; j < h.values.size(); ++j) {
        const double r = std::max(w.grid.r[j], w.grid.r[1]);
        const double env = h_ref * std::pow(r / r_ref, h.delta_hat);
        csv.row({fujita::csv_number(w.grid.r[j], prec), fujita::csv_number(h.values[j], prec),
                 fujita::csv_number(env, prec)});
    }
    write_artifact(inv, "hsolve.csv", csv.str());

    const fujita::ConditionH cond = fujita::check_condition_H(h);
    json j{{"family", cfg.potential.family_name()},
           {"positive", h.positive},
           {"delta_hat", h.delta_hat},
           {"delta_band", h.delta_band},
           {"fit_residual", h.fit_residual},
           {"envelope_ratio", h.envelope_ratio()},
           {"condition_H", condition_h_json(cond)}};
    if (!h.positive && h.first_bad_r) j["first_bad_r"] = *h.first_bad_r;

    // Nonexistence verdict for the configured p, when the grid supports a fit.
    try {
        const auto weights = fujita::MeasureWeights::build(w.grid, h);
        const auto fit = fujita::volume_growth_fit(w.grid, weights, fujita::MeasureKind::Nu);
        const auto bundle = fujita::ExponentBundle::for_power(cfg.evolution.p);
        j["nu_growth"] = growth_fit_json(fit);
        j["critical_law"] = {{"P", bundle.P}, {"Q", bundle.Q}};
        j["verdict"] = fujita::to_string(fujita::nonexistence_verdict(bundle, fit));
    } catch (const std::invalid_argument& e) {
        j["verdict_note"] = e.what();
    }
    write_artifact(inv, "hsolve.json", dump(j));

    if (!h.positive) {
        std::cerr << "hsolve: no positive conjugating profile (first bad radius "
                  << h.first_bad_r.value_or(std::numeric_limits<double>::quiet_NaN()) << ")\n";
        return 1;
    }
    return 0;
}

int run_volume(const Invocation& inv) {
    const auto cfg = load_config(inv);
    const Workspace w = make_workspace(cfg);
    const fujita::HProfile h = fujita::solve_h(cfg.manifold, cfg.potential, w.grid);
    if (!h.positive) {
        std::cerr << "volume: transform profile not positive; measures undefined\n";
        return 1;
    }
    const auto weights = fujita::MeasureWeights::build(w.grid, h);

    const int prec = cfg.output.precision;
    fujita::CsvWriter csv({"r", "mu0_ball", "mu_ball", "nu_ball"});
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    for (std::size_t j = 0; j < w.grid.interface.size(); ++j) {
        a0 += weights.mu0[j];
        a1 += weights.mu[j];
        a2 += weights.nu[j];
        csv.row({fujita::csv_number(w.grid.interface[j], prec), fujita::csv_number(a0, prec),
                 fujita::csv_number(a1, prec), fujita::csv_number(a2, prec)});
    }
    write_artifact(inv, "volume.csv", csv.str());

    json j{{"family", cfg.potential.family_name()}, {"p", cfg.evolution.p}};
    const auto bundle = fujita::ExponentBundle::for_power(cfg.evolution.p);
    j["critical_law"] = {{"P", bundle.P}, {"Q", bundle.Q}};
    for (auto [kind, name] : {std::pair{fujita::MeasureKind::Mu0, "mu0"},
                              {fujita::MeasureKind::Mu, "mu"},
                              {fujita::MeasureKind::Nu, "nu"}}) {
        const auto fit = fujita::volume_growth_fit(w.grid, weights, kind);
        j[name] = growth_fit_json(fit);
        if (kind == fujita::MeasureKind::Nu)
            j["verdict"] = fujita::to_string(fujita::nonexistence_verdict(bundle, fit));
    }
    write_artifact(inv, "volume.json", dump(j));
    return 0;
}

int run_riesz(const Invocation& inv) {
    const auto cfg = load_config(inv);
    const int N = cfg.manifold.dim;
    const int prec = cfg.output.precision;
    if (cfg.manifold.kind != fujita::WarpKind::Euclidean)
        throw std::invalid_argument("riesz: potential-theory pipeline is defined on flat space");

    fujita::CsvWriter csv({"x", "I1V", "I2V", "iterated_ratio"});
    json j{{"family", cfg.potential.family_name()}};

    if (cfg.potential.family == fujita::PotentialSpec::Family::Zero) {
        for (double x : fujita::logspace(0.1, 1.0e3, 13))
            csv.row({fujita::csv_number(x, prec), "0", "0", "0"});
        j["note"] = "zero potential: all potentials vanish";
        write_artifact(inv, "riesz.csv", csv.str());
        write_artifact(inv, "riesz.json", dump(j));
        return 0;
    }

    std::optional<double> hint = potential_decay_hint(cfg.potential);
    auto absV = [&](double s) { return std::abs(cfg.potential.eval(s)); };
    if (!hint) {
        // fit the tail empirically over the last decade of a probe range
        std::vector<double> lx, ly;
        for (double s : fujita::logspace(1.0e3, 1.0e4, 12)) {
            const double v = absV(s);
            if (v > 0.0) {
                lx.push_back(std::log(s));
                ly.push_back(std::log(v));
            }
        }
        if (lx.size() < 3)
            throw std::invalid_argument("riesz: cannot infer a tail decay for this potential");
        hint = -fujita::fit_line(lx, ly).slope;
    }
    const auto Vf = fujita::RadialFunction::sample(absV, 1.0e-3, 1.0e6, 240, hint);

    // Intermediate function I1|V| for the per-x iterated ratio.
    const std::size_t samples = inv.slow ? 160 : 80;
    const std::vector<double> sx = fujita::logspace(Vf.r_min(), Vf.r_max(), samples);
    std::vector<double> g1(sx.size());
    for (std::size_t i = 0; i < sx.size(); ++i) g1[i] = fujita::riesz_apply(Vf, 1.0, N, sx[i]);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < sx.size(); ++i)
        if (sx[i] >= Vf.r_max() / 10.0 && g1[i] > 0.0) {
            lx.push_back(std::log(sx[i]));
            ly.push_back(std::log(g1[i]));
        }
    if (lx.size() < 3) throw std::runtime_error("riesz: cannot fit the intermediate tail");
    const double q1 = -fujita::fit_line(lx, ly).slope;
    fujita::RadialFunction inner;
    inner.radii = sx;
    inner.values = g1;
    inner.decay_hint = q1;

    const bool green_ok = *hint > 2.0;
    for (double x : fujita::logspace(0.1, 1.0e3, inv.slow ? 25 : 13)) {
        const double i1 = fujita::riesz_apply(Vf, 1.0, N, x);
        const double i2 =
            green_ok ? fujita::riesz_apply(Vf, 2.0, N, x) : std::numeric_limits<double>::infinity();
        const double num = fujita::detail::riesz_apply_fn(
            [&inner](double s) { const double v = inner.eval(s); return v * v; }, 1.0, N, x,
            Vf.r_min(), Vf.r_max(), 2.0 * q1);
        csv.row({fujita::csv_number(x, prec), fujita::csv_number(i1, prec),
                 fujita::csv_number(i2, prec),
                 fujita::csv_number(i1 > 0.0 ? num / i1
                                             : std::numeric_limits<double>::quiet_NaN(), prec)});
    }
    write_artifact(inv, "riesz.csv", csv.str());

    j["decay_hint"] = *hint;
    j["iterated_ratio_sup"] = fujita::hmv_condition_ratio(Vf, N, samples);
    const auto green = fujita::green_bounded_sup_I2(Vf, N);
    j["green_bounded"] = {{"finite", green.finite}, {"sup", green.sup}};
    if (cfg.potential.family == fujita::PotentialSpec::Family::InversePower &&
        cfg.potential.b > 2.0 && cfg.potential.omega > 0.0) {
        const auto rep = fujita::verify_I1_asymptotics(cfg.potential.omega, cfg.potential.b, N);
        j["I1_asymptotics"] = {{"slope_fit", rep.slope_fit},
                               {"slope_theory", rep.slope_theory},
                               {"log_factor", rep.log_factor},
                               {"fit_residual", rep.fit_residual}};
    }
    write_artifact(inv, "riesz.json", dump(j));
    return 0;
}

int run_kernel(const Invocation& inv) {
    const auto cfg = load_config(inv);
    const Workspace w = make_workspace(cfg);

    // Kernel of the weighted (transformed) generator when a potential is
    // present, of the plain Laplacian otherwise.
    fujita::TridiagonalOperator L = w.laplacian;
    std::vector<double> mu = w.grid.volume;
    if (w.has_potential) {
        const fujita::HProfile h = fujita::solve_h(cfg.manifold, cfg.potential, w.grid);
        if (!h.positive) {
            std::cerr << "kernel: transform profile not positive\n";
            return 1;
        }
        L = fujita::laplacian_operator(w.grid, cfg.manifold, h.values);
        mu = fujita::MeasureWeights::build(w.grid, h).mu;
    }

    std::vector<double> times = {0.25, 1.0, 4.0, 16.0};
    if (inv.slow) times.insert(times.end(), {64.0, 256.0});
    const double horizon = w.grid.r_max() * w.grid.r_max();
    std::erase_if(times, [&](double t) { return t > horizon; });

    std::vector<fujita::KernelColumn> cols;
    const int prec = cfg.output.precision;
    fujita::CsvWriter csv({"r", "t", "kernel"});
    for (double t : times) {
        cols.push_back(fujita::kernel_column(0, t, L, cfg.duhamel.kernel_dt_cap));
        for (std::size_t jx = 0; jx < cols.back().values.size(); ++jx)
            csv.row({fujita::csv_number(w.grid.r[jx], prec), fujita::csv_number(t, prec),
                     fujita::csv_number(cols.back().values[jx], prec)});
    }
    write_artifact(inv, "kernel.csv", csv.str());

    const fujita::DueReport due = fujita::due_check(cols, w.grid, mu);
    json j{{"times", due.times},
           {"ratios", due.ratios},
           {"resolved", due.resolved},
           {"max_ratio", due.max_ratio}};
    write_artifact(inv, "kernel.json", dump(j));
    return 0;
}

int run_duhamel(const Invocation& inv) {
    const auto cfg = load_config(inv);
    const Workspace w = make_workspace(cfg);

    fujita::DuhamelConfig dc = cfg.duhamel;
    dc.full_grid_envelope = inv.slow;

    fujita::TridiagonalOperator L = w.laplacian;
    std::optional<fujita::HProfile> h;
    if (w.has_potential) {
        h = fujita::solve_h(cfg.manifold, cfg.potential, w.grid);
        if (!h->positive) {
            std::cerr << "duhamel: transform profile not positive\n";
            return 1;
        }
        L = fujita::laplacian_operator(w.grid, cfg.manifold, h->values);
    }

    json j;
    fujita::PicardResult res;
    try {
        res = fujita::picard_iterate(dc, w.grid, L, h ? &*h : nullptr);
    } catch (const fujita::NonContractionError& e) {
        j["error"] = e.what();
        j["failed_inequality"] = "C p lambda^(p-1) < 1";
        write_artifact(inv, "duhamel.json", dump(j));
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const fujita::EnvelopeViolationError& e) {
        j["error"] = e.what();
        j["failed_inequality"] = "v(x,t) <= lambda P_{t+delta}(x,x0)";
        write_artifact(inv, "duhamel.json", dump(j));
        std::cerr << e.what() << "\n";
        return 1;
    }

    j["lambda"] = res.lambda;
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;
    j["diffs"] = res.diffs;
    j["contraction_factors"] = res.factors;
    j["asymptotic_rate"] = res.rate;
    j["envelope"] = {{"pass", res.envelope_report.pass},
                     {"worst_margin", res.envelope_report.worst_margin}};
    j["lattice_steps"] = res.times.size() - 1;
    write_artifact(inv, "duhamel.json", dump(j));

    // Near-critical time-integral traces for the configured p: the sharp law
    // (P, Q) keeps growing, the relaxed law (P, Q + 1/2) stalls.
    const auto bundle = fujita::ExponentBundle::for_power(dc.p);
    const int prec = cfg.output.precision;
    fujita::CsvWriter csv({"law", "horizon", "trace"});
    const auto sharp = fujita::kernel_time_integral(bundle.P, bundle.Q, dc.p, dc.delta);
    const auto relaxed = fujita::kernel_time_integral(bundle.P, bundle.Q + 0.5, dc.p, dc.delta);
    for (std::size_t k = 0; k < sharp.horizon.size(); ++k)
        csv.row({"sharp", fujita::csv_number(sharp.horizon[k], prec),
                 fujita::csv_number(sharp.trace[k], prec)});
    for (std::size_t k = 0; k < relaxed.horizon.size(); ++k)
        csv.row({"relaxed", fujita::csv_number(relaxed.horizon[k], prec),
                 fujita::csv_number(relaxed.trace[k], prec)});
    write_artifact(inv, "duhamel.csv", csv.str());

    if (!res.converged) {
        std::cerr << "duhamel: Picard iteration did not reach tolerance within "
                  << dc.max_iter << " sweeps\n";
        return 1;
    }
    return 0;
}

int run_sweep(const Invocation& inv) {
    const auto cfg = load_config(inv);
    fujita::SweepConfig sc = cfg.sweep_config();

    json j;
    fujita::SweepReport rep;
    try {
        rep = fujita::fujita_sweep(sc);
    } catch (const std::runtime_error& e) {
        j["error"] = e.what();
        write_artifact(inv, "sweep.json", dump(j));
        std::cerr << e.what() << "\n";
        return 1;
    }
    const fujita::RenderedReport rendered = fujita::report_render(rep);
    write_artifact(inv, "sweep.csv", rendered.csv);
    write_artifact(inv, "sweep.json", dump(rendered.json));

    fujita::CsvWriter plot({"p", "class_code"});
    for (const auto& [p, code] : rendered.plot)
        plot.row({fujita::csv_number(p, cfg.output.precision), std::to_string(code)});
    write_artifact(inv, "sweep_plot.csv", plot.str());
    return 0;
}

int run_testfn(const Invocation& inv) {
    const auto cfg = load_config(inv);
    const auto& ts = cfg.testfn;
    const auto bundle = fujita::ExponentBundle::for_power(ts.p);
    const auto law = fujita::power_log_law(bundle.P, bundle.Q + ts.q_offset);

    const int prec = cfg.output.precision;
    fujita::CsvWriter csv({"i", "J", "L_time", "L_final", "J_neg"});
    for (std::size_t i = ts.i_min; i <= ts.i_max; ++i) {
        const auto rep = fujita::functional_report(i, ts.p, law, ts.delta1, ts.delta2);
        csv.row({std::to_string(i), fujita::csv_number(rep.j, prec),
                 fujita::csv_number(rep.l_time, prec), fujita::csv_number(rep.l_final, prec),
                 fujita::csv_number(rep.j_negative, prec)});
    }
    write_artifact(inv, "testfn.csv", csv.str());

    json j{{"p", ts.p},
           {"law", {{"P", bundle.P}, {"Q", bundle.Q + ts.q_offset}}},
           {"delta1", ts.delta1},
           {"delta2", ts.delta2}};
    auto fit_of = [&](auto&& f) {
        const fujita::LadderFit lf = fujita::ladder_fit(f, ts.i_min, ts.i_max);
        return json{{"slope", lf.slope}, {"stderr", lf.slope_stderr}};
    };
    j["slopes"] = {
        {"J", fit_of([&](std::size_t i) { return fujita::j_sum(i, ts.p, law, ts.delta2); })},
        {"L_time", fit_of([&](std::size_t i) {
             return fujita::l_sum(i, ts.p, law, ts.delta2, fujita::LVariant::Time);
         })},
        {"L_final", fit_of([&](std::size_t i) {
             return fujita::l_sum(i, ts.p, law, 0.0, fujita::LVariant::Final);
         })}};
    write_artifact(inv, "testfn.json", dump(j));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for blow-up vs. global existence of "
                 "u_t = Lu - Vu + u^p on rotationally symmetric spaces"};
    app.require_subcommand(1);

    Invocation inv;
    int workers_flag = -1;
    app.add_option("--config", inv.config_path, "Experiment configuration file (INI)")
        ->type_name("PATH");
    app.add_option("--out", inv.out_dir, "Artifact output directory")->type_name("DIR");
    app.add_option("--workers", workers_flag, "Worker thread count (0 = auto)")->type_name("N");
    app.add_flag("--slow", inv.slow, "Enable full-grid checks");

    struct Entry {
        const char* name;
        const char* blurb;
        int (*fn)(const Invocation&);
    };
    const std::vector<Entry> entries = {
        {"hsolve", "Solve the conjugation profile h and certify its envelope", run_hsolve},
        {"riesz", "Riesz potentials of the configured potential and the iterated-ratio test",
         run_riesz},
        {"evolve", "Run one nonlinear evolution and classify it", run_evolve},
        {"sweep", "Phase-diagram sweep across the p-grid and data ladder", run_sweep},
        {"duhamel", "Picard fixed point with envelope certification", run_duhamel},
        {"testfn", "Dyadic cutoff ladder sums and slopes", run_testfn},
        {"kernel", "Heat-kernel columns and the diagonal upper estimate ladder", run_kernel},
        {"volume", "Measure growth fits and the nonexistence verdict", run_volume},
    };
    for (const auto& e : entries)
        app.add_subcommand(e.name, e.blurb)->fallthrough(); // flags live on the parent app

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage problems exit 2
    }

    if (workers_flag >= 0) {
        inv.workers = unsigned(workers_flag);
        inv.workers_given = true;
    }

    try {
        for (const auto& e : entries)
            if (app.get_subcommand(e.name)->parsed()) return e.fn(inv);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const fujita::ConfigParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "scientific failure: " << e.what() << "\n";
        return 1;
    }
}
