#pragma once
// Experiment configuration: a flat INI document with sections [manifold],
// [potential], [evolution], [sweep], [duhamel], [testfn], [output] and a
// mandatory top-level version key.  Parsing validates everything and reports
// ALL problems (each tagged with section and key), not just the first.
// Unknown sections and keys are rejected.  render_config produces a canonical
// normalization: render(parse(x)) is a fixed point of parse-then-render.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fujita/duhamel.hpp"
#include "fujita/evolution.hpp"
#include "fujita/experiments.hpp"
#include "fujita/geometry.hpp"
#include "fujita/io.hpp"
#include "fujita/potentials.hpp"

namespace fujita {

// ============================================================================
// Error reporting
// ============================================================================

struct ConfigError {
    std::string section; ///< empty for top-level keys
    std::string key;     ///< empty for section-level problems
    std::string message;

    std::string format() const {
        std::string where = section.empty() ? std::string("top level") : "[" + section + "]";
        if (!key.empty()) where += " " + key;
        return where + ": " + message;
    }
};

/// Carries every problem found in one parse pass.
class ConfigParseError : public std::runtime_error {
public:
    std::vector<ConfigError> errors;

    explicit ConfigParseError(std::vector<ConfigError> errs)
        : std::runtime_error(join(errs)), errors(std::move(errs)) {}

private:
    static std::string join(const std::vector<ConfigError>& errs) {
        std::string all = "configuration invalid (" + std::to_string(errs.size()) + " problem" +
                          (errs.size() == 1 ? "" : "s") + "):";
        for (const auto& e : errs) all += "\n  " + e.format();
        return all;
    }
};

// ============================================================================
// Settings blocks
// ============================================================================

struct GridSettings {
    double r_max = 200.0;
    std::size_t cells = 2000;
    double stretch = 1.02;
};

struct SweepSettings {
    double p_min = 1.3;
    double p_max = 2.2;
    double p_step = 0.1;
    std::vector<double> amplitudes = {0.01};
    double sigma = 1.0;
    unsigned workers = 0;
};

struct TestfnSettings {
    double p = 2.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    std::size_t i_min = 4;
    std::size_t i_max = 64;
    double q_offset = 0.0; ///< evaluate the law at (P, Q + q_offset)
};

struct OutputSettings {
    int precision = 17; ///< significant digits for CSV numbers
};

struct ExperimentConfig {
    int version = 1;
    ModelManifold manifold = ModelManifold::euclidean(3);
    GridSettings grid;
    PotentialSpec potential = PotentialSpec::zero();
    EvolutionConfig evolution;
    SweepSettings sweep;
    DuhamelConfig duhamel;
    TestfnSettings testfn;
    OutputSettings output;

    /// Assemble the sweep module's configuration from the shared sections.
    SweepConfig sweep_config() const {
        SweepConfig sc;
        sc.manifold = manifold;
        sc.potential = potential;
        sc.p_min = sweep.p_min;
        sc.p_max = sweep.p_max;
        sc.p_step = sweep.p_step;
        sc.amplitudes = sweep.amplitudes;
        sc.sigma = sweep.sigma;
        sc.r_max = grid.r_max;
        sc.cells = grid.cells;
        sc.stretch = grid.stretch;
        sc.evolution = evolution;
        sc.workers = sweep.workers;
        return sc;
    }
};

// ============================================================================
// Parsing
// ============================================================================

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline bool parse_double_strict(const std::string& text, double& out) {
    if (text.empty()) return false;
    std::size_t used = 0;
    try {
        out = std::stod(text, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == text.size() && std::isfinite(out);
}

inline bool parse_long_strict(const std::string& text, long& out) {
    if (text.empty()) return false;
    std::size_t used = 0;
    try {
        out = std::stol(text, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == text.size();
}

/// One raw key with provenance for error messages.
struct RawEntry {
    std::string value;
    bool seen = false;
};

class SectionReader {
public:
    SectionReader(std::string name, std::map<std::string, RawEntry>* entries,
                  std::vector<ConfigError>* errors)
        : name_(std::move(name)), entries_(entries), errors_(errors) {}

    /// Fetch a raw value; remembers which keys were consumed so the leftover
    /// ones can be reported as unknown.
    const std::string* raw(const std::string& key) {
        if (entries_ == nullptr) return nullptr;
        auto it = entries_->find(key);
        if (it == entries_->end()) return nullptr;
        it->second.seen = true;
        return &it->second.value;
    }

    void error(const std::string& key, const std::string& message) {
        errors_->push_back({name_, key, message});
    }

    void number(const std::string& key, double& slot) {
        if (const std::string* v = raw(key)) {
            double x;
            if (parse_double_strict(*v, x)) slot = x;
            else error(key, "expected a decimal number, got '" + *v + "'");
        }
    }

    void count(const std::string& key, std::size_t& slot, long lo, long hi) {
        if (const std::string* v = raw(key)) {
            long x;
            if (parse_long_strict(*v, x) && x >= lo && x <= hi) slot = std::size_t(x);
            else error(key, "expected an integer in [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "], got '" + *v + "'");
        }
    }

    void word(const std::string& key, std::string& slot) {
        if (const std::string* v = raw(key)) slot = *v;
    }

    void number_list(const std::string& key, std::vector<double>& slot) {
        if (const std::string* v = raw(key)) {
            std::vector<double> xs;
            std::stringstream ss(*v);
            std::string item;
            bool ok = true;
            while (std::getline(ss, item, ',')) {
                double x;
                if (parse_double_strict(trim(item), x)) xs.push_back(x);
                else ok = false;
            }
            if (ok && !xs.empty()) slot = std::move(xs);
            else error(key, "expected a comma-separated list of decimal numbers, got '" + *v + "'");
        }
    }

    /// Constraint check helper: record a violation against this section.
    void require(bool ok, const std::string& key, const std::string& message) {
        if (!ok) error(key, message);
    }

private:
    std::string name_;
    std::map<std::string, RawEntry>* entries_;
    std::vector<ConfigError>* errors_;
};

} // namespace detail

/// Parse and validate a config document.  Throws ConfigParseError carrying
/// every problem found.  `origin` is used in messages only.
inline ExperimentConfig parse_config_text(std::string_view text,
                                          const std::string& origin = "config") {
    using detail::RawEntry;
    using detail::trim;

    std::vector<ConfigError> errors;
    std::map<std::string, std::map<std::string, RawEntry>> sections;
    std::map<std::string, RawEntry> top;

    static const std::vector<std::string> known_sections = {
        "manifold", "potential", "evolution", "sweep", "duhamel", "testfn", "output"};

    // ---- raw scan ----------------------------------------------------------
    std::string current; // empty = top level
    bool current_known = true;
    std::size_t lineno = 0;
    std::stringstream stream{std::string(text)};
    std::string line;
    while (std::getline(stream, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                errors.push_back({current, "", "line " + std::to_string(lineno) +
                                                   ": malformed section header '" + t + "'"});
                continue;
            }
            current = trim(t.substr(1, t.size() - 2));
            current_known = std::find(known_sections.begin(), known_sections.end(), current) !=
                            known_sections.end();
            if (!current_known)
                errors.push_back({current, "", "unknown section"});
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back({current, "", "line " + std::to_string(lineno) +
                                               ": expected 'key = value', got '" + t + "'"});
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            errors.push_back({current, "", "line " + std::to_string(lineno) + ": empty key"});
            continue;
        }
        if (!current_known) continue; // section already reported
        auto& table = current.empty() ? top : sections[current];
        if (table.count(key)) {
            errors.push_back({current, key, "duplicate key"});
            continue;
        }
        table[key] = RawEntry{value, false};
    }

    ExperimentConfig cfg;

    // ---- top level ---------------------------------------------------------
    {
        detail::SectionReader r("", &top, &errors);
        if (const std::string* v = r.raw("version")) {
            long ver;
            if (!detail::parse_long_strict(*v, ver) || ver != 1)
                r.error("version", "unsupported version '" + *v + "' (expected 1)");
            else
                cfg.version = int(ver);
        } else {
            errors.push_back({"", "version", "missing mandatory key"});
        }
    }

    auto reader_for = [&](const std::string& name) {
        auto it = sections.find(name);
        return detail::SectionReader(name, it == sections.end() ? nullptr : &it->second, &errors);
    };

    // ---- [manifold] --------------------------------------------------------
    {
        auto r = reader_for("manifold");
        std::string kind = "euclidean";
        long dim = 3;
        double alpha = 0.0;
        r.word("kind", kind);
        if (const std::string* v = r.raw("dim")) {
            if (!detail::parse_long_strict(*v, dim) || dim < 2)
                r.error("dim", "dimension must be an integer >= 2, got '" + *v + "'");
        }
        bool have_alpha = false;
        if (const std::string* v = r.raw("alpha")) {
            have_alpha = true;
            if (!detail::parse_double_strict(*v, alpha))
                r.error("alpha", "expected a decimal number, got '" + *v + "'");
        }
        if (kind == "euclidean") {
            r.require(!have_alpha, "alpha", "alpha only applies to kind = log_polynomial");
            try {
                cfg.manifold = ModelManifold::euclidean(int(dim));
            } catch (const std::exception& e) {
                r.error("dim", e.what());
            }
        } else if (kind == "log_polynomial") {
            r.require(have_alpha, "alpha", "kind = log_polynomial needs alpha");
            if (have_alpha) {
                try {
                    cfg.manifold = ModelManifold::log_polynomial(int(dim), alpha);
                } catch (const std::exception& e) {
                    r.error("alpha", e.what());
                }
            }
        } else {
            r.error("kind", "unknown manifold kind '" + kind +
                                "' (expected euclidean or log_polynomial)");
        }
        r.number("r_max", cfg.grid.r_max);
        r.require(cfg.grid.r_max > 0.0, "r_max", "must be positive");
        r.count("cells", cfg.grid.cells, 16, 2'000'000);
        r.number("stretch", cfg.grid.stretch);
        r.require(cfg.grid.stretch > 1.0 && cfg.grid.stretch <= 1.02, "stretch",
                  "must lie in (1, 1.02]");
    }

    // ---- [potential] -------------------------------------------------------
    {
        auto r = reader_for("potential");
        std::string family = "zero";
        double omega = 0.0, b = 0.0, theta = 0.0;
        bool have_omega = false, have_b = false, have_theta = false;
        r.word("family", family);
        if (const std::string* v = r.raw("omega")) {
            have_omega = true;
            if (!detail::parse_double_strict(*v, omega))
                r.error("omega", "expected a decimal number, got '" + *v + "'");
        }
        if (const std::string* v = r.raw("b")) {
            have_b = true;
            if (!detail::parse_double_strict(*v, b))
                r.error("b", "expected a decimal number, got '" + *v + "'");
        }
        if (const std::string* v = r.raw("theta")) {
            have_theta = true;
            if (!detail::parse_double_strict(*v, theta))
                r.error("theta", "expected a decimal number, got '" + *v + "'");
        }
        try {
            if (family == "zero") {
                r.require(!have_omega && !have_b && !have_theta, "family",
                          "zero potential takes no parameters");
                cfg.potential = PotentialSpec::zero();
            } else if (family == "inverse_power") {
                r.require(have_omega && have_b, "family", "inverse_power needs omega and b");
                r.require(!have_theta, "theta", "theta only applies to regularized_inverse_square");
                if (have_omega && have_b) cfg.potential = PotentialSpec::inverse_power(omega, b);
            } else if (family == "regularized_inverse_square") {
                r.require(have_omega && have_theta, "family",
                          "regularized_inverse_square needs omega and theta");
                r.require(!have_b, "b", "b only applies to inverse_power");
                if (have_omega && have_theta)
                    cfg.potential = PotentialSpec::regularized_inverse_square(omega, theta);
            } else if (family == "hardy_example") {
                r.require(have_omega, "family", "hardy_example needs omega");
                r.require(!have_b && !have_theta, "family", "hardy_example takes only omega");
                if (have_omega)
                    cfg.potential = PotentialSpec::hardy_example(cfg.manifold.dim, omega);
            } else {
                r.error("family", "unknown potential family '" + family + "'");
            }
        } catch (const std::exception& e) {
            r.error("family", e.what());
        }
    }

    // ---- [evolution] -------------------------------------------------------
    {
        auto r = reader_for("evolution");
        r.number("p", cfg.evolution.p);
        r.require(cfg.evolution.p > 1.0, "p", "p must exceed 1");
        r.number("amplitude", cfg.evolution.amplitude);
        r.require(cfg.evolution.amplitude >= 0.0, "amplitude", "must be nonnegative");
        r.number("sigma", cfg.evolution.sigma);
        r.require(cfg.evolution.sigma > 0.0, "sigma", "must be positive");
        r.number("t_max", cfg.evolution.T_max);
        r.require(cfg.evolution.T_max > 0.0, "t_max", "must be positive");
        r.number("u_max", cfg.evolution.U_max);
        r.require(cfg.evolution.U_max > 0.0, "u_max", "must be positive");
        r.number("dt_min", cfg.evolution.dt_min);
        r.require(cfg.evolution.dt_min >= 0.0, "dt_min", "must be nonnegative");
        r.number("dt_growth", cfg.evolution.dt_growth);
        r.require(cfg.evolution.dt_growth >= 0.0, "dt_growth", "must be nonnegative");
        r.number("decay_window", cfg.evolution.decay_window);
        r.require(cfg.evolution.decay_window > 0.0 && cfg.evolution.decay_window <= 1.0,
                  "decay_window", "must lie in (0, 1]");
        r.number("boundary_eps", cfg.evolution.boundary_eps);
        r.require(cfg.evolution.boundary_eps > 0.0, "boundary_eps", "must be positive");
        std::string scheme = "backward_euler";
        r.word("scheme", scheme);
        if (scheme == "backward_euler") cfg.evolution.half_scheme = Scheme::BackwardEuler;
        else if (scheme == "crank_nicolson") cfg.evolution.half_scheme = Scheme::CrankNicolson;
        else r.error("scheme", "unknown scheme '" + scheme +
                                   "' (expected backward_euler or crank_nicolson)");
    }

    // ---- [sweep] -----------------------------------------------------------
    {
        auto r = reader_for("sweep");
        r.number("p_min", cfg.sweep.p_min);
        r.number("p_max", cfg.sweep.p_max);
        r.number("p_step", cfg.sweep.p_step);
        r.require(cfg.sweep.p_min > 1.0 && cfg.sweep.p_max <= 10.0 &&
                      cfg.sweep.p_max >= cfg.sweep.p_min,
                  "p_min", "p-grid must lie within (1, 10]");
        r.require(cfg.sweep.p_step > 0.0, "p_step", "must be positive");
        r.number_list("amplitudes", cfg.sweep.amplitudes);
        for (double a : cfg.sweep.amplitudes)
            r.require(a > 0.0, "amplitudes", "every amplitude must be positive");
        r.number("sigma", cfg.sweep.sigma);
        r.require(cfg.sweep.sigma > 0.0, "sigma", "must be positive");
        std::size_t workers = cfg.sweep.workers;
        r.count("workers", workers, 0, 4096);
        cfg.sweep.workers = unsigned(workers);
    }

    // ---- [duhamel] ---------------------------------------------------------
    {
        auto r = reader_for("duhamel");
        r.number("p", cfg.duhamel.p);
        r.require(cfg.duhamel.p > 1.0, "p", "p must exceed 1");
        r.number("lambda", cfg.duhamel.lambda);
        r.require(cfg.duhamel.lambda >= 0.0, "lambda", "must be nonnegative (0 = automatic)");
        r.number("delta", cfg.duhamel.delta);
        r.require(cfg.duhamel.delta >= std::exp(2.0), "delta", "must be at least e^2");
        r.count("source_cell", cfg.duhamel.source_cell, 0, 2'000'000);
        r.number("data_scale", cfg.duhamel.data_scale);
        r.require(cfg.duhamel.data_scale >= 0.0 && cfg.duhamel.data_scale <= 1.0, "data_scale",
                  "must lie in [0, 1]");
        r.number("tol", cfg.duhamel.tol);
        r.require(cfg.duhamel.tol > 0.0, "tol", "must be positive");
        r.count("max_iter", cfg.duhamel.max_iter, 1, 10'000);
        r.number("t", cfg.duhamel.T);
        r.require(cfg.duhamel.T > 0.0, "t", "must be positive");
        r.number("dt0", cfg.duhamel.dt0);
        r.require(cfg.duhamel.dt0 > 0.0, "dt0", "must be positive");
        r.number("dt_growth", cfg.duhamel.dt_growth);
        r.require(cfg.duhamel.dt_growth >= 0.0, "dt_growth", "must be nonnegative");
    }

    // ---- [testfn] ----------------------------------------------------------
    {
        auto r = reader_for("testfn");
        r.number("p", cfg.testfn.p);
        r.require(cfg.testfn.p > 1.0, "p", "p must exceed 1");
        r.number("delta1", cfg.testfn.delta1);
        r.require(cfg.testfn.delta1 >= 0.0, "delta1", "must be nonnegative");
        r.number("delta2", cfg.testfn.delta2);
        r.require(cfg.testfn.delta2 >= 0.0, "delta2", "must be nonnegative");
        r.count("i_min", cfg.testfn.i_min, 2, 128);
        r.count("i_max", cfg.testfn.i_max, 3, 128);
        r.require(cfg.testfn.i_min < cfg.testfn.i_max, "i_max", "must exceed i_min");
        r.number("q_offset", cfg.testfn.q_offset);
        r.require(cfg.testfn.q_offset >= 0.0, "q_offset", "must be nonnegative");
    }

    // ---- [output] ----------------------------------------------------------
    {
        auto r = reader_for("output");
        std::size_t precision = std::size_t(cfg.output.precision);
        r.count("precision", precision, 6, 17);
        cfg.output.precision = int(precision);
    }

    // ---- leftover (unknown) keys ------------------------------------------
    for (const auto& [key, entry] : top)
        if (!entry.seen) errors.push_back({"", key, "unknown key"});
    for (const auto& [sec, table] : sections)
        for (const auto& [key, entry] : table)
            if (!entry.seen) errors.push_back({sec, key, "unknown key in section [" + sec + "]"});

    if (!errors.empty()) throw ConfigParseError(std::move(errors));
    (void)origin;
    return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
    return parse_config_text(read_file(path), path.string());
}

// ============================================================================
// Rendering (canonical normalization)
// ============================================================================

inline std::string render_config(const ExperimentConfig& cfg) {
    std::string out;
    auto num = [](double x) { return csv_number(x, 17); };
    out += "version = 1\n\n";

    out += "[manifold]\n";
    out += std::string("kind = ") +
           (cfg.manifold.kind == WarpKind::Euclidean ? "euclidean" : "log_polynomial") + "\n";
    out += "dim = " + std::to_string(cfg.manifold.dim) + "\n";
    if (cfg.manifold.kind == WarpKind::LogPolynomial)
        out += "alpha = " + num(cfg.manifold.alpha) + "\n";
    out += "r_max = " + num(cfg.grid.r_max) + "\n";
    out += "cells = " + std::to_string(cfg.grid.cells) + "\n";
    out += "stretch = " + num(cfg.grid.stretch) + "\n\n";

    out += "[potential]\n";
    out += "family = " + cfg.potential.family_name() + "\n";
    using Family = PotentialSpec::Family;
    switch (cfg.potential.family) {
        case Family::Zero:
        case Family::Tabulated: break;
        case Family::InversePower:
            out += "omega = " + num(cfg.potential.omega) + "\n";
            out += "b = " + num(cfg.potential.b) + "\n";
            break;
        case Family::RegularizedInverseSquare:
            out += "omega = " + num(cfg.potential.omega) + "\n";
            out += "theta = " + num(cfg.potential.theta) + "\n";
            break;
        case Family::HardyExample:
            out += "omega = " + num(cfg.potential.omega) + "\n";
            break;
    }
    out += "\n[evolution]\n";
    out += "p = " + num(cfg.evolution.p) + "\n";
    out += "amplitude = " + num(cfg.evolution.amplitude) + "\n";
    out += "sigma = " + num(cfg.evolution.sigma) + "\n";
    out += "t_max = " + num(cfg.evolution.T_max) + "\n";
    out += "u_max = " + num(cfg.evolution.U_max) + "\n";
    out += "dt_min = " + num(cfg.evolution.dt_min) + "\n";
    out += "dt_growth = " + num(cfg.evolution.dt_growth) + "\n";
    out += "decay_window = " + num(cfg.evolution.decay_window) + "\n";
    out += "boundary_eps = " + num(cfg.evolution.boundary_eps) + "\n";
    out += std::string("scheme = ") + (cfg.evolution.half_scheme == Scheme::BackwardEuler
                                           ? "backward_euler"
                                           : "crank_nicolson") + "\n";

    out += "\n[sweep]\n";
    out += "p_min = " + num(cfg.sweep.p_min) + "\n";
    out += "p_max = " + num(cfg.sweep.p_max) + "\n";
    out += "p_step = " + num(cfg.sweep.p_step) + "\n";
    out += "amplitudes = ";
    for (std::size_t k = 0; k < cfg.sweep.amplitudes.size(); ++k)
        out += (k ? "," : "") + num(cfg.sweep.amplitudes[k]);
    out += "\n";
    out += "sigma = " + num(cfg.sweep.sigma) + "\n";
    out += "workers = " + std::to_string(cfg.sweep.workers) + "\n";

    out += "\n[duhamel]\n";
    out += "p = " + num(cfg.duhamel.p) + "\n";
    out += "lambda = " + num(cfg.duhamel.lambda) + "\n";
    out += "delta = " + num(cfg.duhamel.delta) + "\n";
    out += "source_cell = " + std::to_string(cfg.duhamel.source_cell) + "\n";
    out += "data_scale = " + num(cfg.duhamel.data_scale) + "\n";
    out += "tol = " + num(cfg.duhamel.tol) + "\n";
    out += "max_iter = " + std::to_string(cfg.duhamel.max_iter) + "\n";
    out += "t = " + num(cfg.duhamel.T) + "\n";
    out += "dt0 = " + num(cfg.duhamel.dt0) + "\n";
    out += "dt_growth = " + num(cfg.duhamel.dt_growth) + "\n";

    out += "\n[testfn]\n";
    out += "p = " + num(cfg.testfn.p) + "\n";
    out += "delta1 = " + num(cfg.testfn.delta1) + "\n";
    out += "delta2 = " + num(cfg.testfn.delta2) + "\n";
    out += "i_min = " + std::to_string(cfg.testfn.i_min) + "\n";
    out += "i_max = " + std::to_string(cfg.testfn.i_max) + "\n";
    out += "q_offset = " + num(cfg.testfn.q_offset) + "\n";

    out += "\n[output]\n";
    out += "precision = " + std::to_string(cfg.output.precision) + "\n";
    return out;
}

} // namespace fujita
