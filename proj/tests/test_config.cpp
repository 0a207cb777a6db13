#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>

#include "fujita/config.hpp"
#include "fujita/io.hpp"

using Catch::Approx;
using fujita::ConfigParseError;
using fujita::parse_config_text;

namespace {

bool has_error(const ConfigParseError& e, const std::string& section, const std::string& key,
               const std::string& fragment) {
    for (const auto& err : e.errors)
        if (err.section == section && err.key == key &&
            err.message.find(fragment) != std::string::npos)
            return true;
    return false;
}

}  // namespace

TEST_CASE("a bare version line yields the documented defaults") {
    const auto cfg = parse_config_text("version = 1\n");
    CHECK(cfg.version == 1);
    CHECK(cfg.manifold.kind == fujita::WarpKind::Euclidean);
    CHECK(cfg.manifold.dim == 3);
    CHECK(cfg.grid.r_max == 200.0);
    CHECK(cfg.grid.cells == 2000);
    CHECK(cfg.grid.stretch == 1.02);
    CHECK(cfg.potential.family == fujita::PotentialSpec::Family::Zero);
    CHECK(cfg.evolution.p == 2.0);
    CHECK(cfg.sweep.p_min == 1.3);
    CHECK(cfg.duhamel.delta == Approx(std::exp(4.0)));
    CHECK(cfg.testfn.i_min == 4);
    CHECK(cfg.output.precision == 17);
}

TEST_CASE("the version key is mandatory and pinned to 1") {
    try {
        parse_config_text("");
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        REQUIRE(e.errors.size() == 1);
        CHECK(has_error(e, "", "version", "missing mandatory key"));
        CHECK(std::string(e.what()).find("configuration invalid (1 problem):") == 0);
    }
    try {
        parse_config_text("version = 2\n");
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        CHECK(has_error(e, "", "version", "unsupported version"));
    }
}

TEST_CASE("every problem in a document is reported in one pass") {
    const std::string text =
        "version = 1\n"
        "[manifold]\n"
        "kind = euclidean\n"
        "alpha = 2.0\n"
        "r_max = -5\n"
        "[evolution]\n"
        "p = 1.0\n"
        "[bogus]\n"
        "x = 1\n"
        "[testfn]\n"
        "i_min = 50\n"
        "i_max = 20\n";
    try {
        parse_config_text(text);
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        CHECK(e.errors.size() == 5);
        CHECK(has_error(e, "manifold", "alpha", "alpha only applies"));
        CHECK(has_error(e, "manifold", "r_max", "must be positive"));
        CHECK(has_error(e, "evolution", "p", "p must exceed 1"));
        CHECK(has_error(e, "bogus", "", "unknown section"));
        CHECK(has_error(e, "testfn", "i_max", "must exceed i_min"));
        CHECK(std::string(e.what()).find("configuration invalid (5 problems):") == 0);
        CHECK(std::string(e.what()).find("[evolution] p: p must exceed 1") != std::string::npos);
    }
}

TEST_CASE("p gates carry the same message in every section that has one") {
    const std::string text =
        "version = 1\n"
        "[evolution]\np = 0.5\n"
        "[duhamel]\np = 1\n"
        "[testfn]\np = -3\n";
    try {
        parse_config_text(text);
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        REQUIRE(e.errors.size() == 3);
        CHECK(has_error(e, "evolution", "p", "p must exceed 1"));
        CHECK(has_error(e, "duhamel", "p", "p must exceed 1"));
        CHECK(has_error(e, "testfn", "p", "p must exceed 1"));
    }
}

TEST_CASE("duplicate, unknown and malformed keys are each diagnosed") {
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\nversion = 1\n"), ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("duplicate key")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\nbar = 2\n"), ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown key")));
    CHECK_THROWS_MATCHES(
        parse_config_text("version = 1\n[manifold]\nfoo = 3\n"), ConfigParseError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("unknown key in section [manifold]")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\nnonsense\n"), ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("expected 'key = value'")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[broken\n"), ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("malformed section header")));
}

TEST_CASE("potential families enforce their parameter signatures") {
    CHECK_NOTHROW(parse_config_text(
        "version = 1\n[potential]\nfamily = inverse_power\nomega = 1\nb = 4\n"));
    CHECK_NOTHROW(parse_config_text(
        "version = 1\n[potential]\nfamily = regularized_inverse_square\nomega = 1\ntheta = 1\n"));
    CHECK_NOTHROW(parse_config_text(
        "version = 1\n[potential]\nfamily = hardy_example\nomega = -0.25\n"));

    CHECK_THROWS_MATCHES(
        parse_config_text("version = 1\n[potential]\nfamily = inverse_power\nomega = 1\n"),
        ConfigParseError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("inverse_power needs omega and b")));
    CHECK_THROWS_MATCHES(
        parse_config_text("version = 1\n[potential]\nfamily = zero\nomega = 1\n"),
        ConfigParseError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("zero potential takes no parameters")));
    CHECK_THROWS_MATCHES(
        parse_config_text("version = 1\n[potential]\nfamily = mystery\n"), ConfigParseError,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("unknown potential family")));
}

TEST_CASE("manifold section parses both kinds and rejects mixtures") {
    const auto lp = parse_config_text(
        "version = 1\n[manifold]\nkind = log_polynomial\ndim = 4\nalpha = 3.5\n");
    CHECK(lp.manifold.kind == fujita::WarpKind::LogPolynomial);
    CHECK(lp.manifold.dim == 4);
    CHECK(lp.manifold.alpha == 3.5);

    CHECK_THROWS_MATCHES(
        parse_config_text("version = 1\n[manifold]\nkind = log_polynomial\n"), ConfigParseError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("needs alpha")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[manifold]\nkind = torus\n"),
                         ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown manifold kind")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[manifold]\ndim = 1\n"),
                         ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("dimension must be an integer")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[manifold]\nstretch = 1.5\n"),
                         ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("(1, 1.02]")));
}

TEST_CASE("value syntax is strict: numbers, lists and enumerated words") {
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[evolution]\np = abc\n"),
                         ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("expected a decimal number")));
    CHECK_THROWS_MATCHES(
        parse_config_text("version = 1\n[sweep]\namplitudes = 0.1,zz\n"), ConfigParseError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("comma-separated")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[evolution]\nscheme = midpoint\n"),
                         ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown scheme")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[duhamel]\ndelta = 5\n"),
                         ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("at least e^2")));
    CHECK_THROWS_MATCHES(parse_config_text("version = 1\n[sweep]\nworkers = -1\n"),
                         ConfigParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("expected an integer in [0, 4096]")));

    const auto cfg = parse_config_text(
        "version = 1\n[sweep]\namplitudes = 0.01, 0.1,1\nworkers = 4\n"
        "[evolution]\nscheme = crank_nicolson\n");
    REQUIRE(cfg.sweep.amplitudes.size() == 3);
    CHECK(cfg.sweep.amplitudes[1] == 0.1);
    CHECK(cfg.sweep.workers == 4);
    CHECK(cfg.evolution.half_scheme == fujita::Scheme::CrankNicolson);
}

TEST_CASE("comments and blank lines are ignored") {
    const auto cfg = parse_config_text(
        "# leading comment\n\nversion = 1\n; another comment\n[evolution]\n# p below\np = 3\n");
    CHECK(cfg.evolution.p == 3.0);
}

TEST_CASE("rendering is a fixed point of parse-then-render") {
    const std::string input =
        "version = 1\n"
        "[manifold]\nkind = log_polynomial\ndim = 3\nalpha = 4\nr_max = 120\ncells = 800\n"
        "[potential]\nfamily = inverse_power\nomega = 0.7\nb = 4\n"
        "[evolution]\np = 1.8\namplitude = 0.05\nscheme = crank_nicolson\n"
        "[sweep]\namplitudes = 0.01,0.02\nworkers = 2\n"
        "[duhamel]\nlambda = 0.25\n"
        "[testfn]\ndelta2 = 1\n"
        "[output]\nprecision = 12\n";
    const auto cfg0 = parse_config_text(input);
    const std::string text1 = fujita::render_config(cfg0);
    const auto cfg1 = parse_config_text(text1);
    const std::string text2 = fujita::render_config(cfg1);
    CHECK(text1 == text2);
    CHECK(text1.find("kind = log_polynomial") != std::string::npos);
    CHECK(text1.find("family = inverse_power") != std::string::npos);
    CHECK(text1.find("scheme = crank_nicolson") != std::string::npos);
    CHECK(text1.find("precision = 12") != std::string::npos);
}

TEST_CASE("the assembled sweep configuration carries the shared sections over") {
    const auto cfg = parse_config_text(
        "version = 1\n"
        "[manifold]\nr_max = 50\ncells = 500\n"
        "[potential]\nfamily = regularized_inverse_square\nomega = 1\ntheta = 1\n"
        "[sweep]\np_min = 1.5\np_max = 2.5\np_step = 0.5\namplitudes = 0.1,0.2\nworkers = 3\n"
        "[evolution]\nt_max = 77\n");
    const auto sc = cfg.sweep_config();
    CHECK(sc.r_max == 50.0);
    CHECK(sc.cells == 500);
    CHECK(sc.p_min == 1.5);
    CHECK(sc.p_max == 2.5);
    REQUIRE(sc.amplitudes.size() == 2);
    CHECK(sc.workers == 3);
    CHECK(sc.evolution.T_max == 77.0);
    CHECK(sc.potential.family == fujita::PotentialSpec::Family::RegularizedInverseSquare);
}

TEST_CASE("configs load from disk through the same validation") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "fujita_config_test";
    fs::remove_all(dir);
    const fs::path path = dir / "exp.ini";
    fujita::atomic_write_file(path, "version = 1\n[evolution]\np = 2.5\n");
    const auto cfg = fujita::parse_config(path);
    CHECK(cfg.evolution.p == 2.5);
    REQUIRE_THROWS_AS(fujita::parse_config(dir / "missing.ini"), std::runtime_error);
    fs::remove_all(dir);
}
