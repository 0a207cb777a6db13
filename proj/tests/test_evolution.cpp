#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fujita/evolution.hpp"
#include "fujita/geometry.hpp"
#include "fujita/potentials.hpp"

using Catch::Approx;
using fujita::Classification;
using fujita::EvolutionConfig;
using fujita::ModelManifold;
using fujita::PotentialSpec;
using fujita::RadialGrid;

namespace {

struct Setup {
    ModelManifold m = ModelManifold::euclidean(3);
    RadialGrid g;
    fujita::TridiagonalOperator L;

    explicit Setup(double r_max = 40.0, std::size_t cells = 400)
        : g(RadialGrid::build(m, r_max, cells, 1.02)), L(fujita::laplacian_operator(g, m)) {}
};

}  // namespace

TEST_CASE("gaussian data peaks at the origin and validates its parameters") {
    Setup s;
    const auto u = fujita::gaussian_data(s.g, 2.0, 1.5);
    REQUIRE(u.size() == s.g.cells());
    CHECK(u[0] == Approx(2.0 * std::exp(-s.g.r[0] * s.g.r[0] / 4.5)));
    CHECK(u[0] <= 2.0);
    for (std::size_t j = 1; j < u.size(); ++j) CHECK(u[j] <= u[j - 1]);
    REQUIRE_THROWS_AS(fujita::gaussian_data(s.g, -1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(fujita::gaussian_data(s.g, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("large data drives the quadratic reaction to finite-time blow-up") {
    Setup s;
    EvolutionConfig cfg;
    cfg.p = 2.0;
    cfg.amplitude = 5.0;
    cfg.sigma = 1.0;
    cfg.T_max = 100.0;

    const auto out = fujita::evolve_nonlinear(cfg, s.g, s.L);
    REQUIRE(out.cls == Classification::Blowup);
    REQUIRE(out.t_blowup.has_value());
    CHECK(*out.t_blowup < 2.0);

    // the blow-up time is stable under grid refinement
    Setup fine(40.0, 800);
    const auto out2 = fujita::evolve_nonlinear(cfg, fine.g, fine.L);
    REQUIRE(out2.cls == Classification::Blowup);
    CHECK(*out2.t_blowup == Approx(*out.t_blowup).epsilon(0.2));
}

TEST_CASE("small data diffuses to a global decaying solution") {
    Setup s;
    EvolutionConfig cfg;
    cfg.p = 2.0;
    cfg.amplitude = 0.01;
    cfg.sigma = 1.0;
    // horizon short enough that the wall stays below 1e-6 * sup: the tail
    // level exp(-r_max^2 / (4 T)) must clear the contamination threshold
    cfg.T_max = 25.0;

    const auto out = fujita::evolve_nonlinear(cfg, s.g, s.L);
    REQUIRE(out.cls == Classification::Global);
    CHECK_FALSE(out.t_blowup.has_value());
    CHECK(out.final_sup < 0.01);
    CHECK_FALSE(out.boundary_contaminated);

    // history: starts at t=0 with the data's sup, strictly increasing times,
    // nonnegative field throughout
    REQUIRE(out.history.size() >= 3);
    CHECK(out.history.front().t == 0.0);
    CHECK(out.history.front().sup == Approx(0.01));
    for (std::size_t i = 1; i < out.history.size(); ++i)
        CHECK(out.history[i].t > out.history[i - 1].t);
    for (double v : out.final_values) CHECK(v >= 0.0);
}

TEST_CASE("identically zero data stays zero and counts as global") {
    Setup s;
    EvolutionConfig cfg;
    cfg.amplitude = 0.0;
    cfg.T_max = 50.0;
    const auto out = fujita::evolve_nonlinear(cfg, s.g, s.L);
    CHECK(out.cls == Classification::Global);
    CHECK(out.final_sup == 0.0);
}

TEST_CASE("larger data dominates smaller data pointwise for all time") {
    Setup s;
    EvolutionConfig lo;
    lo.amplitude = 0.005;
    lo.T_max = 50.0;
    EvolutionConfig hi = lo;
    hi.amplitude = 0.01;

    const auto a = fujita::evolve_nonlinear(lo, s.g, s.L);
    const auto b = fujita::evolve_nonlinear(hi, s.g, s.L);
    REQUIRE(a.final_values.size() == b.final_values.size());
    for (std::size_t j = 0; j < a.final_values.size(); ++j)
        CHECK(a.final_values[j] <= b.final_values[j] + 1e-15);
}

TEST_CASE("explicit time lattices are honored exactly and skip resolution checks") {
    // a grid too coarse for the policy preconditions
    Setup s(40.0, 80);
    EvolutionConfig cfg;
    cfg.amplitude = 0.01;
    cfg.sigma = 0.05;  // far below the spacing: policy mode would refuse
    cfg.time_lattice = {0.0, 0.125, 0.25, 0.5, 1.0};

    const auto out = fujita::evolve_nonlinear(cfg, s.g, s.L);
    REQUIRE(out.history.size() == cfg.time_lattice.size());
    for (std::size_t i = 0; i < out.history.size(); ++i)
        CHECK(out.history[i].t == cfg.time_lattice[i]);

    EvolutionConfig bad = cfg;
    bad.time_lattice = {0.5, 1.0};
    REQUIRE_THROWS_AS(fujita::evolve_nonlinear(bad, s.g, s.L), std::invalid_argument);
}

TEST_CASE("a coarse lattice step across the reaction pole reports blow-up") {
    Setup s;
    EvolutionConfig cfg;
    cfg.p = 2.0;
    cfg.amplitude = 5.0;
    cfg.time_lattice = {0.0, 1.0};  // one full unit step: far past the pole at 1/5
    const auto out = fujita::evolve_nonlinear(cfg, s.g, s.L);
    REQUIRE(out.cls == Classification::Blowup);
    CHECK(std::isinf(out.final_sup));
}

TEST_CASE("policy-driven runs enforce their resolution preconditions") {
    Setup s;
    EvolutionConfig cfg;
    cfg.amplitude = 0.01;

    EvolutionConfig tiny_sigma = cfg;
    tiny_sigma.sigma = 0.01;  // below twice the uniform spacing
    REQUIRE_THROWS_AS(fujita::evolve_nonlinear(tiny_sigma, s.g, s.L), std::invalid_argument);

    EvolutionConfig long_run = cfg;
    long_run.T_max = 1.0e4;  // diffusion length 100 exceeds r_max/4 = 10
    REQUIRE_THROWS_AS(fujita::evolve_nonlinear(long_run, s.g, s.L), std::invalid_argument);

    EvolutionConfig bad_p = cfg;
    bad_p.p = 1.0;
    REQUIRE_THROWS_AS(fujita::evolve_nonlinear(bad_p, s.g, s.L), std::invalid_argument);

    EvolutionConfig bad_w = cfg;
    bad_w.T_max = 10.0;
    std::vector<double> w(s.g.cells() - 1, 1.0);
    REQUIRE_THROWS_AS(fujita::evolve_nonlinear(bad_w, s.g, s.L, w), std::invalid_argument);

    EvolutionConfig bad_u0 = cfg;
    bad_u0.T_max = 10.0;
    bad_u0.initial_values.assign(3, 0.5);
    REQUIRE_THROWS_AS(fujita::evolve_nonlinear(bad_u0, s.g, s.L), std::invalid_argument);
}

TEST_CASE("data reaching the outer wall raises the contamination flag") {
    Setup s(10.0, 200);
    EvolutionConfig cfg;
    cfg.amplitude = 0.01;
    cfg.sigma = 5.0;  // wall value A e^{-2}: clearly above the threshold
    cfg.T_max = 6.0;
    const auto out = fujita::evolve_nonlinear(cfg, s.g, s.L);
    CHECK(out.boundary_contaminated);
}

TEST_CASE("conjugating by the trivial profile changes nothing") {
    EvolutionConfig cfg;
    cfg.p = 2.0;
    cfg.amplitude = 0.1;
    cfg.sigma = 1.0;
    cfg.T_max = 1.0;

    const auto m = ModelManifold::euclidean(3);
    const auto g = RadialGrid::build(m, 40.0, 400, 1.02);
    const double dev =
        fujita::transform_equivalence_check(cfg, m, PotentialSpec::zero(), g, fujita::HRoute::Solved);
    CHECK(dev <= 1e-12);
}

TEST_CASE("marched-profile conjugation is exact at the discrete level") {
    EvolutionConfig cfg;
    cfg.p = 2.0;
    cfg.amplitude = 0.1;
    cfg.sigma = 1.0;
    cfg.T_max = 1.0;

    const auto m = ModelManifold::euclidean(3);
    const auto g = RadialGrid::build(m, 40.0, 400, 1.02);
    const auto V = PotentialSpec::hardy_example(3, -0.25);
    const double dev = fujita::transform_equivalence_check(cfg, m, V, g, fujita::HRoute::Solved);
    CHECK(dev <= 1e-10);
}

TEST_CASE("closed-form-profile conjugation agrees to discretization accuracy") {
    EvolutionConfig cfg;
    cfg.p = 2.0;
    cfg.amplitude = 0.1;
    cfg.sigma = 1.0;
    cfg.T_max = 1.0;

    const auto m = ModelManifold::euclidean(3);
    const auto g = RadialGrid::build(m, 40.0, 800, 1.02);
    const auto V = PotentialSpec::hardy_example(3, -0.25);
    const double dev =
        fujita::transform_equivalence_check(cfg, m, V, g, fujita::HRoute::ClosedForm);
    CHECK(dev <= 1e-3);

    REQUIRE_THROWS_AS(fujita::transform_equivalence_check(cfg, m, PotentialSpec::zero(), g,
                                                          fujita::HRoute::ClosedForm),
                      std::invalid_argument);
}

TEST_CASE("equivalence check refuses runs that blow up before the horizon") {
    EvolutionConfig cfg;
    cfg.p = 2.0;
    cfg.amplitude = 5.0;
    cfg.sigma = 1.0;
    cfg.T_max = 1.0;

    const auto m = ModelManifold::euclidean(3);
    const auto g = RadialGrid::build(m, 40.0, 400, 1.02);
    const auto V = PotentialSpec::hardy_example(3, -0.25);
    REQUIRE_THROWS_AS(fujita::transform_equivalence_check(cfg, m, V, g, fujita::HRoute::Solved),
                      std::runtime_error);
}
