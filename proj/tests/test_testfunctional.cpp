#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fujita/testfunctional.hpp"

using Catch::Approx;
using fujita::CutoffFamily;

namespace {
const auto sharp = fujita::power_log_law(2.0, 1.0);
const auto relaxed = fujita::power_log_law(2.0, 1.5);
}  // namespace

TEST_CASE("ramp profile is a unit plateau with a bounded quintic descent") {
    CHECK(CutoffFamily::profile(0.0) == 1.0);
    CHECK(CutoffFamily::profile(1.0) == 1.0);
    CHECK(CutoffFamily::profile(1.5) == Approx(0.5));
    CHECK(CutoffFamily::profile(2.0) == 0.0);
    CHECK(CutoffFamily::profile(5.0) == 0.0);
    for (double s = 1.0; s < 2.0; s += 0.07)
        CHECK(CutoffFamily::profile(s) >= CutoffFamily::profile(s + 0.07));

    // the derivative bound 1.875 is attained exactly midway down the ramp
    CHECK(CutoffFamily::profile_derivative(1.5) ==
          Approx(-CutoffFamily::profile_derivative_bound));
    for (double s = 0.0; s < 3.0; s += 0.05)
        CHECK(std::abs(CutoffFamily::profile_derivative(s)) <=
              CutoffFamily::profile_derivative_bound);

    // derivative consistency by central differences
    for (double s : {1.2, 1.5, 1.9}) {
        const double h = 1e-6;
        const double fd =
            (CutoffFamily::profile(s + h) - CutoffFamily::profile(s - h)) / (2.0 * h);
        CHECK(CutoffFamily::profile_derivative(s) == Approx(fd).margin(1e-8));
    }
}

TEST_CASE("dilated cutoffs scale their derivatives by the dyadic factor") {
    const std::size_t k = 3;
    const double r = 10.0;  // inside the ramp of gamma_3 (support (8,16))
    const double h = 1e-6;
    const double fd = (CutoffFamily::gamma(k, r + h) - CutoffFamily::gamma(k, r - h)) / (2.0 * h);
    CHECK(CutoffFamily::gamma_radial_derivative(k, r) == Approx(fd).margin(1e-8));

    const double t = 100.0;  // inside the ramp of eta_3 (support (64,128))
    const double fdt =
        (CutoffFamily::eta(k, t + h) - CutoffFamily::eta(k, t - h)) / (2.0 * h);
    CHECK(CutoffFamily::eta_time_derivative(k, t) == Approx(fdt).margin(1e-8));
}

TEST_CASE("averaged cutoff is exactly one on the core cylinder and vanishes far out") {
    const CutoffFamily f(3);
    for (double r : {0.0, 1.0, 4.0, 8.0})
        for (double t : {0.0, 10.0, 64.0}) CHECK(f.phi(r, t) == Approx(1.0).margin(1e-15));
    // beyond the largest scale: gamma_{2i} kills every term
    CHECK(f.phi(std::ldexp(1.0, 7), 0.0) == 0.0);   // r = 2^{2i+1}
    CHECK(f.phi(0.0, std::ldexp(1.0, 13)) == 0.0);  // t = 2 * 4^{2i}
    for (double r = 0.0; r < 200.0; r += 7.0)
        for (double t = 0.0; t < 9000.0; t += 500.0) {
            const double v = f.phi(r, t);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-15);
        }
    REQUIRE_THROWS_AS(CutoffFamily(1), std::invalid_argument);
    REQUIRE_THROWS_AS(CutoffFamily(129), std::invalid_argument);
}

TEST_CASE("disjoint gradient supports collapse the power sum to a pointwise power") {
    const CutoffFamily f(2);  // scales k = 3, 4: ramps on (8,16) and (16,32)
    for (double r : {9.0, 12.0, 15.0, 20.0, 28.0}) {
        for (double t : {0.0, 30.0}) {
            const double d = std::abs(f.phi_radial_derivative(r, t));
            CHECK(f.gradient_power_split(r, t, 1.0) == Approx(d).margin(1e-18));
            CHECK(f.gradient_power_split(r, t, 2.0) == Approx(d * d).margin(1e-18));
        }
    }
}

TEST_CASE("ladder sums reproduce their frozen reference values on the critical law") {
    const std::size_t is[] = {2, 4, 16, 64};
    const double j_ref[] = {3.53223006755, 3.22447014382, 2.97281458422, 2.90649810994};
    const double l_ref[] = {2.49766383347, 2.28004470443, 2.10209735171, 2.05520452304};
    for (int n = 0; n < 4; ++n) {
        CHECK(fujita::j_sum(is[n], 2.0, sharp) == Approx(j_ref[n]).epsilon(1e-9));
        CHECK(fujita::l_sum(is[n], 2.0, sharp) == Approx(l_ref[n]).epsilon(1e-9));
    }
}

TEST_CASE("structural identities tie the three sums together") {
    const double root2 = std::sqrt(2.0);
    for (std::size_t i : {2u, 5u, 17u, 64u}) {
        // at p = 2 the gradient sum is exactly sqrt(2) times the time sum
        CHECK(fujita::j_sum(i, 2.0, sharp) ==
              Approx(root2 * fujita::l_sum(i, 2.0, sharp)).epsilon(1e-12));
        CHECK(fujita::j_sum(i, 2.0, sharp, 0.7) ==
              Approx(root2 * fujita::l_sum(i, 2.0, sharp, 0.7)).epsilon(1e-12));
        // the terminal variant ignores the delta weight entirely
        CHECK(fujita::l_sum(i, 2.0, sharp, 9.9, fujita::LVariant::Final) ==
              Approx(fujita::l_sum(i, 2.0, sharp, 0.0)).epsilon(1e-13));
    }
    // with both delta weights off, the negative-weight variant coincides with j
    for (std::size_t i : {7u, 16u, 40u})
        CHECK(fujita::j_sum_negative_weight(i, 2.0, sharp, 0.0) ==
              Approx(fujita::j_sum(i, 2.0, sharp, 0.0)).epsilon(1e-13));
}

TEST_CASE("argument gates on scale index and power are enforced") {
    CHECK_THROWS_AS(fujita::j_sum(1, 2.0, sharp), std::invalid_argument);
    CHECK_THROWS_AS(fujita::j_sum(200, 2.0, sharp), std::invalid_argument);
    CHECK_THROWS_AS(fujita::j_sum(8, 1.0, sharp), std::invalid_argument);
    CHECK_THROWS_AS(fujita::l_sum(1, 2.0, sharp), std::invalid_argument);
    CHECK_THROWS_AS(fujita::l_sum(8, 0.5, sharp), std::invalid_argument);
    // sign gate p - 1/i - 1 > 0: p = 1.2 requires i > 5
    CHECK_THROWS_AS(fujita::j_sum_negative_weight(4, 1.2, sharp), std::domain_error);
    CHECK_NOTHROW(fujita::j_sum_negative_weight(6, 1.2, sharp));
}

TEST_CASE("functional report mirrors the individual sums and gates its last entry") {
    const auto rep = fujita::functional_report(8, 2.0, sharp, 0.3, 0.7);
    CHECK(rep.i == 8);
    CHECK(rep.j == Approx(fujita::j_sum(8, 2.0, sharp, 0.7)));
    CHECK(rep.l_time == Approx(fujita::l_sum(8, 2.0, sharp, 0.7)));
    CHECK(rep.l_final == Approx(fujita::l_sum(8, 2.0, sharp, 0.0, fujita::LVariant::Final)));
    CHECK(rep.j_negative == Approx(fujita::j_sum_negative_weight(8, 2.0, sharp, 0.3)));

    const auto gated = fujita::functional_report(4, 1.2, sharp);
    CHECK(std::isnan(gated.j_negative));
    CHECK(std::isfinite(gated.j));
}

TEST_CASE("critical law keeps every ladder flat while a relaxed logarithm tilts it") {
    const auto flat =
        fujita::ladder_fit([](std::size_t i) { return fujita::j_sum(i, 2.0, sharp); });
    REQUIRE(flat.scales.size() == 61);
    CHECK(flat.scales.front() == 4.0);
    CHECK(flat.scales.back() == 64.0);
    CHECK(flat.slope == Approx(-0.028125).margin(1e-4));
    CHECK(std::abs(flat.slope) <= 0.05);

    const auto tilted =
        fujita::ladder_fit([](std::size_t i) { return fujita::j_sum(i, 2.0, relaxed); });
    CHECK(tilted.slope == Approx(0.208529).margin(1e-4));
    // within 20% of the first-order prediction eps (p-1)/p = 0.25
    CHECK(std::abs(tilted.slope - 0.25) / 0.25 < 0.20);

    const auto lt =
        fujita::ladder_fit([](std::size_t i) { return fujita::l_sum(i, 2.0, relaxed); });
    CHECK(lt.slope == Approx(0.208529).margin(1e-4));
}

TEST_CASE("delta weights dampen slowly enough to stay ladder-bounded") {
    const auto d2 = fujita::ladder_fit(
        [](std::size_t i) { return fujita::j_sum(i, 2.0, sharp, 1.0); });
    CHECK(d2.slope == Approx(-0.020510).margin(1e-4));
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 4; i <= 64; ++i) {
        const double ratio = fujita::j_sum(i, 2.0, sharp, 1.0) / fujita::j_sum(i, 2.0, sharp);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(lo == Approx(2.9612).margin(5e-3));
    CHECK(hi == Approx(3.0432).margin(5e-3));

    const auto d1 = fujita::ladder_fit(
        [](std::size_t i) { return fujita::j_sum_negative_weight(i, 2.0, sharp, 1.0); });
    CHECK(d1.slope == Approx(-0.190100).margin(1e-4));
    lo = 1e300, hi = 0.0;
    for (std::size_t i = 4; i <= 64; ++i) {
        const double ratio =
            fujita::j_sum_negative_weight(i, 2.0, sharp, 1.0) / fujita::j_sum(i, 2.0, sharp);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(lo == Approx(3.1561).margin(5e-3));
    CHECK(hi == Approx(6.2512).margin(5e-3));
}

TEST_CASE("ladder fit rejects bad ranges and non-positive sums") {
    REQUIRE_THROWS_AS(fujita::ladder_fit([](std::size_t) { return 1.0; }, 1, 8),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(fujita::ladder_fit([](std::size_t) { return 1.0; }, 8, 8),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(fujita::ladder_fit([](std::size_t) { return 0.0; }, 4, 8),
                      std::domain_error);
    REQUIRE_THROWS_AS(fujita::ladder_fit([](std::size_t) { return -2.0; }, 4, 8),
                      std::domain_error);
}

TEST_CASE("power-log volume law evaluates as stated") {
    const auto law = fujita::power_log_law(3.0, 2.0);
    const double r = std::exp(2.0);
    CHECK(law(r) == Approx(std::pow(r, 3.0) * 4.0).epsilon(1e-13));
    CHECK(sharp(8.0) == Approx(64.0 * std::log(8.0)).epsilon(1e-13));
}
