// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "speccoh/matern.hpp"
#include "test_helpers.hpp"

using namespace speccoh;

TEST_CASE("matern covariance against a high-precision reference") {
    // Expected values computed to 18 digits with an arbitrary-precision
    // Bessel-K evaluation (independent of the GSL path used here).
    struct Case {
        double nu, a, h, expect;
    };
    const Case cases[] = {
        {0.5, 2.0, 1.0, 0.135335283236612692},   // closed form exp(-a h)
        {1.5, 1.0, 1.0, 0.735758882342884643},
        {0.94, 0.074, 10.0, 0.696593360095580077},
        {2.7, 1.3, 0.5, 0.941682310571593382},
        {25.0, 1.0, 3.0, 0.910683365574937874},
        {10.0, 0.3, 8.0, 0.853468596415438934},
        {1.0, 1.0, 0.125, 0.978889787389468895},
    };
    for (const auto& c : cases) {
        const double got = matern_cov(c.h, MaternParams{1.0, c.nu, c.a});
        REQUIRE_THAT(got, Catch::Matchers::WithinRel(c.expect, 1e-12));
    }
}

TEST_CASE("matern covariance basics") {
    MaternParams p{3.5, 2.2, 0.7};
    REQUIRE(matern_cov(0.0, p) == 3.5);  // sigma^2 at the origin
    const std::vector<double> h{0.0, 0.0};
    REQUIRE(matern_cov(std::span<const double>(h), p) == 3.5);

    // exp(-a h) closed form at nu = 1/2, scaled by sigma^2.
    MaternParams e{2.0, 0.5, 2.0};
    REQUIRE_THAT(matern_cov(1.0, e), Catch::Matchers::WithinRel(2.0 * std::exp(-2.0), 1e-12));

    // Underflow region returns exactly 0 rather than noise.
    REQUIRE(matern_cov(800.0, MaternParams{1.0, 1.0, 1.0}) == 0.0);
}

TEST_CASE("matern sdf ratio identity") {
    // For nu=1, a=1, d=2 the density is proportional to (1+r^2)^-2.
    MaternParams p{1.0, 1.0, 1.0};
    const double r1 = 0.7, r2 = 2.3;
    const double ratio = matern_sdf_radial(r1, p, 2) / matern_sdf_radial(r2, p, 2);
    const double expect = std::pow((1.0 + r2 * r2) / (1.0 + r1 * r1), 2.0);
    REQUIRE_THAT(ratio, Catch::Matchers::WithinRel(expect, 1e-13));
}

TEST_CASE("matern sdf integrates to the variance (d=1)") {
    MaternParams p{1.0, 0.5, 1.0};
    const auto f = [&](double w) { return matern_sdf_radial(std::abs(w), p, 1); };
    // Split at the scale of a, integrate the tail by transformation w = 1/t.
    double integral = 2.0 * testutil::adaptive_simpson(f, 0.0, 50.0, 1e-10);
    integral += 2.0 * testutil::adaptive_simpson(
                          [&](double t) { return f(1.0 / t) / (t * t); }, 1e-6, 1.0 / 50.0, 1e-10);
    REQUIRE_THAT(integral, Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("matern sdf inverts to the covariance (d=1, nu=1.5, a=2)") {
    MaternParams p{1.0, 1.5, 2.0};
    const double h = 1.0;
    const auto f = [&](double w) { return matern_sdf_radial(w, p, 1) * std::cos(w * h); };
    double inv = 2.0 * testutil::adaptive_simpson(f, 0.0, 200.0, 1e-10);
    REQUIRE_THAT(inv, Catch::Matchers::WithinAbs(matern_cov(h, p), 1e-6));
}

TEST_CASE("covariance/sdf duality over a (nu, a, d) lattice") {
    // Numerical Fourier inversion of the density matches the covariance.
    for (double nu : {0.5, 1.0, 2.5}) {
        for (double a : {0.5, 2.0}) {
            MaternParams p{1.0, nu, a};
            for (int d : {1, 3}) {
                // In odd dimension the radial inversion reduces to a 1-d
                // cosine (d=1) or sine (d=3) transform.
                const double h = 0.8;
                double inv = 0.0;
                if (d == 1) {
                    inv = 2.0 * testutil::adaptive_simpson(
                                    [&](double w) { return matern_sdf_radial(w, p, 1) * std::cos(w * h); },
                                    0.0, 80.0 * a, 1e-11);
                } else {
                    // C(h) = (4 pi / h) int_0^inf f(r) r sin(r h) dr for d = 3.
                    inv = 4.0 * M_PI / h *
                          testutil::adaptive_simpson(
                              [&](double r) { return matern_sdf_radial(r, p, 3) * r * std::sin(r * h); },
                              0.0, 120.0 * a, 1e-11);
                }
                REQUIRE_THAT(inv, Catch::Matchers::WithinAbs(matern_cov(h, p), 1e-6));
            }
        }
    }
}

TEST_CASE("matern sdf is positive, radial and decreasing") {
    MaternParams p{2.0, 1.3, 0.8};
    double prev = matern_sdf_radial(0.0, p, 2);
    REQUIRE(prev > 0.0);
    for (double r = 0.5; r < 30.0; r += 0.5) {
        const double v = matern_sdf_radial(r, p, 2);
        REQUIRE(v > 0.0);
        REQUIRE(v < prev);
        prev = v;
    }
    const std::vector<double> w1{3.0, 4.0}, w2{5.0, 0.0};
    REQUIRE(matern_sdf(std::span<const double>(w1), p, 2) ==
            matern_sdf(std::span<const double>(w2), p, 2));
}

TEST_CASE("matern parameter validation") {
    REQUIRE_THROWS_AS((MaternParams{0.0, 1.0, 1.0}.validate()), std::invalid_argument);
    REQUIRE_THROWS_AS((MaternParams{1.0, -1.0, 1.0}.validate()), std::invalid_argument);
    REQUIRE_THROWS_AS((MaternParams{1.0, 1.0, 0.0}.validate()), std::invalid_argument);
}
