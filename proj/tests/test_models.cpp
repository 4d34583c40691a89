// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "speccoh/models.hpp"
#include "test_helpers.hpp"

using namespace speccoh;

namespace {

std::vector<double> random_omega(std::mt19937& rng, int d, double scale = 5.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> w(d);
    for (auto& x : w) x = u(rng);
    return w;
}

void require_psd(const Eigen::MatrixXcd& f) {
    REQUIRE((f - f.adjoint()).norm() < 1e-12 * (1.0 + f.norm()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f, Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-10 * f.real().trace());
}

}  // namespace

TEST_CASE("multivariate matern spectral matrix") {
    SECTION("rho = 0 gives a diagonal matrix") {
        auto m = MultiMaternModel::bivariate(2, {1.0, 0.7, 1.2}, {2.0, 1.4, 0.6}, {0.0, 1.0, 1.0});
        const auto f = m.spectral_matrix_radial(1.3);
        REQUIRE(f(0, 1) == std::complex<double>(0.0, 0.0));
        REQUIRE(f(0, 0).real() > 0.0);
        REQUIRE(f(1, 1).real() > 0.0);
    }
    SECTION("parsimonious parameters give |coherence| = |rho| everywhere") {
        const double rho = -0.37;
        auto m = MultiMaternModel::bivariate(2, {1.0, 0.6, 1.5}, {1.0, 1.8, 1.5},
                                             {rho, 0.5 * (0.6 + 1.8), 1.5});
        std::mt19937 rng(3);
        for (int k = 0; k < 100; ++k) {
            const double r = std::exp(std::uniform_real_distribution<double>(-4, 4)(rng));
            const auto f = m.spectral_matrix_radial(r);
            const PairSpectrum ps{f(0, 0).real(), f(1, 1).real(), f(0, 1)};
            REQUIRE_THAT(ps.abs_coherence(), Catch::Matchers::WithinAbs(std::abs(rho), 1e-12));
            REQUIRE_THAT(ps.signed_coherency(), Catch::Matchers::WithinAbs(rho, 1e-12));
        }
    }
    SECTION("identical matern factors cancel: coherence = rho exactly") {
        const double rho = 0.42;
        auto m = MultiMaternModel::bivariate(3, {1.0, 1.1, 0.9}, {1.0, 1.1, 0.9}, {rho, 1.1, 0.9});
        const auto f = m.spectral_matrix_radial(2.0);
        REQUIRE_THAT(f(0, 1).real() / std::sqrt(f(0, 0).real() * f(1, 1).real()),
                     Catch::Matchers::WithinAbs(rho, 1e-14));
    }
}

TEST_CASE("bivariate matern coherence") {
    SECTION("common-smoothness regime endpoints") {
        // nu = 1 everywhere, a1 = a2 = 1, a12 = sqrt(2), rho = 0.5, d = 2.
        auto m = MultiMaternModel::bivariate(2, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0},
                                             {0.5, 1.0, std::sqrt(2.0)});
        REQUIRE_THAT(mm_coherence2_radial(m, 0, 1, 0.0), Catch::Matchers::WithinAbs(0.0625, 1e-13));
        // High-frequency limit of |coherence| is rho (a12^2/(a1 a2))^nu = 1.
        REQUIRE_THAT(std::sqrt(mm_coherence2_radial(m, 0, 1, 1e3)),
                     Catch::Matchers::WithinRel(1.0, 1e-2));
        // Specialized common-smoothness form agrees with the general one.
        for (double r : {0.0, 0.3, 1.0, 7.0, 300.0})
            REQUIRE_THAT(mm_coherence2_common_smoothness(0.5, 1.0, 1.0, 1.0, std::sqrt(2.0), 2, r),
                         Catch::Matchers::WithinRel(mm_coherence2_radial(m, 0, 1, r), 1e-12));
    }
    SECTION("common-range regime: parsimonious smoothness gives constant rho^2") {
        auto m = MultiMaternModel::bivariate(2, {1.0, 0.5, 1.0}, {1.0, 1.5, 1.0}, {0.6, 1.0, 1.0});
        for (double r : {0.0, 0.1, 1.0, 10.0, 1e4}) {
            REQUIRE_THAT(mm_coherence2_radial(m, 0, 1, r), Catch::Matchers::WithinRel(0.36, 1e-12));
            REQUIRE_THAT(mm_coherence2_common_range(0.6, 0.5, 1.5, 1.0, 1.0, 2, r),
                         Catch::Matchers::WithinRel(0.36, 1e-12));
        }
    }
    SECTION("equals the spectral-matrix quotient") {
        std::mt19937 rng(17);
        auto m = MultiMaternModel::bivariate(2, {1.3, 0.8, 1.1}, {0.7, 1.6, 0.9}, {0.4, 1.3, 1.2});
        for (int k = 0; k < 50; ++k) {
            const auto w = random_omega(rng, 2);
            const auto f = m.spectral_matrix(w);
            const double quotient = std::norm(f(0, 1)) / (f(0, 0).real() * f(1, 1).real());
            REQUIRE_THAT(mm_coherence(m, w, 0, 1), Catch::Matchers::WithinRel(quotient, 1e-12));
        }
    }
    SECTION("monotone in the radius as the parameters dictate") {
        // Common range, nu12 above the mean: coherence decreasing.
        auto down = MultiMaternModel::bivariate(2, {1.0, 0.5, 1.0}, {1.0, 0.5, 1.0}, {0.5, 1.0, 1.0});
        // Common smoothness, a12 above the marginals: coherence increasing.
        auto up = MultiMaternModel::bivariate(2, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {0.5, 1.0, 1.4});
        double prev_down = mm_coherence2_radial(down, 0, 1, 0.0);
        double prev_up = mm_coherence2_radial(up, 0, 1, 0.0);
        for (double r = 0.25; r < 40.0; r *= 1.7) {
            const double gd = mm_coherence2_radial(down, 0, 1, r);
            const double gu = mm_coherence2_radial(up, 0, 1, r);
            REQUIRE(gd < prev_down);
            REQUIRE(gu > prev_up);
            prev_down = gd;
            prev_up = gu;
        }
    }
}

TEST_CASE("validity check") {
    SECTION("cross smoothness below the mean is invalid with a witness") {
        auto m = MultiMaternModel::bivariate(2, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {0.5, 0.9, 1.0});
        const auto res = mm_validity_check(m);
        REQUIRE_FALSE(res.valid);
        REQUIRE(res.witness.has_value());
        // The witness really does violate the bound.
        double r2 = 0.0;
        for (double w : *res.witness) r2 += w * w;
        REQUIRE(mm_coherence2_radial(m, 0, 1, std::sqrt(r2)) > 1.0);
    }
    SECTION("parsimonious model is valid up to |rho| = 1") {
        for (double rho : {0.3, -0.99, 1.0}) {
            auto m = MultiMaternModel::bivariate(2, {1.0, 0.5, 2.0}, {1.0, 1.5, 2.0}, {rho, 1.0, 2.0});
            const auto res = mm_validity_check(m);
            REQUIRE(res.valid);
            REQUIRE(res.sup_coh2 <= 1.0 + 1e-10);
        }
    }
    SECTION("rho = 0 is valid for any cross parameters") {
        auto m = MultiMaternModel::bivariate(2, {1.0, 0.5, 1.0}, {1.0, 2.5, 1.0}, {0.0, 0.1, 17.0});
        REQUIRE(mm_validity_check(m).valid);
    }
    SECTION("trivariate model with an inconsistent pair is caught") {
        std::vector<MaternParams> marg{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
        std::vector<CrossMaternParams> cross{{0.5, 0.8, 1.0},   // pair (1,2): nu12 < mean -> invalid
                                             {0.0, 1.0, 1.0},
                                             {0.0, 1.0, 1.0}};
        MultiMaternModel m(2, marg, cross);
        REQUIRE_FALSE(mm_validity_check(m).valid);
    }
}

TEST_CASE("separable coherence") {
    SECTION("identity matrix: zero cross coherence") {
        REQUIRE(separable_coherence(Eigen::Matrix2d::Identity(), 0, 1) == 0.0);
    }
    SECTION("known values") {
        Eigen::Matrix2d r1;
        r1 << 1.0, 0.6, 0.6, 1.0;
        REQUIRE_THAT(separable_coherence(r1, 0, 1), Catch::Matchers::WithinRel(0.36, 1e-14));
        Eigen::Matrix2d r2;
        r2 << 2.0, 1.0, 1.0, 2.0;
        REQUIRE_THAT(separable_coherence(r2, 0, 1), Catch::Matchers::WithinRel(0.25, 1e-14));
    }
    SECTION("numerical spectra of R C(h) with an exponential base agree") {
        // d = 1 quadrature oracle: f_ij(w) = r_ij (1/pi) int_0^inf e^{-a h} cos(w h) dh.
        Eigen::Matrix2d R;
        R << 1.0, 0.6, 0.6, 1.0;
        const double a = 1.7, w = 0.9;
        const auto fbase = [&](double h) { return std::exp(-a * h) * std::cos(w * h) / M_PI; };
        const double base = testutil::adaptive_simpson(fbase, 0.0, 60.0 / a, 1e-12);
        const double f11 = R(0, 0) * base, f22 = R(1, 1) * base, f12 = R(0, 1) * base;
        REQUIRE_THAT(f12 * f12 / (f11 * f22),
                     Catch::Matchers::WithinRel(separable_coherence(R, 0, 1), 1e-9));
    }
    SECTION("non positive definite matrix is rejected") {
        Eigen::Matrix2d bad;
        bad << 1.0, 2.0, 2.0, 1.0;
        REQUIRE_THROWS_AS(separable_coherence(bad, 0, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(SeparableModel(2, bad, MaternParams{1, 1, 1}), std::invalid_argument);
    }
    SECTION("separable model spectra are frequency-constant in coherence") {
        Eigen::Matrix2d R;
        R << 1.5, -0.4, -0.4, 0.8;
        SeparableModel m(2, R, MaternParams{1.0, 1.2, 0.9});
        std::mt19937 rng(5);
        double lo = 2.0, hi = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double r = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
            const auto f = m.spectral_matrix_radial(r);
            const PairSpectrum ps{f(0, 0).real(), f(1, 1).real(), f(0, 1)};
            lo = std::min(lo, ps.abs_coherence());
            hi = std::max(hi, ps.abs_coherence());
        }
        REQUIRE(hi - lo <= 1e-10);
        REQUIRE_THAT(hi * hi, Catch::Matchers::WithinRel(separable_coherence(R, 0, 1), 1e-10));
    }
}

TEST_CASE("convolution constructions have unit |coherence|") {
    SECTION("kernel-smoothed process") {
        const double f1 = 0.8;
        for (double fk : {2.0, 0.3, -0.7}) {
            const PairSpectrum ps = convolution_pair_spectra(fk, f1);
            REQUIRE_THAT(ps.abs_coherence(), Catch::Matchers::WithinAbs(1.0, 1e-12));
            if (fk < 0.0) REQUIRE(ps.signed_coherency() < 0.0);
        }
    }
    SECTION("coherence defined as 0 where the transfer vanishes") {
        const PairSpectrum ps = convolution_pair_spectra(0.0, 0.8);
        REQUIRE(ps.coherence2() == 0.0);
    }
    SECTION("covariance convolution (two transforms, unit base)") {
        // C_ij = c_i * c_j has spectra g_i g_j; coherence 1 where both nonzero.
        const double g1 = 0.9, g2 = -1.7;
        const PairSpectrum ps = common_base_pair_spectra(g1, g2, 1.0);
        REQUIRE_THAT(ps.abs_coherence(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("common-base kernel convolution, gaussian transfer against matern base") {
        MaternParams base{1.0, 1.0, 1.0};
        GaussianTransfer g1{1.0, 0.5}, g2{0.7, 1.5};
        std::mt19937 rng(9);
        for (int k = 0; k < 100; ++k) {
            const double r = std::exp(std::uniform_real_distribution<double>(-3, 2)(rng));
            const PairSpectrum ps =
                common_base_pair_spectra(g1(r), g2(r), matern_sdf_radial(r, base, 2));
            REQUIRE_THAT(ps.abs_coherence(), Catch::Matchers::WithinAbs(1.0, 1e-10));
        }
    }
}

TEST_CASE("linear model of coregionalization") {
    const MaternParams w1{1.0, 0.5, 1.0}, w2{1.0, 1.5, 0.4};
    SECTION("identity coregionalization: diagonal spectra") {
        LmcModel m(2, Eigen::Matrix2d::Identity(), {w1, w2});
        const auto f = m.spectral_matrix_radial(0.8);
        REQUIRE(f(0, 1) == std::complex<double>(0.0, 0.0));
        REQUIRE_THAT(f(0, 0).real(), Catch::Matchers::WithinRel(matern_sdf_radial(0.8, w1, 2), 1e-14));
    }
    SECTION("unit determinant degeneracy: b12 b21 = 1 gives coherence 1") {
        Eigen::Matrix2d B;
        B << 1.0, 0.5, 2.0, 1.0;
        LmcModel m(2, B, {w1, w2});
        for (double r : {0.1, 1.0, 5.0}) {
            const auto f = m.spectral_matrix_radial(r);
            const PairSpectrum ps{f(0, 0).real(), f(1, 1).real(), f(0, 1)};
            REQUIRE_THAT(ps.coherence2(), Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
    }
    SECTION("b12 = 0: constant gain b21 at every frequency") {
        Eigen::Matrix2d B;
        B << 1.0, 0.0, 0.35, 1.0;
        LmcModel m(2, B, {w1, w2});
        for (double r : {0.0, 0.4, 2.0, 9.0}) {
            const auto f = m.spectral_matrix_radial(r);
            // Gain of Z2 on Z1 reads the pair as (1, 2).
            const PairSpectrum ps{f(0, 0).real(), f(1, 1).real(), f(0, 1)};
            REQUIRE_THAT(pair_phase_gain(ps).gain, Catch::Matchers::WithinRel(0.35, 1e-12));
        }
    }
    SECTION("general gain formula with b11 = b22 = 1") {
        Eigen::Matrix2d B;
        B << 1.0, 0.25, 0.6, 1.0;
        LmcModel m(2, B, {w1, w2});
        const double r = 1.2;
        const double l1 = matern_sdf_radial(r, w1, 2), l2 = matern_sdf_radial(r, w2, 2);
        const auto f = m.spectral_matrix_radial(r);
        const PairSpectrum ps{f(0, 0).real(), f(1, 1).real(), f(0, 1)};
        REQUIRE_THAT(pair_phase_gain(ps).gain,
                     Catch::Matchers::WithinRel((0.6 * l1 + 0.25 * l2) / (l1 + 0.25 * 0.25 * l2), 1e-12));
        // Real latent spectra imply zero phase.
        REQUIRE(pair_phase_gain(ps).phase == 0.0);
    }
}

TEST_CASE("phase and gain") {
    SECTION("real positive cross spectrum has zero phase") {
        const PairSpectrum ps{2.0, 1.0, {0.7, 0.0}};
        REQUIRE(pair_phase_gain(ps).phase == 0.0);
        REQUIRE_THAT(pair_phase_gain(ps).gain, Catch::Matchers::WithinRel(0.35, 1e-15));
    }
    SECTION("shifted and rescaled process") {
        // Z1(s) = alpha Z2(s - u): f11 = alpha^2 f22, f12 = alpha e^{-i w.u} f22.
        const double f22 = 1.7, u = 0.8;
        for (double alpha : {2.0, -2.0}) {
            for (double w : {0.3, 2.9, -1.4, 5.0}) {
                const std::complex<double> ph(std::cos(-w * u), std::sin(-w * u));
                const PairSpectrum ps{alpha * alpha * f22, f22, alpha * ph * f22};
                const auto pg = pair_phase_gain(ps);
                double expect = alpha > 0 ? -w * u : M_PI - w * u;
                expect = std::remainder(expect, 2.0 * M_PI);
                if (expect <= -M_PI) expect += 2.0 * M_PI;
                REQUIRE_THAT(pg.phase, Catch::Matchers::WithinAbs(expect, 1e-12));
                REQUIRE_THAT(pg.gain, Catch::Matchers::WithinRel(std::abs(alpha) / (alpha * alpha), 1e-12));
            }
        }
    }
    SECTION("phase antisymmetry under conjugate symmetry") {
        std::mt19937 rng(23);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < 50; ++k) {
            const std::complex<double> f12(u(rng), u(rng));
            const PairSpectrum ps{1.3, 0.9, f12};
            const PairSpectrum neg{1.3, 0.9, std::conj(f12)};  // value at -w for real fields
            const double p1 = pair_phase_gain(ps).phase;
            const double p2 = pair_phase_gain(neg).phase;
            if (std::abs(std::abs(p1) - M_PI) > 1e-12)
                REQUIRE_THAT(p2, Catch::Matchers::WithinAbs(-p1, 1e-12));
        }
    }
    SECTION("zero marginal power is an error") {
        REQUIRE_THROWS_AS(pair_phase_gain(PairSpectrum{0.0, 1.0, {0.0, 0.0}}), std::domain_error);
    }
}

TEST_CASE("optimal prediction transfer") {
    SECTION("identity predictor") {
        const PairSpectrum ps{1.0, 0.5, {0.5, 0.0}};
        REQUIRE(optimal_transfer(ps) == std::complex<double>(1.0, 0.0));
    }
    SECTION("kernel-smoothed pair recovers the transfer exactly") {
        MaternParams base{1.0, 1.0, 1.0};
        GaussianTransfer fk{1.0, 0.7};
        for (double r : {0.0, 0.5, 2.0, 6.0}) {
            const PairSpectrum ps = convolution_pair_spectra(fk(r), matern_sdf_radial(r, base, 2));
            // Predicting the smoothed variable from the base swaps the pair.
            const auto t = optimal_transfer(ps.swapped());
            REQUIRE_THAT(t.real(), Catch::Matchers::WithinRel(fk(r), 1e-13));
            REQUIRE(t.imag() == 0.0);
        }
    }
    SECTION("conditional spectrum identity f_{1|2} = f11 coherence2") {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> u(0.1, 2.0);
        for (int k = 0; k < 100; ++k) {
            const PairSpectrum ps{u(rng), u(rng), {0.3 * u(rng), 0.2 * u(rng)}};
            REQUIRE_THAT(conditional_sdf(ps),
                         Catch::Matchers::WithinRel(ps.f11 * ps.coherence2(), 1e-12));
        }
    }
    SECTION("zero denominator is an error") {
        REQUIRE_THROWS_AS(optimal_transfer(PairSpectrum{1.0, 0.0, {0.0, 0.0}}), std::domain_error);
    }
}

TEST_CASE("spectral matrices are Hermitian nonnegative definite") {
    std::mt19937 rng(41);
    auto mm = MultiMaternModel::bivariate(2, {1.2, 0.7, 0.8}, {0.9, 1.1, 1.3}, {0.5, 1.0, 1.05});
    Eigen::Matrix2d B;
    B << 1.0, 0.3, -0.4, 1.1;
    LmcModel lmc(2, B, {MaternParams{1, 0.5, 1}, MaternParams{1, 1.5, 2}});
    Eigen::Matrix2d R;
    R << 1.0, 0.6, 0.6, 1.0;
    SeparableModel sep(2, R, MaternParams{1, 1, 1});
    ConvolutionModel conv(2, MaternParams{1, 1, 1}, GaussianTransfer{1.0, 0.5});
    for (int k = 0; k < 60; ++k) {
        const double r = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
        require_psd(mm.spectral_matrix_radial(r));
        require_psd(lmc.spectral_matrix_radial(r));
        require_psd(sep.spectral_matrix_radial(r));
        require_psd(conv.spectral_matrix_radial(r));
    }
}

TEST_CASE("model JSON round trip") {
    auto mm = MultiMaternModel::bivariate(2, {1.0, 0.5, 1.0}, {2.0, 1.5, 0.7}, {0.5, 1.0, 1.2});
    const AnyModel m1 = mm;
    const AnyModel m2 = model_from_json(model_to_json(m1));
    REQUIRE(model_nvars(m2) == 2);
    for (double r : {0.0, 0.7, 3.0})
        REQUIRE(model_spectral_matrix_radial(m1, r).isApprox(model_spectral_matrix_radial(m2, r)));

    Eigen::Matrix2d B;
    B << 1.0, 0.0, 0.35, 1.0;
    const AnyModel l1 = LmcModel(2, B, {MaternParams{1, 0.5, 1}, MaternParams{1, 1.5, 2}});
    const AnyModel l2 = model_from_json(model_to_json(l1));
    REQUIRE(model_spectral_matrix_radial(l1, 1.1).isApprox(model_spectral_matrix_radial(l2, 1.1)));

    const AnyModel c1 = ConvolutionModel(2, MaternParams{1, 1, 1}, GaussianTransfer{0.9, 0.4});
    const AnyModel c2 = model_from_json(model_to_json(c1));
    REQUIRE(model_spectral_matrix_radial(c1, 0.6).isApprox(model_spectral_matrix_radial(c2, 0.6)));

    REQUIRE_THROWS_AS(model_from_json(nlohmann::json{{"kind", "bogus"}, {"dim", 2}}),
                      std::invalid_argument);
}
