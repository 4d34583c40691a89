// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "speccoh/grid.hpp"

using namespace speccoh;

TEST_CASE("fourier frequencies, 1-d n=4") {
    FrequencyGrid f(GridSpec({4}, {1.0}));
    REQUIRE(f.size() == 4);
    std::vector<double> got;
    for (std::int64_t k = 0; k < 4; ++k) got.push_back(f.frequency(k)[0]);
    const double pi = FrequencyGrid::two_pi() / 2.0;
    REQUIRE_THAT(got[0], Catch::Matchers::WithinAbs(-pi / 2.0, 1e-15));
    REQUIRE_THAT(got[1], Catch::Matchers::WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(got[2], Catch::Matchers::WithinAbs(pi / 2.0, 1e-15));
    REQUIRE_THAT(got[3], Catch::Matchers::WithinAbs(pi, 1e-15));
}

TEST_CASE("fourier frequencies, single point") {
    FrequencyGrid f(GridSpec({1}, {1.0}));
    REQUIRE(f.size() == 1);
    REQUIRE(f.frequency(0)[0] == 0.0);
    REQUIRE(f.zero_index() == 0);
}

TEST_CASE("fourier frequencies, 2x3 grid with anisotropic spacing") {
    FrequencyGrid f(GridSpec({2, 3}, {1.0, 2.0}));
    REQUIRE(f.size() == 6);
    // Axis 2 components are 2*pi*{-1,0,1}/6.
    std::set<double> ax2;
    for (std::int64_t k = 0; k < 6; ++k) ax2.insert(f.frequency(k)[1]);
    REQUIRE(ax2.size() == 3);
    const double unit = FrequencyGrid::two_pi() / 6.0;
    for (double expect : {-unit, 0.0, unit})
        REQUIRE(std::any_of(ax2.begin(), ax2.end(),
                            [&](double w) { return std::abs(w - expect) < 1e-15; }));
}

TEST_CASE("frequency lattice properties on random grids") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 3);
        std::vector<int> sizes(d);
        std::vector<double> spac(d);
        for (int ax = 0; ax < d; ++ax) {
            sizes[ax] = 1 + static_cast<int>(rng() % 7);
            spac[ax] = 0.25 + (rng() % 8) * 0.25;
        }
        FrequencyGrid f(GridSpec(sizes, spac));

        // Exactly N distinct frequency vectors, zero always present.
        std::set<std::vector<int>> idx;
        for (std::int64_t k = 0; k < f.size(); ++k) idx.insert(f.index(k));
        REQUIRE(static_cast<std::int64_t>(idx.size()) == f.size());
        REQUIRE(f.index(f.zero_index()) == std::vector<int>(d, 0));

        // Negation (mod the lattice periodicity) is a bijection of the set,
        // and an involution.
        for (std::int64_t k = 0; k < f.size(); ++k) {
            const std::int64_t nk = f.negation(k);
            REQUIRE(nk >= 0);
            REQUIRE(nk < f.size());
            REQUIRE(f.negation(nk) == k);
            const auto fi = f.index(k);
            const auto ni = f.index(nk);
            for (int ax = 0; ax < d; ++ax)
                REQUIRE((fi[ax] + ni[ax]) % sizes[ax] == 0);
        }

        // dft_bin is a permutation consistent with the index mod n.
        std::set<std::int64_t> bins;
        for (std::int64_t k = 0; k < f.size(); ++k) bins.insert(f.dft_bin(k));
        REQUIRE(static_cast<std::int64_t>(bins.size()) == f.size());
    }
}

TEST_CASE("grid spec validation") {
    REQUIRE_THROWS_AS(GridSpec({0}, {1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(GridSpec({4}, {0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(GridSpec({4, 4}, {1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(GridSpec({}, {}), std::invalid_argument);
}

TEST_CASE("site coordinates are index times spacing") {
    GridSpec g({3, 4}, {0.5, 2.0});
    REQUIRE(g.total_points() == 12);
    REQUIRE(g.cell_volume() == 1.0);
    const auto s = g.site(g.flat_index({2, 3}));
    REQUIRE_THAT(s[0], Catch::Matchers::WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(s[1], Catch::Matchers::WithinAbs(6.0, 1e-15));
}
