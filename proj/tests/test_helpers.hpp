// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities: random fields, a brute-force DFT periodogram oracle
// (kept independent of the FFT path it checks), and adaptive quadrature.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "speccoh/field.hpp"
#include "speccoh/grid.hpp"
#include "speccoh/periodogram.hpp"

namespace testutil {

inline speccoh::MultiField random_field(const speccoh::GridSpec& g, int nvars, int nreps, bool real,
                                        unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n01;
    speccoh::MultiField f(g, nvars, nreps, real);
    for (auto& z : f.values()) z = real ? std::complex<double>(n01(rng), 0.0)
                                        : std::complex<double>(n01(rng), n01(rng));
    return f;
}

/// O(N^2) direct evaluation of the periodogram definition:
/// I_kl(w) = delta/((2 pi)^d N) (sum_s Z_k(s) e^{-i s.w}) conj(sum_s Z_l(s) e^{-i s.w}).
inline speccoh::SpectralMatrixField direct_periodogram(const speccoh::MultiField& field, int rep) {
    const auto& g = field.grid();
    const std::int64_t n = g.total_points();
    const int p = field.nvars();
    speccoh::FrequencyGrid freqs(g);
    speccoh::SpectralMatrixField out(freqs, p, false, rep);
    const double scale =
        g.cell_volume() / (std::pow(speccoh::FrequencyGrid::two_pi(), g.dims()) * static_cast<double>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        const auto w = freqs.frequency(k);
        std::vector<std::complex<double>> s(p, 0.0);
        for (std::int64_t site = 0; site < n; ++site) {
            const auto x = g.site(site);
            double dot = 0.0;
            for (int ax = 0; ax < g.dims(); ++ax) dot += x[ax] * w[ax];
            const std::complex<double> ph(std::cos(-dot), std::sin(-dot));
            for (int v = 0; v < p; ++v) s[v] += field.value(rep, v, site) * ph;
        }
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i) out.entry(k, i, j) = scale * s[i] * std::conj(s[j]);
    }
    return out;
}

/// Adaptive Simpson quadrature on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 24) {
    const auto simpson = [&](double lo, double hi) {
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
    };
    std::function<double(double, double, double, double, int)> rec =
        [&](double lo, double hi, double whole, double eps, int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double left = simpson(lo, mid);
        const double right = simpson(mid, hi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, left, eps / 2.0, d - 1) + rec(mid, hi, right, eps / 2.0, d - 1);
    };
    return rec(a, b, simpson(a, b), tol, depth);
}

}  // namespace testutil
