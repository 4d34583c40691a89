// SPDX-License-Identifier: Apache-2.0
//
// Kernel smoothing of matrix-valued periodograms over the frequency lattice.

#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "speccoh/periodogram.hpp"

namespace speccoh {

/// Odd-sized d-dimensional stencil of nonnegative weights summing to 1.
/// The frequency lattice is periodic, so the default boundary wraps; the
/// truncate-renormalize variant drops out-of-range taps and rescales.
struct SmoothingKernel {
    enum class Boundary { periodic, truncate_renormalize };

    std::vector<int> shape;       ///< per-axis extents, all odd
    std::vector<double> weights;  ///< row-major over shape
    Boundary boundary = Boundary::periodic;

    void validate() const {
        if (shape.empty()) throw std::invalid_argument("SmoothingKernel: empty shape");
        std::size_t n = 1;
        for (int s : shape) {
            if (s < 1 || s % 2 == 0) throw std::invalid_argument("SmoothingKernel: extents must be odd");
            n *= static_cast<std::size_t>(s);
        }
        if (weights.size() != n) throw std::invalid_argument("SmoothingKernel: weight count mismatch");
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("SmoothingKernel: weights must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("SmoothingKernel: weights must sum to 1");
    }

    /// Constant box of side 3 in d dimensions (weight 3^-d per tap).
    static SmoothingKernel box3(int dims) {
        SmoothingKernel k;
        k.shape.assign(dims, 3);
        std::size_t n = 1;
        for (int i = 0; i < dims; ++i) n *= 3;
        k.weights.assign(n, 1.0 / static_cast<double>(n));
        return k;
    }

    /// Identity stencil (single unit tap).
    static SmoothingKernel delta(int dims) {
        SmoothingKernel k;
        k.shape.assign(dims, 1);
        k.weights = {1.0};
        return k;
    }
};

/// Entrywise stencil convolution of a periodogram over the frequency
/// lattice.  Preserves Hermitian structure; with convex weights the smoothed
/// squared coherence stays within [0, 1].  Composing smooths is allowed.
inline SpectralMatrixField smooth(const SpectralMatrixField& pg, const SmoothingKernel& kernel) {
    kernel.validate();
    const GridSpec& g = pg.freqs().grid();
    const int d = g.dims();
    if (static_cast<int>(kernel.shape.size()) != d)
        throw std::invalid_argument("smooth: kernel dimensionality does not match the grid");
    for (int ax = 0; ax < d; ++ax)
        if (kernel.shape[ax] > g.size(ax))
            throw std::invalid_argument("smooth: stencil larger than the frequency grid");

    const int p = pg.nvars();
    const std::int64_t n = pg.size();
    SpectralMatrixField out(pg.freqs(), p, /*smoothed=*/true, pg.rep());

    const std::size_t ntaps = kernel.weights.size();
    std::vector<std::vector<int>> tap_off(ntaps, std::vector<int>(d));
    for (std::size_t t = 0; t < ntaps; ++t) {
        std::size_t rem = t;
        for (int ax = d - 1; ax >= 0; --ax) {
            tap_off[t][ax] = static_cast<int>(rem % kernel.shape[ax]) - kernel.shape[ax] / 2;
            rem /= kernel.shape[ax];
        }
    }

    std::vector<int> pos(d);
    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t rem = k;
        for (int ax = d - 1; ax >= 0; --ax) {
            pos[ax] = static_cast<int>(rem % g.size(ax));
            rem /= g.size(ax);
        }
        double wsum = 0.0;
        std::vector<std::complex<double>> acc(static_cast<std::size_t>(p) * p, 0.0);
        for (std::size_t t = 0; t < ntaps; ++t) {
            const double w = kernel.weights[t];
            if (w == 0.0) continue;
            std::int64_t src = 0;
            bool in_range = true;
            for (int ax = 0; ax < d; ++ax) {
                int q = pos[ax] + tap_off[t][ax];
                if (kernel.boundary == SmoothingKernel::Boundary::periodic) {
                    q = (q % g.size(ax) + g.size(ax)) % g.size(ax);
                } else if (q < 0 || q >= g.size(ax)) {
                    in_range = false;
                    break;
                }
                src = src * g.size(ax) + q;
            }
            if (!in_range) continue;
            wsum += w;
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < p; ++i)
                    acc[static_cast<std::size_t>(j) * p + i] += w * pg.entry(src, i, j);
        }
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i)
                out.entry(k, i, j) = acc[static_cast<std::size_t>(j) * p + i] / wsum;
    }

    // Smoothing of Hermitian inputs keeps diagonals real; scrub rounding dust.
    for (std::int64_t k = 0; k < n; ++k)
        for (int i = 0; i < p; ++i) {
            const double re = out.entry(k, i, i).real();
            out.entry(k, i, i) = {re < 0.0 ? 0.0 : re, 0.0};
        }
    return out;
}

}  // namespace speccoh
