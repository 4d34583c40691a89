// SPDX-License-Identifier: Apache-2.0
//
// Replicate-dimension preprocessing: standardized anomalies and
// Nadaraya-Watson detrending.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "speccoh/field.hpp"

namespace speccoh {

/// Per grid cell and variable: subtract the across-replicate mean and divide
/// by the across-replicate standard deviation (denominator R - 1).  Cells
/// with zero variance across replicates are an error.
inline MultiField standardize_anomalies(const MultiField& f) {
    if (f.nreps() < 2) throw std::invalid_argument("standardize_anomalies: need at least 2 replicates");
    MultiField out(f.grid(), f.nvars(), f.nreps(), f.real_valued());
    const std::int64_t n = f.npoints();
    const int R = f.nreps();
    for (int v = 0; v < f.nvars(); ++v) {
        for (std::int64_t s = 0; s < n; ++s) {
            std::complex<double> mean = 0.0;
            for (int r = 0; r < R; ++r) mean += f.value(r, v, s);
            mean /= static_cast<double>(R);
            double ss = 0.0;
            for (int r = 0; r < R; ++r) ss += std::norm(f.value(r, v, s) - mean);
            const double sd = std::sqrt(ss / (R - 1));
            if (!(sd > 0.0))
                throw std::domain_error("standardize_anomalies: zero temporal variance at a cell");
            for (int r = 0; r < R; ++r) out.value(r, v, s) = (f.value(r, v, s) - mean) / sd;
        }
    }
    return out;
}

/// Anomalies against a Gaussian-kernel Nadaraya-Watson running mean over the
/// replicate index:
///   anomaly(r) = value(r) - sum_e w_e(r) value(e) / sum_e w_e(r),
///   w_e(r) = exp(-(r - e)^2 / (2 bw^2)).
inline MultiField nw_detrend(const MultiField& f, double bandwidth) {
    if (f.nreps() < 2) throw std::invalid_argument("nw_detrend: need at least 2 replicates");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("nw_detrend: bandwidth must be > 0");
    const int R = f.nreps();
    std::vector<std::vector<double>> w(R, std::vector<double>(R));
    for (int r = 0; r < R; ++r) {
        double sum = 0.0;
        for (int e = 0; e < R; ++e) {
            const double u = (r - e) / bandwidth;
            w[r][e] = std::exp(-0.5 * u * u);
            sum += w[r][e];
        }
        for (int e = 0; e < R; ++e) w[r][e] /= sum;
    }
    MultiField out(f.grid(), f.nvars(), R, f.real_valued());
    const std::int64_t n = f.npoints();
    for (int v = 0; v < f.nvars(); ++v)
        for (std::int64_t s = 0; s < n; ++s)
            for (int r = 0; r < R; ++r) {
                std::complex<double> m = 0.0;
                for (int e = 0; e < R; ++e) m += w[r][e] * f.value(e, v, s);
                out.value(r, v, s) = f.value(r, v, s) - m;
            }
    return out;
}

}  // namespace speccoh
