// SPDX-License-Identifier: Apache-2.0
//
// Matrix-valued periodogram over the Fourier-frequency lattice.

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "speccoh/fft.hpp"
#include "speccoh/field.hpp"
#include "speccoh/grid.hpp"
#include "speccoh/pair_spectrum.hpp"

namespace speccoh {

constexpr int kAveragedRep = -1;

/// p x p Hermitian spectral matrix attached to every lattice frequency.
/// Matrices are stored frequency-major, column-major within each matrix.
class SpectralMatrixField {
public:
    SpectralMatrixField(FrequencyGrid freqs, int nvars, bool smoothed, int rep)
        : freqs_(std::move(freqs)), nvars_(nvars), smoothed_(smoothed), rep_(rep),
          data_(static_cast<std::size_t>(freqs_.size()) * nvars * nvars) {}

    const FrequencyGrid& freqs() const { return freqs_; }
    int nvars() const { return nvars_; }
    bool smoothed() const { return smoothed_; }
    void set_smoothed(bool s) { smoothed_ = s; }
    int rep() const { return rep_; }  ///< replicate id, or kAveragedRep
    std::int64_t size() const { return freqs_.size(); }

    std::complex<double>& entry(std::int64_t freq, int i, int j) {
        return data_[(static_cast<std::size_t>(freq) * nvars_ + j) * nvars_ + i];
    }
    const std::complex<double>& entry(std::int64_t freq, int i, int j) const {
        return data_[(static_cast<std::size_t>(freq) * nvars_ + j) * nvars_ + i];
    }

    Eigen::Map<const Eigen::MatrixXcd> matrix(std::int64_t freq) const {
        return {data_.data() + static_cast<std::size_t>(freq) * nvars_ * nvars_, nvars_, nvars_};
    }

    PairSpectrum pair(std::int64_t freq, int i, int j) const {
        return {entry(freq, i, i).real(), entry(freq, j, j).real(), entry(freq, i, j)};
    }

    std::vector<std::complex<double>>& data() { return data_; }
    const std::vector<std::complex<double>>& data() const { return data_; }

private:
    FrequencyGrid freqs_;
    int nvars_;
    bool smoothed_;
    int rep_;
    std::vector<std::complex<double>> data_;
};

/// Raw periodogram matrix of one replicate:
///   I_kl(w) = delta/((2 pi)^d N) S_k(w) conj(S_l(w)),
///   S_k(w)  = sum_sites Z_k(s) exp(-i s . w),
/// at every lattice frequency, computed with one FFT per variable.  The
/// result is Hermitian and rank one at each frequency.
inline SpectralMatrixField periodogram(const MultiField& field, int rep) {
    if (rep < 0 || rep >= field.nreps()) throw std::invalid_argument("periodogram: replicate out of range");
    const GridSpec& g = field.grid();
    const std::int64_t n = g.total_points();
    const int p = field.nvars();
    FrequencyGrid freqs(g);

    // DFT of every variable, then reorder raw bins into lattice order.
    std::vector<std::vector<std::complex<double>>> dft(p);
    std::vector<std::complex<double>> work(n);
    for (int v = 0; v < p; ++v) {
        const auto* src = field.slice(rep, v);
        std::copy(src, src + n, work.begin());
        fft::forward(g.sizes(), work.data());
        dft[v].resize(n);
        for (std::int64_t k = 0; k < n; ++k) dft[v][k] = work[freqs.dft_bin(k)];
    }

    const double scale = g.cell_volume() /
                         (std::pow(FrequencyGrid::two_pi(), g.dims()) * static_cast<double>(n));
    SpectralMatrixField out(std::move(freqs), p, /*smoothed=*/false, rep);
    for (std::int64_t k = 0; k < n; ++k)
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i)
                out.entry(k, i, j) = scale * dft[i][k] * std::conj(dft[j][k]);
    return out;
}

/// Lattice measure (2 pi)^d/(delta N): with this weight the periodogram
/// diagonal sums to the mean squared field value (discrete Parseval).
inline double frequency_cell_volume(const GridSpec& g) {
    return std::pow(FrequencyGrid::two_pi(), g.dims()) /
           (g.cell_volume() * static_cast<double>(g.total_points()));
}

}  // namespace speccoh
