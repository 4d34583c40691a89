// SPDX-License-Identifier: Apache-2.0
//
// Coherence, phase and gain estimators from smoothed periodograms.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "speccoh/field.hpp"
#include "speccoh/pair_spectrum.hpp"
#include "speccoh/periodogram.hpp"
#include "speccoh/smoothing.hpp"

namespace speccoh {

/// Per-frequency squared coherence, absolute coherence, phase and gain for
/// one variable pair, in frequency-lattice order.
struct CoherenceSummary {
    FrequencyGrid freqs;
    int var_i = 0;
    int var_j = 0;
    int nreps = 1;
    std::vector<double> coh2;
    std::vector<double> abs_coh;
    std::vector<double> phase;
    std::vector<double> gain;
    std::vector<std::uint8_t> zero_power;  ///< set where a diagonal entry vanished

    explicit CoherenceSummary(FrequencyGrid f)
        : freqs(std::move(f)), coh2(freqs.size()), abs_coh(freqs.size()), phase(freqs.size()),
          gain(freqs.size()), zero_power(freqs.size(), 0) {}
};

/// Coherence of pair (i, j) from a smoothed periodogram.  Raw periodograms
/// are rejected: their rank-1 structure makes the estimate identically 1.
/// Frequencies with zero smoothed power get coherence 0 and a flag.
inline CoherenceSummary coherence(const SpectralMatrixField& pg, int i, int j) {
    if (!pg.smoothed())
        throw std::invalid_argument("coherence: periodogram must be smoothed first "
                                    "(the raw estimate is identically 1)");
    if (i < 0 || j < 0 || i >= pg.nvars() || j >= pg.nvars())
        throw std::invalid_argument("coherence: variable index out of range");
    CoherenceSummary out(pg.freqs());
    out.var_i = i;
    out.var_j = j;
    for (std::int64_t k = 0; k < pg.size(); ++k) {
        const PairSpectrum ps = pg.pair(k, i, j);
        if (ps.f11 <= 0.0 || ps.f22 <= 0.0) {
            out.zero_power[k] = 1;
            out.coh2[k] = out.abs_coh[k] = out.phase[k] = out.gain[k] = 0.0;
            continue;
        }
        out.coh2[k] = ps.coherence2();
        out.abs_coh[k] = std::sqrt(out.coh2[k]);
        const PhaseGain pgn = pair_phase_gain(ps);
        out.phase[k] = pgn.phase;
        out.gain[k] = pgn.gain;
    }
    return out;
}

/// Replicate pairing for cross-periodograms: element (r_i, r_j) pairs
/// replicate r_i of the first variable with replicate r_j of the second.
/// lag_pairing(R, L) builds the alignment (r, r - L) for r = L..R-1.
using ReplicatePairing = std::vector<std::pair<int, int>>;

inline ReplicatePairing lag_pairing(int nreps, int lag) {
    if (lag < 0 || lag >= nreps) throw std::invalid_argument("lag_pairing: need 0 <= lag < nreps");
    ReplicatePairing p;
    for (int r = lag; r < nreps; ++r) p.emplace_back(r, r - lag);
    return p;
}

struct ReplicateCoherenceOptions {
    /// Default: average each pairing's squared coherence pointwise.  The
    /// alternative averages the smoothed spectra first and takes one quotient.
    bool average_spectra_first = false;
};

/// Replicate-averaged coherence of pair (i, j).  Each pairing's smoothed
/// cross- and marginal periodograms give a squared coherence; those are
/// averaged pointwise in frequency.  Phase and gain always come from the
/// across-pairing average of the smoothed spectra.
inline CoherenceSummary replicate_coherence(const MultiField& field, const ReplicatePairing& pairing,
                                            int i, int j, const SmoothingKernel& kernel,
                                            ReplicateCoherenceOptions opts = {}) {
    if (pairing.empty()) throw std::invalid_argument("replicate_coherence: empty pairing");
    if (i < 0 || j < 0 || i >= field.nvars() || j >= field.nvars())
        throw std::invalid_argument("replicate_coherence: variable index out of range");
    for (auto [ri, rj] : pairing)
        if (ri < 0 || rj < 0 || ri >= field.nreps() || rj >= field.nreps())
            throw std::invalid_argument("replicate_coherence: pairing replicate out of range");

    const GridSpec& g = field.grid();
    const std::int64_t n = g.total_points();
    FrequencyGrid freqs(g);
    const double scale = g.cell_volume() /
                         (std::pow(FrequencyGrid::two_pi(), g.dims()) * static_cast<double>(n));

    // Cache single-variable DFTs per replicate actually used.
    std::vector<std::vector<std::complex<double>>> dft_i(field.nreps()), dft_j(field.nreps());
    auto var_dft = [&](int rep, int var, std::vector<std::vector<std::complex<double>>>& cache)
        -> const std::vector<std::complex<double>>& {
        auto& slot = cache[rep];
        if (slot.empty()) {
            slot.assign(field.slice(rep, var), field.slice(rep, var) + n);
            fft::forward(g.sizes(), slot.data());
            std::vector<std::complex<double>> ordered(n);
            for (std::int64_t k = 0; k < n; ++k) ordered[k] = slot[freqs.dft_bin(k)];
            slot = std::move(ordered);
        }
        return slot;
    };

    std::vector<double> coh2_sum(n, 0.0);
    std::vector<double> f11_sum(n, 0.0), f22_sum(n, 0.0);
    std::vector<std::complex<double>> f12_sum(n, 0.0);

    SpectralMatrixField pair_pg(freqs, 2, /*smoothed=*/false, kAveragedRep);
    for (auto [ri, rj] : pairing) {
        const auto& si = var_dft(ri, i, dft_i);
        const auto& sj = var_dft(rj, j, dft_j);
        for (std::int64_t k = 0; k < n; ++k) {
            pair_pg.entry(k, 0, 0) = scale * std::norm(si[k]);
            pair_pg.entry(k, 1, 1) = scale * std::norm(sj[k]);
            pair_pg.entry(k, 0, 1) = scale * si[k] * std::conj(sj[k]);
            pair_pg.entry(k, 1, 0) = std::conj(pair_pg.entry(k, 0, 1));
        }
        const SpectralMatrixField sm = smooth(pair_pg, kernel);
        for (std::int64_t k = 0; k < n; ++k) {
            const PairSpectrum ps = sm.pair(k, 0, 1);
            coh2_sum[k] += ps.coherence2();
            f11_sum[k] += ps.f11;
            f22_sum[k] += ps.f22;
            f12_sum[k] += ps.f12;
        }
    }

    const double npair = static_cast<double>(pairing.size());
    CoherenceSummary out(freqs);
    out.var_i = i;
    out.var_j = j;
    out.nreps = static_cast<int>(pairing.size());
    for (std::int64_t k = 0; k < n; ++k) {
        const PairSpectrum avg{f11_sum[k] / npair, f22_sum[k] / npair, f12_sum[k] / npair};
        if (avg.f11 <= 0.0 || avg.f22 <= 0.0) {
            out.zero_power[k] = 1;
            continue;
        }
        out.coh2[k] = opts.average_spectra_first ? avg.coherence2() : coh2_sum[k] / npair;
        out.abs_coh[k] = std::sqrt(out.coh2[k]);
        const PhaseGain pgn = pair_phase_gain(avg);
        out.phase[k] = pgn.phase;
        out.gain[k] = pgn.gain;
    }
    return out;
}

/// CSV emission: header `w1,...,wd,coh2,abs_coh,phase,gain`, one row per
/// lattice frequency in lattice order.
inline void write_coherence_csv(const CoherenceSummary& s, std::ostream& os) {
    const int d = s.freqs.dims();
    for (int ax = 0; ax < d; ++ax) os << "w" << (ax + 1) << ",";
    os << "coh2,abs_coh,phase,gain\n";
    os.precision(17);
    for (std::int64_t k = 0; k < s.freqs.size(); ++k) {
        const auto w = s.freqs.frequency(k);
        for (int ax = 0; ax < d; ++ax) os << w[ax] << ",";
        os << s.coh2[k] << "," << s.abs_coh[k] << "," << s.phase[k] << "," << s.gain[k] << "\n";
    }
}

inline void write_coherence_csv(const CoherenceSummary& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_coherence_csv(s, os);
}

}  // namespace speccoh
