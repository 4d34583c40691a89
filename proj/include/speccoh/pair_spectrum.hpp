// SPDX-License-Identifier: Apache-2.0
//
// Two-variable spectra at one frequency: coherence, phase, gain, optimal
// prediction transfer.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace speccoh {

/// Spectral matrix restricted to one variable pair at one frequency:
/// marginal densities f11, f22 >= 0 and cross density f12.
struct PairSpectrum {
    double f11 = 0.0;
    double f22 = 0.0;
    std::complex<double> f12{0.0, 0.0};

    /// Squared coherence |f12|^2/(f11 f22); 0 where a marginal vanishes.
    double coherence2() const {
        if (f11 <= 0.0 || f22 <= 0.0) return 0.0;
        return std::norm(f12) / (f11 * f22);
    }

    double abs_coherence() const { return std::sqrt(coherence2()); }

    /// Signed coherency for real cross-spectra (sign of Re f12 carried).
    double signed_coherency() const {
        const double c = abs_coherence();
        return f12.real() < 0.0 ? -c : c;
    }

    /// Pair with the roles of the two variables exchanged.
    PairSpectrum swapped() const { return {f22, f11, std::conj(f12)}; }
};

struct PhaseGain {
    double gain = 0.0;   ///< |f12|/f11
    double phase = 0.0;  ///< arg(f12/f11) in (-pi, pi]
};

/// Gain and phase of variable 2 on variable 1, from A = f12/f11.
/// Phase is mapped to (-pi, pi]; requires f11 > 0.
inline PhaseGain pair_phase_gain(const PairSpectrum& ps) {
    if (!(ps.f11 > 0.0)) throw std::domain_error("pair_phase_gain: f11 must be > 0 (gain undefined)");
    const std::complex<double> a = ps.f12 / ps.f11;
    double ph = std::arg(a);  // std::arg already yields (-pi, pi]
    if (ph == -M_PI) ph = M_PI;
    return {std::abs(a), ph};
}

/// Frequency response f12/f22 of the kernel minimizing the mean squared
/// error when predicting variable 1 from variable 2.
inline std::complex<double> optimal_transfer(const PairSpectrum& ps) {
    if (!(ps.f22 > 0.0)) throw std::domain_error("optimal_transfer: f22 must be > 0");
    return ps.f12 / ps.f22;
}

/// Spectral density of that optimal predictor: f_{1|2} = |f12|^2/f22,
/// which equals f11 * coherence2().
inline double conditional_sdf(const PairSpectrum& ps) {
    if (!(ps.f22 > 0.0)) throw std::domain_error("conditional_sdf: f22 must be > 0");
    return std::norm(ps.f12) / ps.f22;
}

/// Pair spectrum of a process and its kernel-smoothed image: base density f1
/// and a real transfer function value fK give (f1, f1 fK^2, f1 fK).  The
/// absolute coherence is 1 wherever fK != 0.
inline PairSpectrum convolution_pair_spectra(double transfer, double base_sdf) {
    if (base_sdf < 0.0) throw std::invalid_argument("convolution_pair_spectra: base density must be >= 0");
    return {base_sdf, base_sdf * transfer * transfer, base_sdf * transfer};
}

/// Pair spectrum of two kernel-convolution processes driven by a common base:
/// transfers g1, g2 against base density f give (f g1^2, f g2^2, f g1 g2).
inline PairSpectrum common_base_pair_spectra(double transfer1, double transfer2, double base_sdf) {
    if (base_sdf < 0.0) throw std::invalid_argument("common_base_pair_spectra: base density must be >= 0");
    return {base_sdf * transfer1 * transfer1, base_sdf * transfer2 * transfer2,
            base_sdf * transfer1 * transfer2};
}

}  // namespace speccoh
