// SPDX-License-Identifier: Apache-2.0
//
// Thin d-dimensional complex FFT on top of FFTW, with a mutex-guarded plan
// cache (FFTW planning is not thread-safe; execution on distinct arrays is).

#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace speccoh::fft {

namespace detail {

struct PlanCache {
    std::mutex mtx;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

    fftw_plan get(const std::vector<int>& dims, int sign) {
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_pair(dims, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        std::size_t n = 1;
        for (int d : dims) n *= static_cast<std::size_t>(d);
        std::vector<std::complex<double>> scratch(n);
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        // FFTW_UNALIGNED so the plan can execute on any caller buffer.
        fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), p, p, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw_plan_dft failed");
        plans.emplace(std::move(key), plan);
        return plan;
    }
};

inline PlanCache& cache() {
    static PlanCache c;
    return c;
}

inline void execute(const std::vector<int>& dims, std::complex<double>* data, int sign) {
    fftw_plan plan = cache().get(dims, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

}  // namespace detail

/// In-place forward DFT, sum_j x_j exp(-i 2 pi j k / n) per axis (unnormalized).
inline void forward(const std::vector<int>& dims, std::complex<double>* data) {
    detail::execute(dims, data, FFTW_FORWARD);
}

/// In-place inverse DFT (unnormalized; scale by 1/N to invert forward()).
inline void inverse(const std::vector<int>& dims, std::complex<double>* data) {
    detail::execute(dims, data, FFTW_BACKWARD);
}

}  // namespace speccoh::fft
