// SPDX-License-Identifier: Apache-2.0
//
// Derivative-free Nelder-Mead simplex minimizer.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace speccoh {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    int max_iters = 2000;
    double tol = 1e-8;          ///< convergence on the objective spread
    double initial_step = 0.25;  ///< relative simplex edge around the start
};

/// Minimize f over R^n from x0.  Converged means both the objective spread
/// and the simplex diameter fell below tol.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, NelderMeadOptions opt = {}) {
    const int n = static_cast<int>(x0.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<std::vector<double>> x(n + 1, x0);
    for (int i = 0; i < n; ++i) {
        const double step = x0[i] != 0.0 ? opt.initial_step * std::abs(x0[i]) : opt.initial_step;
        x[i + 1][i] += step;
    }
    std::vector<double> fx(n + 1);
    for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

    auto order = [&] {
        std::vector<int> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> x2(n + 1);
        std::vector<double> f2(n + 1);
        for (int k = 0; k <= n; ++k) {
            x2[k] = x[idx[k]];
            f2[k] = fx[idx[k]];
        }
        x.swap(x2);
        fx.swap(f2);
    };
    auto diameter = [&] {
        double dm = 0.0;
        for (int k = 1; k <= n; ++k)
            for (int i = 0; i < n; ++i) dm = std::max(dm, std::abs(x[k][i] - x[0][i]));
        return dm;
    };

    NelderMeadResult res;
    int it = 0;
    for (; it < opt.max_iters; ++it) {
        order();
        if (std::abs(fx[n] - fx[0]) <= opt.tol && diameter() <= opt.tol) break;

        std::vector<double> c(n, 0.0);  // centroid of all but the worst
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) c[i] += x[k][i] / n;

        auto along = [&](double t) {
            std::vector<double> p(n);
            for (int i = 0; i < n; ++i) p[i] = c[i] + t * (c[i] - x[n][i]);
            return p;
        };

        const std::vector<double> xr = along(alpha);
        const double fr = f(xr);
        if (fr < fx[0]) {
            const std::vector<double> xe = along(gamma);
            const double fe = f(xe);
            if (fe < fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            const bool outside = fr < fx[n];
            const std::vector<double> xc = outside ? along(rho) : along(-rho);
            const double fc = f(xc);
            if (fc < (outside ? fr : fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (int k = 1; k <= n; ++k) {
                    for (int i = 0; i < n; ++i) x[k][i] = x[0][i] + sigma * (x[k][i] - x[0][i]);
                    fx[k] = f(x[k]);
                }
            }
        }
    }
    order();
    res.x = x[0];
    res.value = fx[0];
    res.iterations = it;
    res.converged = std::abs(fx[n] - fx[0]) <= opt.tol && diameter() <= opt.tol;
    return res;
}

}  // namespace speccoh
