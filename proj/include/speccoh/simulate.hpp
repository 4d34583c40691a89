// SPDX-License-Identifier: Apache-2.0
//
// Gaussian random field simulation: dense factorization for small problems,
// periodic (circulant) embedding for gridded stationary models, and the
// spectral route for convolution pairs.  Plus the 3x3 low/high-pass
// filtering experiment.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "speccoh/fft.hpp"
#include "speccoh/field.hpp"
#include "speccoh/grid.hpp"
#include "speccoh/models.hpp"
#include "speccoh/parallel.hpp"
#include "speccoh/rng.hpp"

namespace speccoh {

enum class SimMethod { dense, circulant };

/// Simulation request.  The dense method factorizes the full (N p) x (N p)
/// covariance and is capped at N p <= 8192; the circulant method embeds the
/// covariance in a periodic grid, doubling the expansion factor (2x, 4x, 8x
/// per axis) until the embedded spectra are nonnegative.
struct SimRequest {
    AnyModel model;
    GridSpec grid;
    int reps = 1;
    std::uint64_t seed = 0;
    SimMethod method = SimMethod::circulant;
};

struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& m) : std::runtime_error(m) {}
};

namespace detail {

// Dense route: assemble per-lag covariance blocks (memoized over the lag
// offsets, which is what makes N ~ thousands feasible), factorize, multiply.
inline MultiField simulate_dense(const SimRequest& req) {
    const GridSpec& g = req.grid;
    const int p = model_nvars(req.model);
    const int d = g.dims();
    const std::int64_t n = g.total_points();
    const std::int64_t dim = n * p;
    if (dim > 8192)
        throw std::invalid_argument("simulate: dense method requires N*p <= 8192; use circulant");

    // Lag table over offsets in [-(n_ax-1), n_ax-1] per axis.
    std::vector<int> lag_sizes(d);
    std::int64_t nlags = 1;
    for (int ax = 0; ax < d; ++ax) {
        lag_sizes[ax] = 2 * g.size(ax) - 1;
        nlags *= lag_sizes[ax];
    }
    std::vector<Eigen::MatrixXd> lag_cov(nlags);
    for (std::int64_t l = 0; l < nlags; ++l) {
        std::int64_t rem = l;
        double d2 = 0.0;
        for (int ax = d - 1; ax >= 0; --ax) {
            const int off = static_cast<int>(rem % lag_sizes[ax]) - (g.size(ax) - 1);
            rem /= lag_sizes[ax];
            const double x = off * g.spacing(ax);
            d2 += x * x;
        }
        lag_cov[l] = model_cov_matrix_radial(req.model, std::sqrt(d2));
    }
    auto lag_flat = [&](std::int64_t s1, std::int64_t s2) {
        std::int64_t l = 0;
        for (int ax = d - 1; ax >= 0; --ax) {
            const int i1 = static_cast<int>(s1 % g.size(ax));
            const int i2 = static_cast<int>(s2 % g.size(ax));
            s1 /= g.size(ax);
            s2 /= g.size(ax);
            l += (i1 - i2 + g.size(ax) - 1) * [&] {
                std::int64_t stride = 1;
                for (int bx = ax + 1; bx < d; ++bx) stride *= lag_sizes[bx];
                return stride;
            }();
        }
        return l;
    };

    Eigen::MatrixXd sigma(dim, dim);
    for (std::int64_t s2 = 0; s2 < n; ++s2)
        for (std::int64_t s1 = 0; s1 < n; ++s1) {
            const Eigen::MatrixXd& blk = lag_cov[lag_flat(s1, s2)];
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < p; ++i)
                    sigma(static_cast<Eigen::Index>(i) * n + s1, static_cast<Eigen::Index>(j) * n + s2) =
                        blk(i, j);
        }

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        // One jitter pass for near-singular covariances, then give up.
        const double jitter = 1e-10 * sigma.trace() / static_cast<double>(dim);
        sigma.diagonal().array() += jitter;
        llt.compute(sigma);
        if (llt.info() != Eigen::Success)
            throw SimulationError("simulate: covariance factorization failed even with jitter");
    }
    const Eigen::MatrixXd L = llt.matrixL();

    MultiField out(g, p, req.reps, /*real=*/true);
    parallel_for(req.reps, [&](int rep) {
        RandomStream rng(req.seed, static_cast<std::uint64_t>(rep));
        Eigen::VectorXd eps(dim);
        for (std::int64_t k = 0; k < dim; ++k) eps[k] = rng.normal();
        const Eigen::VectorXd z = L * eps;
        for (int v = 0; v < p; ++v)
            for (std::int64_t s = 0; s < n; ++s)
                out.value(rep, v, s) = z[static_cast<Eigen::Index>(v) * n + s];
    });
    return out;
}

/// Frequency-domain mixing factors of a periodic embedding: the matrix
/// square roots of the embedded spectral matrices, or nothing if any of them
/// fails nonnegativity beyond rounding.
struct Embedding {
    std::vector<int> sizes;              // embedding grid (factor * n per axis)
    std::vector<Eigen::MatrixXd> mix;    // sqrt of embedded spectrum per torus frequency
    std::int64_t total = 0;
};

inline bool build_embedding(const AnyModel& model, const GridSpec& g, int factor, Embedding& out) {
    const int d = g.dims();
    const int p = model_nvars(model);
    std::vector<int> m(d);
    std::int64_t M = 1;
    for (int ax = 0; ax < d; ++ax) {
        m[ax] = factor * g.size(ax);
        M *= m[ax];
    }

    // Covariance on the torus, minimal-image lags.
    std::vector<std::vector<std::complex<double>>> lam(static_cast<std::size_t>(p) * p,
                                                      std::vector<std::complex<double>>(M));
    for (std::int64_t k = 0; k < M; ++k) {
        std::int64_t rem = k;
        double d2 = 0.0;
        for (int ax = d - 1; ax >= 0; --ax) {
            const int i = static_cast<int>(rem % m[ax]);
            rem /= m[ax];
            const int wrapped = std::min(i, m[ax] - i);
            const double x = wrapped * g.spacing(ax);
            d2 += x * x;
        }
        const Eigen::MatrixXd c = model_cov_matrix_radial(model, std::sqrt(d2));
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i) lam[static_cast<std::size_t>(j) * p + i][k] = c(i, j);
    }
    for (auto& v : lam) fft::forward(m, v.data());

    double max_diag = 0.0;
    for (int i = 0; i < p; ++i)
        for (std::int64_t k = 0; k < M; ++k)
            max_diag = std::max(max_diag, lam[static_cast<std::size_t>(i) * p + i][k].real());
    const double tol = 1e-9 * max_diag;

    out.sizes = m;
    out.total = M;
    out.mix.assign(M, Eigen::MatrixXd(p, p));
    Eigen::MatrixXd spec(p, p);
    for (std::int64_t k = 0; k < M; ++k) {
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i) spec(i, j) = lam[static_cast<std::size_t>(j) * p + i][k].real();
        spec = 0.5 * (spec + spec.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec);
        if (es.eigenvalues().minCoeff() < -tol) return false;
        const Eigen::VectorXd lams = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        out.mix[k] = es.eigenvectors() * lams.asDiagonal() * es.eigenvectors().transpose();
    }
    return true;
}

inline MultiField simulate_circulant(const SimRequest& req) {
    const GridSpec& g = req.grid;
    const int p = model_nvars(req.model);
    const int d = g.dims();

    Embedding emb;
    bool ok = false;
    for (int factor : {2, 4, 8}) {
        if (build_embedding(req.model, g, factor, emb)) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        if (g.total_points() * p <= 8192) {
            SimRequest fallback = req;
            fallback.method = SimMethod::dense;
            return simulate_dense(fallback);
        }
        throw SimulationError("simulate: circulant embedding not nonnegative after 8x expansion "
                              "and problem too large for the dense fallback");
    }

    const std::int64_t M = emb.total;
    MultiField out(g, p, req.reps, /*real=*/true);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(M));

    parallel_for(req.reps, [&](int rep) {
        RandomStream rng(req.seed, static_cast<std::uint64_t>(rep));
        // Complex standard normals per (torus frequency, variable), mixed by
        // the spectral square root; draw order is frequency-major.
        std::vector<std::vector<std::complex<double>>> w(p, std::vector<std::complex<double>>(M));
        Eigen::VectorXcd eps(p), mixed(p);
        const double inv_sqrt2 = 0.70710678118654752440;
        for (std::int64_t k = 0; k < M; ++k) {
            for (int v = 0; v < p; ++v) {
                const double re = rng.normal();
                const double im = rng.normal();
                eps[v] = std::complex<double>(re, im) * inv_sqrt2;
            }
            mixed.noalias() = emb.mix[k].cast<std::complex<double>>() * eps;
            for (int v = 0; v < p; ++v) w[v][k] = mixed[v];
        }
        // Z_v = sqrt(2) Re(IDFT(w_v))/sqrt(M), restricted to the observation window.
        for (int v = 0; v < p; ++v) {
            fft::inverse(emb.sizes, w[v].data());
            for (std::int64_t s = 0; s < g.total_points(); ++s) {
                std::int64_t rem = s, src = 0;
                for (int ax = d - 1; ax >= 0; --ax) {
                    const int i = static_cast<int>(rem % g.size(ax));
                    rem /= g.size(ax);
                    std::int64_t stride = 1;
                    for (int bx = ax + 1; bx < d; ++bx) stride *= emb.sizes[bx];
                    src += static_cast<std::int64_t>(i) * stride;
                }
                out.value(rep, v, s) = std::sqrt(2.0) * inv_sqrt_m * w[v][src].real();
            }
        }
    });
    return out;
}

/// Convolution pair: simulate the Matern base by circulant embedding, then
/// form the second variable by applying the kernel's transfer function at
/// the observation grid's lattice frequencies (exact circular smoothing).
inline MultiField simulate_convolution(const SimRequest& req, const ConvolutionModel& model) {
    SimRequest base_req{AnyModel(MultiMaternModel(model.dim(), {model.base()}, {})), req.grid, req.reps,
                        req.seed, SimMethod::circulant};
    MultiField base = simulate_circulant(base_req);

    const GridSpec& g = req.grid;
    const std::int64_t n = g.total_points();
    FrequencyGrid freqs(g);
    std::vector<double> transfer_by_bin(n);
    for (std::int64_t k = 0; k < n; ++k) transfer_by_bin[freqs.dft_bin(k)] = model.transfer()(freqs.radius(k));

    MultiField out(g, 2, req.reps, /*real=*/true);
    std::vector<std::complex<double>> work(n);
    for (int rep = 0; rep < req.reps; ++rep) {
        const auto* src = base.slice(rep, 0);
        std::copy(src, src + n, work.begin());
        fft::forward(g.sizes(), work.data());
        for (std::int64_t b = 0; b < n; ++b) work[b] *= transfer_by_bin[b];
        fft::inverse(g.sizes(), work.data());
        for (std::int64_t s = 0; s < n; ++s) {
            out.value(rep, 0, s) = src[s];
            out.value(rep, 1, s) = work[s].real() / static_cast<double>(n);
        }
    }
    return out;
}

}  // namespace detail

/// Zero-mean Gaussian field with the model's covariance.  The same seed and
/// method give bit-identical output regardless of the worker count.
inline MultiField simulate(const SimRequest& req) {
    if (req.reps < 1) throw std::invalid_argument("simulate: reps must be >= 1");
    const ValidityResult val = model_validity_check(req.model);
    if (!val.valid) throw std::invalid_argument("simulate: model failed the validity check: " + val.constraint);

    if (const auto* conv = std::get_if<ConvolutionModel>(&req.model)) {
        if (req.method == SimMethod::dense)
            throw std::invalid_argument("simulate: convolution pairs have no closed-form covariance; "
                                        "use the circulant method");
        return detail::simulate_convolution(req, *conv);
    }
    return req.method == SimMethod::dense ? detail::simulate_dense(req) : detail::simulate_circulant(req);
}

// ---------------------------------------------------------------------------
// 3x3 filtering experiment
// ---------------------------------------------------------------------------

/// 3x3 real stencil.  low_pass() is the constant 1/9 block; high_pass() has
/// -1/9 on the eight edge cells and 8/9 in the center (weights sum to 0).
struct FilterStencil {
    double w[3][3];

    static FilterStencil low_pass() {
        FilterStencil f;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) f.w[i][j] = 1.0 / 9.0;
        return f;
    }
    static FilterStencil high_pass() {
        FilterStencil f;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) f.w[i][j] = -1.0 / 9.0;
        f.w[1][1] = 8.0 / 9.0;
        return f;
    }
};

/// Valid (interior-only) 3x3 convolution of a 2-d field; the output grid is
/// trimmed by one cell per side.  box(x) + high_pass(x) recovers the interior
/// of x exactly.
inline MultiField filter2d(const MultiField& f, const FilterStencil& st) {
    const GridSpec& g = f.grid();
    if (g.dims() != 2) throw std::invalid_argument("filter2d: needs a 2-d grid");
    if (g.size(0) < 3 || g.size(1) < 3) throw std::invalid_argument("filter2d: grid must be at least 3x3");
    const int n0 = g.size(0), n1 = g.size(1);
    GridSpec trimmed({n0 - 2, n1 - 2}, g.spacings());
    MultiField out(trimmed, f.nvars(), f.nreps(), f.real_valued());
    for (int rep = 0; rep < f.nreps(); ++rep)
        for (int v = 0; v < f.nvars(); ++v) {
            const auto* in = f.slice(rep, v);
            auto* o = out.slice(rep, v);
            for (int i = 1; i < n0 - 1; ++i)
                for (int j = 1; j < n1 - 1; ++j) {
                    std::complex<double> acc = 0.0;
                    for (int u = -1; u <= 1; ++u)
                        for (int w2 = -1; w2 <= 1; ++w2)
                            acc += st.w[u + 1][w2 + 1] * in[(i + u) * static_cast<std::int64_t>(n1) + (j + w2)];
                    o[(i - 1) * static_cast<std::int64_t>(n1 - 2) + (j - 1)] = acc;
                }
        }
    return out;
}

struct FilteredCorrelation {
    double low_corr = 0.0;
    double high_corr = 0.0;
    int nreps = 0;
};

namespace detail {

inline double pooled_pearson(const MultiField& a, int va, int vb) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    double n = 0;
    for (int rep = 0; rep < a.nreps(); ++rep)
        for (std::int64_t s = 0; s < a.npoints(); ++s) {
            const double x = a.value(rep, va, s).real();
            const double y = a.value(rep, vb, s).real();
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            n += 1;
        }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    return cov / std::sqrt(vx * vy);
}

}  // namespace detail

/// Simulate a bivariate model, low- and high-pass filter every replicate,
/// and return the Pearson correlations between the two variables' filtered
/// interiors pooled over replicates.
inline FilteredCorrelation filtered_correlation(const AnyModel& model, const GridSpec& grid, int reps,
                                                std::uint64_t seed) {
    if (model_nvars(model) != 2) throw std::invalid_argument("filtered_correlation: needs a bivariate model");
    SimRequest req{model, grid, reps, seed, SimMethod::circulant};
    const MultiField z = simulate(req);
    const MultiField low = filter2d(z, FilterStencil::low_pass());
    const MultiField high = filter2d(z, FilterStencil::high_pass());
    FilteredCorrelation out;
    out.low_corr = detail::pooled_pearson(low, 0, 1);
    out.high_corr = detail::pooled_pearson(high, 0, 1);
    out.nreps = reps;
    return out;
}

}  // namespace speccoh
