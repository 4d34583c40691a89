// SPDX-License-Identifier: Apache-2.0
//
// Regular sampling grids and their Fourier-frequency lattices.

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace speccoh {

/// Regular d-dimensional sampling grid: per-axis sizes and spacings.
/// Site coordinates are s_k = (k_1*d_1, ..., k_d*d_d) with the origin at
/// index 0; sites are enumerated row-major over the axes (axis 0 slowest).
class GridSpec {
public:
    GridSpec(std::vector<int> sizes, std::vector<double> spacings)
        : sizes_(std::move(sizes)), spacings_(std::move(spacings)) {
        if (sizes_.empty() || sizes_.size() != spacings_.size())
            throw std::invalid_argument("GridSpec: sizes/spacings must be nonempty and of equal length");
        for (int n : sizes_)
            if (n < 1) throw std::invalid_argument("GridSpec: all sizes must be >= 1");
        for (double s : spacings_)
            if (!(s > 0.0)) throw std::invalid_argument("GridSpec: all spacings must be > 0");
    }

    /// Uniform grid: same size and spacing on every axis.
    static GridSpec uniform(int dims, int n, double spacing) {
        return GridSpec(std::vector<int>(dims, n), std::vector<double>(dims, spacing));
    }

    int dims() const { return static_cast<int>(sizes_.size()); }
    const std::vector<int>& sizes() const { return sizes_; }
    const std::vector<double>& spacings() const { return spacings_; }
    int size(int axis) const { return sizes_[axis]; }
    double spacing(int axis) const { return spacings_[axis]; }

    /// Total number of sites N = prod n_i.
    std::int64_t total_points() const {
        std::int64_t n = 1;
        for (int s : sizes_) n *= s;
        return n;
    }

    /// Cell volume delta = prod d_i.
    double cell_volume() const {
        double v = 1.0;
        for (double s : spacings_) v *= s;
        return v;
    }

    /// Physical coordinates of the site with flat (row-major) index k.
    std::vector<double> site(std::int64_t flat) const {
        std::vector<double> s(dims());
        for (int ax = dims() - 1; ax >= 0; --ax) {
            s[ax] = static_cast<double>(flat % sizes_[ax]) * spacings_[ax];
            flat /= sizes_[ax];
        }
        return s;
    }

    std::int64_t flat_index(const std::vector<int>& idx) const {
        std::int64_t f = 0;
        for (int ax = 0; ax < dims(); ++ax) f = f * sizes_[ax] + idx[ax];
        return f;
    }

    bool operator==(const GridSpec& o) const {
        return sizes_ == o.sizes_ && spacings_ == o.spacings_;
    }

private:
    std::vector<int> sizes_;
    std::vector<double> spacings_;
};

/// Fourier-frequency lattice of a grid.
///
/// Per axis the frequency indices are f in {-floor((n-1)/2), ..., floor(n/2)}
/// (the Nyquist index sits on the positive side for even n), and the angular
/// frequency component is 2*pi*f/(spacing*n).  Lattice points are stored in
/// ascending index order per axis, row-major over axes, which matches the
/// site ordering of field storage.  dft_bin() gives the permutation from a
/// lattice position to the raw DFT bin (f mod n per axis) so one FFT per
/// variable yields the periodogram.
class FrequencyGrid {
public:
    explicit FrequencyGrid(GridSpec grid) : grid_(std::move(grid)) {
        const int d = grid_.dims();
        axis_index_.resize(d);
        for (int ax = 0; ax < d; ++ax) {
            const int n = grid_.size(ax);
            const int lo = -((n - 1) / 2);
            axis_index_[ax].resize(n);
            for (int g = 0; g < n; ++g) axis_index_[ax][g] = lo + g;
        }
    }

    const GridSpec& grid() const { return grid_; }
    int dims() const { return grid_.dims(); }
    std::int64_t size() const { return grid_.total_points(); }

    /// Integer frequency index vector of lattice point k.
    std::vector<int> index(std::int64_t flat) const {
        std::vector<int> f(dims());
        for (int ax = dims() - 1; ax >= 0; --ax) {
            f[ax] = axis_index_[ax][flat % grid_.size(ax)];
            flat /= grid_.size(ax);
        }
        return f;
    }

    /// Angular frequency vector (radians per distance unit) of lattice point k.
    std::vector<double> frequency(std::int64_t flat) const {
        std::vector<double> w(dims());
        const auto f = index(flat);
        for (int ax = 0; ax < dims(); ++ax)
            w[ax] = two_pi() * f[ax] / (grid_.spacing(ax) * grid_.size(ax));
        return w;
    }

    /// Euclidean norm of the frequency vector at lattice point k.
    double radius(std::int64_t flat) const {
        double s = 0.0;
        for (double w : frequency(flat)) s += w * w;
        return std::sqrt(s);
    }

    /// Flat index into the raw (unshifted) DFT output for lattice point k.
    std::int64_t dft_bin(std::int64_t flat) const {
        const auto f = index(flat);
        std::int64_t b = 0;
        for (int ax = 0; ax < dims(); ++ax) {
            const int n = grid_.size(ax);
            b = b * n + ((f[ax] % n) + n) % n;
        }
        return b;
    }

    /// Lattice point carrying -w, modulo the lattice periodicity 2*pi/spacing
    /// per axis (even-n Nyquist indices map to themselves).
    std::int64_t negation(std::int64_t flat) const {
        const auto f = index(flat);
        std::int64_t r = 0;
        for (int ax = 0; ax < dims(); ++ax) {
            const int n = grid_.size(ax);
            const int lo = -((n - 1) / 2);
            int neg = ((-f[ax] - lo) % n + n) % n;  // position of -f wrapped into range
            r = r * n + neg;
        }
        return r;
    }

    /// Position of the zero frequency (always present).
    std::int64_t zero_index() const {
        std::int64_t r = 0;
        for (int ax = 0; ax < dims(); ++ax) {
            const int n = grid_.size(ax);
            r = r * n + (n - 1) / 2;
        }
        return r;
    }

    static constexpr double two_pi() { return 6.283185307179586476925286766559; }

private:
    GridSpec grid_;
    std::vector<std::vector<int>> axis_index_;
};

/// Full Fourier-frequency lattice for a grid.
inline FrequencyGrid fourier_frequencies(const GridSpec& grid) { return FrequencyGrid(grid); }

}  // namespace speccoh
