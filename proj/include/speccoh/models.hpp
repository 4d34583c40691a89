// SPDX-License-Identifier: Apache-2.0
//
// Analytic cross-spectral models: multivariate Matern, linear model of
// coregionalization, separable and convolution constructions, plus the
// spectral validity check.

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <gsl/gsl_sf_gamma.h>

#include "speccoh/matern.hpp"
#include "speccoh/pair_spectrum.hpp"
#include "json.hpp"

namespace speccoh {

/// Cross-pair Matern parameters: correlation, smoothness, inverse range.
struct CrossMaternParams {
    double rho = 0.0;
    double nu = 1.0;
    double a = 1.0;

    void validate() const {
        if (!(nu > 0.0) || !(a > 0.0) || rho < -1.0 || rho > 1.0)
            throw std::invalid_argument("CrossMaternParams: need nu, a > 0 and rho in [-1, 1]");
    }
};

struct ValidityResult {
    bool valid = false;
    double sup_coh2 = 0.0;                         ///< largest squared coherence seen
    std::optional<std::vector<double>> witness;    ///< frequency violating the bound
    std::string constraint;                        ///< human-readable reason on failure
};

/// p-variate Matern model: C_ii = sigma_i^2 M(.|nu_i, a_i) marginally and
/// C_ij = rho_ij sigma_i sigma_j M(.|nu_ij, a_ij) across pairs.
class MultiMaternModel {
public:
    MultiMaternModel(int dim, std::vector<MaternParams> marginals, std::vector<CrossMaternParams> cross)
        : dim_(dim), marginals_(std::move(marginals)), cross_(std::move(cross)) {
        const int p = static_cast<int>(marginals_.size());
        if (dim_ < 1 || p < 1) throw std::invalid_argument("MultiMaternModel: need dim >= 1 and p >= 1");
        if (static_cast<int>(cross_.size()) != p * (p - 1) / 2)
            throw std::invalid_argument("MultiMaternModel: need one cross entry per pair i < j");
        for (const auto& m : marginals_) m.validate();
        for (const auto& c : cross_) c.validate();
    }

    /// Bivariate convenience constructor.
    static MultiMaternModel bivariate(int dim, MaternParams m1, MaternParams m2, CrossMaternParams c) {
        return MultiMaternModel(dim, {m1, m2}, {c});
    }

    int dim() const { return dim_; }
    int nvars() const { return static_cast<int>(marginals_.size()); }
    const MaternParams& marginal(int i) const { return marginals_[i]; }
    const CrossMaternParams& cross(int i, int j) const {
        if (i == j) throw std::invalid_argument("cross(i, i) is not a pair");
        if (i > j) std::swap(i, j);
        return cross_[j * (j - 1) / 2 + i];
    }

    bool validated = false;  ///< set by mm_validity_check on success

    /// Cross-spectral density of pair (i, j) at radius ||omega||.
    double cross_sdf_radial(int i, int j, double r) const {
        if (i == j) return matern_sdf_radial(r, marginals_[i], dim_);
        const auto& c = cross(i, j);
        const MaternParams unit{1.0, c.nu, c.a};
        return c.rho * std::sqrt(marginals_[i].sigma2 * marginals_[j].sigma2) *
               matern_sdf_radial(r, unit, dim_);
    }

    Eigen::MatrixXcd spectral_matrix(std::span<const double> omega) const {
        if (static_cast<int>(omega.size()) != dim_)
            throw std::invalid_argument("spectral_matrix: omega length must equal dim");
        return spectral_matrix_radial(std::sqrt(detail::sq_norm(omega)));
    }

    Eigen::MatrixXcd spectral_matrix_radial(double r) const {
        const int p = nvars();
        Eigen::MatrixXcd f(p, p);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i) f(i, j) = cross_sdf_radial(i, j, r);
        return f;
    }

    Eigen::MatrixXd cov_matrix(std::span<const double> h) const {
        return cov_matrix_radial(std::sqrt(detail::sq_norm(h)));
    }

    Eigen::MatrixXd cov_matrix_radial(double dist) const {
        const int p = nvars();
        Eigen::MatrixXd c(p, p);
        for (int i = 0; i < p; ++i) c(i, i) = matern_cov(dist, marginals_[i]);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < j; ++i) {
                const auto& x = cross(i, j);
                const MaternParams unit{1.0, x.nu, x.a};
                c(i, j) = c(j, i) = x.rho * std::sqrt(marginals_[i].sigma2 * marginals_[j].sigma2) *
                                    matern_cov(dist, unit);
            }
        return c;
    }

private:
    int dim_;
    std::vector<MaternParams> marginals_;
    std::vector<CrossMaternParams> cross_;
};

namespace detail {

/// log of the Gamma-function ratio in the bivariate Matern coherence.
inline double mm_log_gamma_ratio(double nu1, double nu2, double nu12, double hd) {
    return 2.0 * gsl_sf_lngamma(nu12 + hd) + gsl_sf_lngamma(nu1) + gsl_sf_lngamma(nu2) -
           gsl_sf_lngamma(nu1 + hd) - gsl_sf_lngamma(nu2 + hd) - 2.0 * gsl_sf_lngamma(nu12);
}

}  // namespace detail

/// Squared coherence of a bivariate Matern pair at radius ||omega||,
/// evaluated from the closed form
///   rho^2 * G * a12^{4 nu12}/(a1^{2 nu1} a2^{2 nu2})
///         * (a1^2+r^2)^{nu1+d/2} (a2^2+r^2)^{nu2+d/2} / (a12^2+r^2)^{2 nu12+d}
/// with G the Gamma ratio; equal to |f12|^2/(f11 f22) of the spectral matrix.
inline double mm_coherence2_radial(const MultiMaternModel& m, int i, int j, double r) {
    if (i == j) return 1.0;
    const auto& mi = m.marginal(i);
    const auto& mj = m.marginal(j);
    const auto& c = m.cross(i, j);
    if (c.rho == 0.0) return 0.0;
    const double hd = 0.5 * m.dim();
    const double r2 = r * r;
    double lg = detail::mm_log_gamma_ratio(mi.nu, mj.nu, c.nu, hd);
    lg += 4.0 * c.nu * std::log(c.a) - 2.0 * mi.nu * std::log(mi.a) - 2.0 * mj.nu * std::log(mj.a);
    lg += (mi.nu + hd) * std::log(mi.a * mi.a + r2) + (mj.nu + hd) * std::log(mj.a * mj.a + r2) -
          (2.0 * c.nu + 2.0 * hd) * std::log(c.a * c.a + r2);
    return c.rho * c.rho * std::exp(lg);
}

inline double mm_coherence(const MultiMaternModel& m, std::span<const double> omega, int i, int j) {
    return mm_coherence2_radial(m, i, j, std::sqrt(detail::sq_norm(omega)));
}

/// Common-range specialization (a1 = a2 = a12 = a):
///   gamma^2 = rho^2 * G * ((a^2 + r^2)/a^2)^{nu1 + nu2 - 2 nu12}.
inline double mm_coherence2_common_range(double rho, double nu1, double nu2, double nu12, double a,
                                         int dim, double r) {
    const double hd = 0.5 * dim;
    const double e = nu1 + nu2 - 2.0 * nu12;
    return rho * rho *
           std::exp(detail::mm_log_gamma_ratio(nu1, nu2, nu12, hd) +
                    e * (std::log(a * a + r * r) - 2.0 * std::log(a)));
}

/// Common-smoothness specialization (nu1 = nu2 = nu12 = nu):
///   gamma^2 = rho^2 (a12^2/(a1 a2))^{2 nu}
///             * ((a1^2+r^2)(a2^2+r^2)/(a12^2+r^2)^2)^{nu + d/2}.
inline double mm_coherence2_common_smoothness(double rho, double nu, double a1, double a2, double a12,
                                              int dim, double r) {
    const double hd = 0.5 * dim;
    const double r2 = r * r;
    const double lg = 2.0 * nu * (2.0 * std::log(a12) - std::log(a1) - std::log(a2)) +
                      (nu + hd) * (std::log(a1 * a1 + r2) + std::log(a2 * a2 + r2) -
                                   2.0 * std::log(a12 * a12 + r2));
    return rho * rho * std::exp(lg);
}

namespace detail {

inline std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> v(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i) v[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
    return v;
}

inline std::vector<double> witness_at_radius(double r, int dim) {
    std::vector<double> w(dim, 0.0);
    w[0] = r;
    return w;
}

}  // namespace detail

/// Validity of a multivariate Matern model via its spectral matrices.
///
/// For p = 2 the closed-form squared coherence is scanned over a log-spaced
/// radial budget spanning [1e-4 min(a), 1e4 max(a)] together with its exact
/// limits at 0 and infinity; the model is valid iff the supremum is <= 1.
/// For p > 2 every pair is checked the same way and the full p x p spectral
/// matrix is eigenvalue-scanned over the same radii.
inline ValidityResult mm_validity_check(const MultiMaternModel& m, int radius_budget = 512) {
    constexpr double kTol = 1e-10;
    ValidityResult res;
    res.valid = true;

    double amin = m.marginal(0).a, amax = m.marginal(0).a;
    for (int i = 0; i < m.nvars(); ++i) {
        amin = std::min(amin, m.marginal(i).a);
        amax = std::max(amax, m.marginal(i).a);
    }
    for (int j = 0; j < m.nvars(); ++j)
        for (int i = 0; i < j; ++i) {
            amin = std::min(amin, m.cross(i, j).a);
            amax = std::max(amax, m.cross(i, j).a);
        }
    auto radii = detail::log_spaced(1e-4 * amin, 1e4 * amax, radius_budget);
    radii.push_back(0.0);

    for (int j = 0; j < m.nvars() && res.valid; ++j) {
        for (int i = 0; i < j && res.valid; ++i) {
            const auto& c = m.cross(i, j);
            for (double r : radii) {
                const double g2 = mm_coherence2_radial(m, i, j, r);
                res.sup_coh2 = std::max(res.sup_coh2, g2);
                if (g2 > 1.0 + kTol) {
                    res.valid = false;
                    res.witness = detail::witness_at_radius(r, m.dim());
                    res.constraint = "squared coherence of pair (" + std::to_string(i + 1) + "," +
                                     std::to_string(j + 1) + ") exceeds 1";
                    break;
                }
            }
            if (!res.valid || c.rho == 0.0) continue;
            // High-frequency limit: gamma^2 ~ r^{2(nu_i + nu_j - 2 nu_ij)}.
            const double e_inf = m.marginal(i).nu + m.marginal(j).nu - 2.0 * c.nu;
            if (e_inf > 0.0) {
                double r = 1e4 * amax;
                while (mm_coherence2_radial(m, i, j, r) <= 1.0 + kTol && r < 1e300) r *= 2.0;
                res.valid = false;
                res.witness = detail::witness_at_radius(r, m.dim());
                res.sup_coh2 = std::max(res.sup_coh2, mm_coherence2_radial(m, i, j, r));
                res.constraint = "cross smoothness nu_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                 " below (nu_i + nu_j)/2 makes coherence unbounded";
            } else if (e_inf == 0.0) {
                const double hd = 0.5 * m.dim();
                const double limit =
                    c.rho * c.rho *
                    std::exp(detail::mm_log_gamma_ratio(m.marginal(i).nu, m.marginal(j).nu, c.nu, hd) +
                             4.0 * c.nu * std::log(c.a) - 2.0 * m.marginal(i).nu * std::log(m.marginal(i).a) -
                             2.0 * m.marginal(j).nu * std::log(m.marginal(j).a));
                res.sup_coh2 = std::max(res.sup_coh2, limit);
                if (limit > 1.0 + kTol) {
                    res.valid = false;
                    res.witness = std::nullopt;  // attained only in the limit
                    res.constraint = "high-frequency coherence limit exceeds 1";
                }
            }
        }
    }

    if (res.valid && m.nvars() > 2) {
        for (double r : radii) {
            const Eigen::MatrixXcd f = m.spectral_matrix_radial(r);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f, Eigen::EigenvaluesOnly);
            const double tr = f.real().trace();
            if (es.eigenvalues().minCoeff() < -kTol * tr) {
                res.valid = false;
                res.witness = detail::witness_at_radius(r, m.dim());
                res.constraint = "spectral matrix has a negative eigenvalue";
                break;
            }
        }
    }
    return res;
}

/// Frequency-constant squared coherence (r_ij r_ji)/(r_ii r_jj) of a
/// separable model R * C(h); R must be positive definite.
inline double separable_coherence(const Eigen::MatrixXd& R, int i, int j) {
    if (R.rows() != R.cols()) throw std::invalid_argument("separable_coherence: R must be square");
    Eigen::LLT<Eigen::MatrixXd> llt(R);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("separable_coherence: R is not positive definite");
    return (R(i, j) * R(j, i)) / (R(i, i) * R(j, j));
}

/// Separable model R * C(h) with a Matern base.
class SeparableModel {
public:
    SeparableModel(int dim, Eigen::MatrixXd R, MaternParams base)
        : dim_(dim), R_(std::move(R)), base_(base) {
        base_.validate();
        Eigen::LLT<Eigen::MatrixXd> llt(R_);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("SeparableModel: R is not positive definite");
    }

    int dim() const { return dim_; }
    int nvars() const { return static_cast<int>(R_.rows()); }
    const Eigen::MatrixXd& R() const { return R_; }
    const MaternParams& base() const { return base_; }

    Eigen::MatrixXcd spectral_matrix_radial(double r) const {
        return R_.cast<std::complex<double>>() * matern_sdf_radial(r, base_, dim_);
    }
    Eigen::MatrixXd cov_matrix_radial(double dist) const { return R_ * matern_cov(dist, base_); }

private:
    int dim_;
    Eigen::MatrixXd R_;
    MaternParams base_;
};

/// Linear model of coregionalization Z = B W with independent Matern latents.
class LmcModel {
public:
    LmcModel(int dim, Eigen::MatrixXd B, std::vector<MaternParams> latents)
        : dim_(dim), B_(std::move(B)), latents_(std::move(latents)) {
        if (B_.rows() != B_.cols() || B_.rows() != static_cast<Eigen::Index>(latents_.size()))
            throw std::invalid_argument("LmcModel: B must be p x p with p latent densities");
        if (!B_.allFinite()) throw std::invalid_argument("LmcModel: B must be finite");
        for (const auto& l : latents_) l.validate();
    }

    int dim() const { return dim_; }
    int nvars() const { return static_cast<int>(B_.rows()); }
    const Eigen::MatrixXd& B() const { return B_; }
    const MaternParams& latent(int k) const { return latents_[k]; }

    /// B diag(f_1, ..., f_p) B^T at radius ||omega||.
    Eigen::MatrixXcd spectral_matrix_radial(double r) const {
        Eigen::VectorXd f(nvars());
        for (int k = 0; k < nvars(); ++k) f[k] = matern_sdf_radial(r, latents_[k], dim_);
        return (B_ * f.asDiagonal() * B_.transpose()).cast<std::complex<double>>();
    }

    Eigen::MatrixXd cov_matrix_radial(double dist) const {
        Eigen::VectorXd c(nvars());
        for (int k = 0; k < nvars(); ++k) c[k] = matern_cov(dist, latents_[k]);
        return B_ * c.asDiagonal() * B_.transpose();
    }

private:
    int dim_;
    Eigen::MatrixXd B_;
    std::vector<MaternParams> latents_;
};

/// Real symmetric transfer function of a Gaussian smoothing kernel:
/// fK(omega) = amplitude * exp(-(scale^2 ||omega||^2)/2).
struct GaussianTransfer {
    double amplitude = 1.0;
    double scale = 1.0;
    double operator()(double r) const { return amplitude * std::exp(-0.5 * scale * scale * r * r); }
};

/// Bivariate pair (Z1, Z2 = K * Z1): a Matern base process and its image
/// under a symmetric smoothing kernel, specified by the kernel's transfer
/// function.  Its covariance has no closed form; simulation goes through the
/// spectral route.
class ConvolutionModel {
public:
    ConvolutionModel(int dim, MaternParams base, GaussianTransfer transfer)
        : dim_(dim), base_(base), transfer_(transfer) {
        base_.validate();
        if (!(transfer_.scale >= 0.0))
            throw std::invalid_argument("ConvolutionModel: kernel scale must be >= 0");
    }

    int dim() const { return dim_; }
    int nvars() const { return 2; }
    const MaternParams& base() const { return base_; }
    const GaussianTransfer& transfer() const { return transfer_; }

    PairSpectrum pair_spectrum_radial(double r) const {
        return convolution_pair_spectra(transfer_(r), matern_sdf_radial(r, base_, dim_));
    }

    Eigen::MatrixXcd spectral_matrix_radial(double r) const {
        const PairSpectrum ps = pair_spectrum_radial(r);
        Eigen::MatrixXcd f(2, 2);
        f(0, 0) = ps.f11;
        f(1, 1) = ps.f22;
        f(0, 1) = ps.f12;
        f(1, 0) = std::conj(ps.f12);
        return f;
    }

private:
    int dim_;
    MaternParams base_;
    GaussianTransfer transfer_;
};

using AnyModel = std::variant<MultiMaternModel, LmcModel, SeparableModel, ConvolutionModel>;

inline int model_dim(const AnyModel& m) {
    return std::visit([](const auto& x) { return x.dim(); }, m);
}
inline int model_nvars(const AnyModel& m) {
    return std::visit([](const auto& x) { return x.nvars(); }, m);
}
inline Eigen::MatrixXcd model_spectral_matrix_radial(const AnyModel& m, double r) {
    return std::visit([&](const auto& x) { return x.spectral_matrix_radial(r); }, m);
}

/// Matrix covariance at lag distance; throws for convolution models.
inline Eigen::MatrixXd model_cov_matrix_radial(const AnyModel& m, double dist) {
    if (std::holds_alternative<ConvolutionModel>(m))
        throw std::domain_error("convolution model covariance is not available in closed form");
    return std::visit(
        [&](const auto& x) -> Eigen::MatrixXd {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ConvolutionModel>)
                return Eigen::MatrixXd();
            else
                return x.cov_matrix_radial(dist);
        },
        m);
}

/// Validity of any model: multivariate Matern uses the coherence scan, the
/// other constructions are valid by construction (their parameters are
/// checked when built).
inline ValidityResult model_validity_check(const AnyModel& m, int radius_budget = 512) {
    if (const auto* mm = std::get_if<MultiMaternModel>(&m)) return mm_validity_check(*mm, radius_budget);
    ValidityResult r;
    r.valid = true;
    return r;
}

// ---------------------------------------------------------------------------
// Model JSON: {"kind": "matern_mv" | "lmc" | "separable" | "convolution", ...}
// ---------------------------------------------------------------------------

inline nlohmann::json matern_params_json(const MaternParams& p) {
    return {{"sigma2", p.sigma2}, {"nu", p.nu}, {"a", p.a}};
}

inline MaternParams matern_params_from_json(const nlohmann::json& j) {
    MaternParams p;
    p.sigma2 = j.value("sigma2", 1.0);
    p.nu = j.at("nu").get<double>();
    p.a = j.at("a").get<double>();
    p.validate();
    return p;
}

inline nlohmann::json model_to_json(const AnyModel& m) {
    nlohmann::json j;
    if (const auto* mm = std::get_if<MultiMaternModel>(&m)) {
        j["kind"] = "matern_mv";
        j["dim"] = mm->dim();
        for (int i = 0; i < mm->nvars(); ++i) j["marginals"].push_back(matern_params_json(mm->marginal(i)));
        for (int jj = 0; jj < mm->nvars(); ++jj)
            for (int ii = 0; ii < jj; ++ii) {
                const auto& c = mm->cross(ii, jj);
                j["cross"].push_back({{"i", ii + 1}, {"j", jj + 1}, {"rho", c.rho}, {"nu", c.nu}, {"a", c.a}});
            }
    } else if (const auto* lmc = std::get_if<LmcModel>(&m)) {
        j["kind"] = "lmc";
        j["dim"] = lmc->dim();
        for (int r = 0; r < lmc->nvars(); ++r) {
            std::vector<double> row(lmc->nvars());
            for (int c = 0; c < lmc->nvars(); ++c) row[c] = lmc->B()(r, c);
            j["B"].push_back(row);
        }
        for (int k = 0; k < lmc->nvars(); ++k) j["latent"].push_back(matern_params_json(lmc->latent(k)));
    } else if (const auto* sep = std::get_if<SeparableModel>(&m)) {
        j["kind"] = "separable";
        j["dim"] = sep->dim();
        for (int r = 0; r < sep->nvars(); ++r) {
            std::vector<double> row(sep->nvars());
            for (int c = 0; c < sep->nvars(); ++c) row[c] = sep->R()(r, c);
            j["R"].push_back(row);
        }
        j["base"] = matern_params_json(sep->base());
    } else if (const auto* cv = std::get_if<ConvolutionModel>(&m)) {
        j["kind"] = "convolution";
        j["dim"] = cv->dim();
        j["base"] = matern_params_json(cv->base());
        j["kernel"] = {{"type", "gaussian"},
                       {"amplitude", cv->transfer().amplitude},
                       {"scale", cv->transfer().scale}};
    }
    return j;
}

inline AnyModel model_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dim").get<int>();
    if (kind == "matern_mv") {
        std::vector<MaternParams> marg;
        for (const auto& mj : j.at("marginals")) marg.push_back(matern_params_from_json(mj));
        const int p = static_cast<int>(marg.size());
        std::vector<CrossMaternParams> cross(p * (p - 1) / 2);
        std::vector<char> seen(cross.size(), 0);
        for (const auto& cj : j.at("cross")) {
            int i = cj.at("i").get<int>() - 1;
            int jj = cj.at("j").get<int>() - 1;
            if (i > jj) std::swap(i, jj);
            if (i < 0 || jj >= p || i == jj) throw std::invalid_argument("model JSON: bad cross pair indices");
            CrossMaternParams c{cj.at("rho").get<double>(), cj.at("nu").get<double>(), cj.at("a").get<double>()};
            cross[jj * (jj - 1) / 2 + i] = c;
            seen[jj * (jj - 1) / 2 + i] = 1;
        }
        for (char s : seen)
            if (!s) throw std::invalid_argument("model JSON: missing cross entry for some pair");
        return MultiMaternModel(dim, std::move(marg), std::move(cross));
    }
    if (kind == "lmc") {
        const auto rows = j.at("B");
        const int p = static_cast<int>(rows.size());
        Eigen::MatrixXd B(p, p);
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c) B(r, c) = rows[r][c].get<double>();
        std::vector<MaternParams> lat;
        for (const auto& lj : j.at("latent")) lat.push_back(matern_params_from_json(lj));
        return LmcModel(dim, std::move(B), std::move(lat));
    }
    if (kind == "separable") {
        const auto rows = j.at("R");
        const int p = static_cast<int>(rows.size());
        Eigen::MatrixXd R(p, p);
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c) R(r, c) = rows[r][c].get<double>();
        return SeparableModel(dim, std::move(R), matern_params_from_json(j.at("base")));
    }
    if (kind == "convolution") {
        const auto& kj = j.at("kernel");
        if (kj.at("type").get<std::string>() != "gaussian")
            throw std::invalid_argument("model JSON: only gaussian convolution kernels are supported");
        GaussianTransfer t{kj.value("amplitude", 1.0), kj.at("scale").get<double>()};
        return ConvolutionModel(dim, matern_params_from_json(j.at("base")), t);
    }
    throw std::invalid_argument("model JSON: unknown kind '" + kind + "'");
}

}  // namespace speccoh
