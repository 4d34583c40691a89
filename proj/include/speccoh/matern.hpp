// SPDX-License-Identifier: Apache-2.0
//
// Matern covariance and spectral density.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>

namespace speccoh {

/// Marginal Matern parameters: variance, smoothness, inverse range.
struct MaternParams {
    double sigma2 = 1.0;
    double nu = 0.5;
    double a = 1.0;

    void validate() const {
        if (!(sigma2 > 0.0) || !(nu > 0.0) || !(a > 0.0))
            throw std::invalid_argument("MaternParams: sigma2, nu, a must all be > 0");
    }
};

namespace detail {

struct GslQuietGuard {
    gsl_error_handler_t* prev;
    GslQuietGuard() : prev(gsl_set_error_handler_off()) {}
    ~GslQuietGuard() { gsl_set_error_handler(prev); }
};

/// Unit-variance Matern correlation M(x | nu) = 2^{1-nu}/Gamma(nu) x^nu K_nu(x).
/// Assembled in the log domain so large nu / small x do not overflow.
/// Underflows to 0 for x beyond roughly 700.
inline double matern_correlation(double nu, double x) {
    if (!(x > 0.0)) return 1.0;
    GslQuietGuard quiet;
    gsl_sf_result lnk;
    if (gsl_sf_bessel_lnKnu_e(nu, x, &lnk) != GSL_SUCCESS) return 0.0;  // deep underflow
    const double logm = (1.0 - nu) * std::log(2.0) - gsl_sf_lngamma(nu) + nu * std::log(x) + lnk.val;
    if (logm < -745.0) return 0.0;
    const double m = std::exp(logm);
    return m > 1.0 ? 1.0 : m;  // clip rounding excess at x -> 0
}

inline double sq_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace detail

/// sigma^2 * M(h | nu, a) at lag distance ||h||; continuous at 0 with value sigma^2.
inline double matern_cov(double dist, const MaternParams& p) {
    return p.sigma2 * detail::matern_correlation(p.nu, p.a * std::abs(dist));
}

inline double matern_cov(std::span<const double> h, const MaternParams& p) {
    return matern_cov(std::sqrt(detail::sq_norm(h)), p);
}

/// Isotropic Matern spectral density in dimension d at radius ||omega||:
///   sigma^2 Gamma(nu + d/2) a^{2 nu} / (Gamma(nu) pi^{d/2} (a^2 + ||omega||^2)^{nu + d/2}).
/// Integrates to sigma^2 over R^d.
inline double matern_sdf_radial(double radius, const MaternParams& p, int dim) {
    if (dim < 1) throw std::invalid_argument("matern_sdf: dim must be >= 1");
    const double hd = 0.5 * dim;
    const double logc = gsl_sf_lngamma(p.nu + hd) - gsl_sf_lngamma(p.nu) - hd * std::log(M_PI) +
                        2.0 * p.nu * std::log(p.a);
    return p.sigma2 * std::exp(logc - (p.nu + hd) * std::log(p.a * p.a + radius * radius));
}

inline double matern_sdf(std::span<const double> omega, const MaternParams& p, int dim) {
    if (static_cast<int>(omega.size()) != dim)
        throw std::invalid_argument("matern_sdf: omega length must equal dim");
    return matern_sdf_radial(std::sqrt(detail::sq_norm(omega)), p, dim);
}

}  // namespace speccoh
