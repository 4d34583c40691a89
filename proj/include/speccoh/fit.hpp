// SPDX-License-Identifier: Apache-2.0
//
// Least-squares spectral fitting: marginal Matern parameters from the log
// averaged periodogram, cross parameters from empirical squared coherence.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "speccoh/coherence.hpp"
#include "speccoh/models.hpp"
#include "speccoh/nelder_mead.hpp"
#include "json.hpp"

namespace speccoh {

/// One frequency sample reduced to its radius (all fitted models are radial).
struct RadialSample {
    double radius = 0.0;
    double value = 0.0;
};

/// Fit configuration.  An unset band falls back to the default: drop the
/// zero frequency and the outermost 10% of sample radii.  Parameters are
/// optimized on transformed coordinates (log for sigma2, nu, a; atanh for
/// rho) so bounds hold by construction.
struct FitConfig {
    double band_min = std::numeric_limits<double>::quiet_NaN();
    double band_max = std::numeric_limits<double>::quiet_NaN();
    int max_iters = 2000;
    double tol = 1e-8;
    bool profile_sigma2 = false;                ///< solve sigma2 in closed form per step
    std::optional<std::vector<double>> start;   ///< untransformed start values
};

struct FitResult {
    std::map<std::string, double> estimates;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double band_min = 0.0;
    double band_max = 0.0;
    int nfreq = 0;
    bool invalid_model = false;              ///< cross fit failed the validity check
    std::vector<std::string> flat_params;    ///< directions the objective ignores
};

inline nlohmann::json fit_result_to_json(const FitResult& r) {
    nlohmann::json j;
    j["estimates"] = r.estimates;
    j["objective"] = r.objective;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["band"] = {r.band_min, r.band_max};
    j["nfreq"] = r.nfreq;
    j["invalid_model"] = r.invalid_model;
    j["flat_params"] = r.flat_params;
    return j;
}

inline FitResult fit_result_from_json(const nlohmann::json& j) {
    FitResult r;
    r.estimates = j.at("estimates").get<std::map<std::string, double>>();
    r.objective = j.value("objective", 0.0);
    r.iterations = j.value("iterations", 0);
    r.converged = j.value("converged", false);
    if (j.contains("band")) {
        r.band_min = j["band"][0].get<double>();
        r.band_max = j["band"][1].get<double>();
    }
    r.nfreq = j.value("nfreq", 0);
    r.invalid_model = j.value("invalid_model", false);
    if (j.contains("flat_params")) r.flat_params = j["flat_params"].get<std::vector<std::string>>();
    return r;
}

namespace detail {

inline std::vector<RadialSample> band_filter(const std::vector<RadialSample>& samples, FitConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("fit: no samples");
    if (std::isnan(cfg.band_min) || std::isnan(cfg.band_max)) {
        std::vector<double> radii;
        radii.reserve(samples.size());
        for (const auto& s : samples)
            if (s.radius > 0.0) radii.push_back(s.radius);
        if (radii.empty()) throw std::invalid_argument("fit: band contains no frequencies");
        std::sort(radii.begin(), radii.end());
        if (std::isnan(cfg.band_min)) cfg.band_min = 0.5 * radii.front();
        if (std::isnan(cfg.band_max))
            cfg.band_max = radii[static_cast<std::size_t>(0.9 * (radii.size() - 1))];
    }
    std::vector<RadialSample> band;
    for (const auto& s : samples)
        if (s.radius >= cfg.band_min && s.radius <= cfg.band_max) band.push_back(s);
    if (band.empty()) throw std::invalid_argument("fit: band contains no frequencies");
    return band;
}

/// Flat directions: transformed coordinates whose +-5% perturbation moves the
/// objective by less than a rounding allowance.
inline std::vector<std::string> detect_flat(const std::function<double(const std::vector<double>&)>& f,
                                            const std::vector<double>& t, double fbest,
                                            const std::vector<std::string>& names) {
    std::vector<std::string> flat;
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::vector<double> tp = t;
        const double step = 0.05 * (std::abs(t[i]) > 1.0 ? std::abs(t[i]) : 1.0);
        tp[i] = t[i] + step;
        const double fplus = f(tp);
        tp[i] = t[i] - step;
        const double fminus = f(tp);
        const double move = std::max(std::abs(fplus - fbest), std::abs(fminus - fbest));
        if (move <= 1e-9 * (1.0 + std::abs(fbest))) flat.push_back(names[i]);
    }
    return flat;
}

}  // namespace detail

/// Samples of the averaged smoothed diagonal periodogram of one variable.
inline std::vector<RadialSample> diagonal_samples(const SpectralMatrixField& pg, int var) {
    std::vector<RadialSample> out(pg.size());
    for (std::int64_t k = 0; k < pg.size(); ++k)
        out[k] = {pg.freqs().radius(k), pg.entry(k, var, var).real()};
    return out;
}

inline std::vector<RadialSample> coherence_samples(const CoherenceSummary& s) {
    std::vector<RadialSample> out(s.freqs.size());
    for (std::int64_t k = 0; k < s.freqs.size(); ++k) out[k] = {s.freqs.radius(k), s.coh2[k]};
    return out;
}

/// Sign convention for rho: the real part of the averaged cross-spectrum at
/// the lowest nonzero frequency, which the phase column carries.
inline double rho_sign_from_summary(const CoherenceSummary& s) {
    double best_r = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    for (std::int64_t k = 0; k < s.freqs.size(); ++k) {
        const double r = s.freqs.radius(k);
        if (r <= 0.0 || s.zero_power[k]) continue;
        if (r < best_r) {
            best_r = r;
            sign = std::cos(s.phase[k]) < 0.0 ? -1.0 : 1.0;
        }
    }
    return sign;
}

/// Fit (sigma2, nu, a) by minimizing
///   sum_band (log matern_sdf(r; sigma2, nu, a) - log avg_pg(r))^2.
/// Every band sample must be strictly positive.
inline FitResult fit_matern_marginal(const std::vector<RadialSample>& samples, int dim, FitConfig cfg = {}) {
    auto band = detail::band_filter(samples, cfg);
    for (const auto& s : band)
        if (!(s.value > 0.0))
            throw std::domain_error("fit_matern_marginal: nonpositive periodogram value in band");

    std::vector<double> logv(band.size());
    for (std::size_t i = 0; i < band.size(); ++i) logv[i] = std::log(band[i].value);

    // log sigma2 has a closed-form optimum given (nu, a); used for the start
    // and for the profiled variant.
    auto profile_lsig = [&](double nu, double a) {
        const MaternParams unit{1.0, nu, a};
        double acc = 0.0;
        for (std::size_t i = 0; i < band.size(); ++i)
            acc += logv[i] - std::log(matern_sdf_radial(band[i].radius, unit, dim));
        return acc / static_cast<double>(band.size());
    };

    const bool profiled = cfg.profile_sigma2;
    auto objective_full = [&](double lsig, double lnu, double la) {
        const MaternParams p{std::exp(lsig), std::exp(lnu), std::exp(la)};
        double acc = 0.0;
        for (std::size_t i = 0; i < band.size(); ++i) {
            const double d = std::log(matern_sdf_radial(band[i].radius, p, dim)) - logv[i];
            acc += d * d;
        }
        return acc;
    };
    auto objective = [&](const std::vector<double>& t) {
        if (profiled) return objective_full(profile_lsig(std::exp(t[0]), std::exp(t[1])), t[0], t[1]);
        return objective_full(t[0], t[1], t[2]);
    };

    std::vector<double> t0;
    if (cfg.start) {
        const auto& s = *cfg.start;
        if (s.size() != 3) throw std::invalid_argument("fit_matern_marginal: start must be (sigma2, nu, a)");
        if (profiled)
            t0 = {std::log(s[1]), std::log(s[2])};
        else
            t0 = {std::log(s[0]), std::log(s[1]), std::log(s[2])};
    } else {
        double rsum = 0.0;
        for (const auto& s : band) rsum += s.radius;
        const double a0 = rsum / static_cast<double>(band.size());
        const double nu0 = 1.0;
        const double lsig0 = profile_lsig(nu0, a0);
        if (profiled)
            t0 = {std::log(nu0), std::log(a0)};
        else
            t0 = {lsig0, std::log(nu0), std::log(a0)};
    }

    NelderMeadOptions opt;
    opt.max_iters = cfg.max_iters;
    opt.tol = cfg.tol;
    NelderMeadResult nm = nelder_mead(objective, t0, opt);
    // One polish pass from the found optimum tightens zero-noise recovery.
    NelderMeadOptions polish = opt;
    polish.initial_step = 0.01;
    const NelderMeadResult nm2 = nelder_mead(objective, nm.x, polish);
    const int iters = nm.iterations + nm2.iterations;
    if (nm2.value <= nm.value) nm = nm2;

    FitResult res;
    double lsig, lnu, la;
    if (profiled) {
        lnu = nm.x[0];
        la = nm.x[1];
        lsig = profile_lsig(std::exp(lnu), std::exp(la));
        res.flat_params = detail::detect_flat(objective, nm.x, nm.value, {"nu", "a"});
    } else {
        lsig = nm.x[0];
        lnu = nm.x[1];
        la = nm.x[2];
        res.flat_params = detail::detect_flat(objective, nm.x, nm.value, {"sigma2", "nu", "a"});
    }
    res.estimates["sigma2"] = std::exp(lsig);
    res.estimates["nu"] = std::exp(lnu);
    res.estimates["a"] = std::exp(la);
    res.objective = nm.value;
    res.iterations = iters;
    res.converged = nm.converged;
    res.band_min = cfg.band_min;
    res.band_max = cfg.band_max;
    res.nfreq = static_cast<int>(band.size());
    return res;
}

/// Fixed marginal parameters for the cross fit.
struct FixedMarginals {
    MaternParams m1;
    MaternParams m2;
};

/// Fit (rho, nu12, a12) with the marginals held fixed by minimizing
///   sum_band (mm_coherence2(r; rho, nu12, a12) - coh2(r))^2.
/// The magnitude of rho is identified; its sign comes from rho_sign (use
/// rho_sign_from_summary).  The result is flagged invalid_model when the
/// fitted parameters fail the spectral validity check.
inline FitResult fit_matern_cross(const std::vector<RadialSample>& samples, const FixedMarginals& marg,
                                  int dim, FitConfig cfg = {}, double rho_sign = 1.0) {
    auto band = detail::band_filter(samples, cfg);

    auto model_for = [&](double rho, double nu12, double a12) {
        return MultiMaternModel::bivariate(dim, marg.m1, marg.m2, CrossMaternParams{rho, nu12, a12});
    };
    auto objective = [&](const std::vector<double>& t) {
        const double rho = std::tanh(t[0]);
        const MultiMaternModel m = model_for(rho, std::exp(t[1]), std::exp(t[2]));
        double acc = 0.0;
        for (const auto& s : band) {
            const double d = mm_coherence2_radial(m, 0, 1, s.radius) - s.value;
            acc += d * d;
        }
        return acc;
    };

    std::vector<double> t0;
    if (cfg.start) {
        const auto& s = *cfg.start;
        if (s.size() != 3) throw std::invalid_argument("fit_matern_cross: start must be (rho, nu12, a12)");
        t0 = {std::atanh(std::clamp(std::abs(s[0]), 1e-6, 1.0 - 1e-12)), std::log(s[1]), std::log(s[2])};
    } else {
        double msum = 0.0;
        for (const auto& s : band) msum += std::sqrt(std::max(s.value, 0.0));
        const double rho0 = std::clamp(msum / static_cast<double>(band.size()), 0.05, 0.95);
        const double nu0 = 0.5 * (marg.m1.nu + marg.m2.nu);
        const double a0 = std::sqrt(marg.m1.a * marg.m2.a);
        t0 = {std::atanh(rho0), std::log(nu0), std::log(a0)};
    }

    NelderMeadOptions opt;
    opt.max_iters = cfg.max_iters;
    opt.tol = cfg.tol;
    NelderMeadResult nm = nelder_mead(objective, t0, opt);
    NelderMeadOptions polish = opt;
    polish.initial_step = 0.01;
    const NelderMeadResult nm2 = nelder_mead(objective, nm.x, polish);
    const int iters = nm.iterations + nm2.iterations;
    if (nm2.value <= nm.value) nm = nm2;

    FitResult res;
    const double rho_abs = std::abs(std::tanh(nm.x[0]));
    const double nu12 = std::exp(nm.x[1]);
    const double a12 = std::exp(nm.x[2]);
    res.estimates["rho"] = (rho_sign < 0.0 ? -1.0 : 1.0) * rho_abs;
    res.estimates["nu12"] = nu12;
    res.estimates["a12"] = a12;
    res.objective = nm.value;
    res.iterations = iters;
    res.converged = nm.converged;
    res.band_min = cfg.band_min;
    res.band_max = cfg.band_max;
    res.nfreq = static_cast<int>(band.size());
    res.flat_params = detail::detect_flat(objective, nm.x, nm.value, {"rho", "nu12", "a12"});
    res.invalid_model = !mm_validity_check(model_for(res.estimates["rho"], nu12, a12)).valid;
    return res;
}

}  // namespace speccoh
