// SPDX-License-Identifier: Apache-2.0
//
// speccoh command-line front end.
//
// Exit codes: 0 success, 2 usage error, 3 invalid model, 4 numerical failure.

#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "speccoh/speccoh.hpp"

namespace {

using namespace speccoh;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInvalidModel = 3;
constexpr int kExitNumerical = 4;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& c : split(s, ',')) out.push_back(std::stoi(c));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& c : split(s, ',')) out.push_back(std::stod(c));
    return out;
}

AnyModel load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open model file: " + path);
    nlohmann::json j;
    is >> j;
    return model_from_json(j);
}

GridSpec make_grid(const std::string& grid_arg, const std::string& spacing_arg) {
    const auto sizes = parse_int_list(grid_arg);
    std::vector<double> spacings;
    if (spacing_arg.empty())
        spacings.assign(sizes.size(), 1.0);
    else
        spacings = parse_double_list(spacing_arg);
    return GridSpec(sizes, spacings);
}

SmoothingKernel load_kernel(const std::string& spec, int dims) {
    if (spec == "box3") return SmoothingKernel::box3(dims);
    if (spec == "none") return SmoothingKernel::delta(dims);
    if (spec.rfind("custom:", 0) == 0) {
        const std::string path = spec.substr(7);
        std::ifstream is(path);
        if (!is) throw std::invalid_argument("cannot open kernel file: " + path);
        nlohmann::json j;
        is >> j;
        SmoothingKernel k;
        k.shape = j.at("shape").get<std::vector<int>>();
        k.weights = j.at("weights").get<std::vector<double>>();
        const std::string b = j.value("boundary", "periodic");
        k.boundary = b == "truncate" ? SmoothingKernel::Boundary::truncate_renormalize
                                     : SmoothingKernel::Boundary::periodic;
        k.validate();
        return k;
    }
    throw std::invalid_argument("unknown kernel spec '" + spec + "' (use box3 or custom:file)");
}

std::pair<int, int> parse_pair(const std::string& s) {
    const auto v = parse_int_list(s);
    if (v.size() != 2 || v[0] < 1 || v[1] < 1)
        throw std::invalid_argument("--pair needs two 1-based variable indices, e.g. 1,2");
    return {v[0] - 1, v[1] - 1};
}

std::pair<double, double> parse_band(const std::string& s) {
    const auto v = split(s, ':');
    if (v.size() != 2) throw std::invalid_argument("--band needs rmin:rmax");
    return {std::stod(v[0]), std::stod(v[1])};
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Csv read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open CSV: " + path);
    Csv csv;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty CSV: " + path);
    csv.header = split(line, ',');
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& c : split(line, ',')) row.push_back(std::stod(c));
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

int count_freq_columns(const std::vector<std::string>& header) {
    int d = 0;
    while (d < static_cast<int>(header.size()) && header[d] == "w" + std::to_string(d + 1)) ++d;
    if (d == 0) throw std::invalid_argument("CSV lacks w1,... frequency columns");
    return d;
}

// --- subcommand implementations -------------------------------------------

int cmd_model_curve(const std::string& model_path, const std::string& pair_arg, double rmin, double rmax,
                    int npoints, const std::string& out) {
    const AnyModel model = load_model(model_path);
    const ValidityResult val = model_validity_check(model);
    if (!val.valid) {
        std::cerr << "invalid model: " << val.constraint;
        if (val.witness) {
            std::cerr << " (witness frequency";
            for (double w : *val.witness) std::cerr << " " << w;
            std::cerr << ")";
        }
        std::cerr << "\n";
        return kExitInvalidModel;
    }
    auto [i, j] = parse_pair(pair_arg);
    if (i >= model_nvars(model) || j >= model_nvars(model))
        throw std::invalid_argument("pair index exceeds model variables");

    std::ofstream os(out);
    if (!os) throw std::invalid_argument("cannot open for writing: " + out);
    os.precision(17);
    os << "r,coh2,abs_coh,phase,gain\n";
    for (int k = 0; k < npoints; ++k) {
        const double r = std::exp(std::log(rmin) + (std::log(rmax) - std::log(rmin)) * k /
                                  std::max(1, npoints - 1));
        const Eigen::MatrixXcd f = model_spectral_matrix_radial(model, r);
        const PairSpectrum ps{f(i, i).real(), f(j, j).real(), f(i, j)};
        double phase = 0.0, gain = 0.0;
        if (ps.f11 > 0.0) {
            const PhaseGain pg = pair_phase_gain(ps);
            phase = pg.phase;
            gain = pg.gain;
        }
        os << r << "," << ps.coherence2() << "," << ps.abs_coherence() << "," << phase << "," << gain
           << "\n";
    }
    return kExitOk;
}

int cmd_simulate(const std::string& model_path, const std::string& grid_arg, const std::string& spacing_arg,
                 int reps, std::uint64_t seed, const std::string& method, const std::string& out) {
    SimRequest req{load_model(model_path), make_grid(grid_arg, spacing_arg), reps, seed,
                   method == "dense" ? SimMethod::dense : SimMethod::circulant};
    const ValidityResult val = model_validity_check(req.model);
    if (!val.valid) {
        std::cerr << "invalid model: " << val.constraint << "\n";
        return kExitInvalidModel;
    }
    write_field(simulate(req), out);
    return kExitOk;
}

MultiField load_input_field(const std::string& path, bool standardize, std::optional<double> detrend_bw) {
    MultiField f = path.size() > 4 && path.substr(path.size() - 4) == ".csv" ? read_field_csv(path)
                                                                             : read_field(path);
    if (detrend_bw) f = nw_detrend(f, *detrend_bw);
    if (standardize) f = standardize_anomalies(f);
    return f;
}

int cmd_periodogram(const std::string& in, const std::string& var_arg, const std::string& pair_arg,
                    const std::string& kernel_arg, bool standardize, std::optional<double> detrend_bw,
                    const std::string& out) {
    const MultiField f = load_input_field(in, standardize, detrend_bw);
    const int d = f.grid().dims();
    const bool raw = kernel_arg == "none";
    const SmoothingKernel kernel = raw ? SmoothingKernel::delta(d) : load_kernel(kernel_arg, d);

    // Replicate-averaged (optionally smoothed) periodogram.
    SpectralMatrixField avg(FrequencyGrid(f.grid()), f.nvars(), !raw, kAveragedRep);
    for (int rep = 0; rep < f.nreps(); ++rep) {
        SpectralMatrixField pg = periodogram(f, rep);
        if (!raw) pg = smooth(pg, kernel);
        for (std::size_t k = 0; k < pg.data().size(); ++k) avg.data()[k] += pg.data()[k];
    }
    for (auto& z : avg.data()) z /= static_cast<double>(f.nreps());

    std::ofstream os(out);
    if (!os) throw std::invalid_argument("cannot open for writing: " + out);
    os.precision(17);
    if (!pair_arg.empty()) {
        auto [i, j] = parse_pair(pair_arg);
        for (int ax = 0; ax < d; ++ax) os << "w" << (ax + 1) << ",";
        os << "re,im\n";
        for (std::int64_t k = 0; k < avg.size(); ++k) {
            for (double w : avg.freqs().frequency(k)) os << w << ",";
            os << avg.entry(k, i, j).real() << "," << avg.entry(k, i, j).imag() << "\n";
        }
    } else {
        const int v = var_arg.empty() ? 0 : std::stoi(var_arg) - 1;
        if (v < 0 || v >= f.nvars()) throw std::invalid_argument("--var out of range");
        for (int ax = 0; ax < d; ++ax) os << "w" << (ax + 1) << ",";
        os << "pgram\n";
        for (std::int64_t k = 0; k < avg.size(); ++k) {
            for (double w : avg.freqs().frequency(k)) os << w << ",";
            os << avg.entry(k, v, v).real() << "\n";
        }
    }
    return kExitOk;
}

int cmd_coherence(const std::string& in, const std::string& pair_arg, const std::string& kernel_arg,
                  int lag, bool standardize, std::optional<double> detrend_bw, bool avg_spectra,
                  const std::string& out) {
    const MultiField f = load_input_field(in, standardize, detrend_bw);
    auto [i, j] = parse_pair(pair_arg);
    const SmoothingKernel kernel = load_kernel(kernel_arg, f.grid().dims());
    ReplicateCoherenceOptions opts;
    opts.average_spectra_first = avg_spectra;
    const CoherenceSummary s =
        replicate_coherence(f, lag_pairing(f.nreps(), lag), i, j, kernel, opts);
    write_coherence_csv(s, out);
    return kExitOk;
}

int cmd_fit(const std::string& stage, const std::vector<std::string>& inputs, const std::string& marginals,
            const std::string& band_arg, const std::string& out) {
    FitConfig cfg;
    if (!band_arg.empty()) {
        auto [lo, hi] = parse_band(band_arg);
        cfg.band_min = lo;
        cfg.band_max = hi;
    }
    nlohmann::json results = nlohmann::json::array();

    if (stage == "marginal") {
        for (const auto& in : inputs) {
            const Csv csv = read_csv(in);
            const int d = count_freq_columns(csv.header);
            if (csv.header.size() < static_cast<std::size_t>(d) + 1)
                throw std::invalid_argument("marginal fit CSV needs a pgram column");
            std::vector<RadialSample> samples;
            for (const auto& row : csv.rows) {
                double r2 = 0.0;
                for (int ax = 0; ax < d; ++ax) r2 += row[ax] * row[ax];
                samples.push_back({std::sqrt(r2), row[d]});
            }
            const FitResult res = fit_matern_marginal(samples, d, cfg);
            nlohmann::json rj = fit_result_to_json(res);
            rj["input"] = in;
            results.push_back(rj);
            if (!res.converged) std::cerr << "warning: fit did not converge for " << in << "\n";
        }
    } else if (stage == "cross") {
        const auto mfiles = split(marginals, ',');
        if (mfiles.size() != 2)
            throw std::invalid_argument("--marginals needs two fit-result JSON files, comma separated");
        FixedMarginals marg;
        for (int k = 0; k < 2; ++k) {
            std::ifstream is(mfiles[k]);
            if (!is) throw std::invalid_argument("cannot open marginal fit: " + mfiles[k]);
            nlohmann::json j;
            is >> j;
            const FitResult r = fit_result_from_json(j);
            MaternParams p{r.estimates.at("sigma2"), r.estimates.at("nu"), r.estimates.at("a")};
            (k == 0 ? marg.m1 : marg.m2) = p;
        }
        for (const auto& in : inputs) {
            const Csv csv = read_csv(in);
            const int d = count_freq_columns(csv.header);
            if (csv.header.size() < static_cast<std::size_t>(d) + 4)
                throw std::invalid_argument("cross fit CSV needs coh2,abs_coh,phase,gain columns");
            std::vector<RadialSample> samples;
            double lowest_r = std::numeric_limits<double>::infinity();
            double sign = 1.0;
            for (const auto& row : csv.rows) {
                double r2 = 0.0;
                for (int ax = 0; ax < d; ++ax) r2 += row[ax] * row[ax];
                const double r = std::sqrt(r2);
                samples.push_back({r, row[d]});
                const double gain = row[d + 3];
                if (r > 0.0 && gain > 0.0 && r < lowest_r) {
                    lowest_r = r;
                    sign = std::cos(row[d + 2]) < 0.0 ? -1.0 : 1.0;
                }
            }
            const FitResult res = fit_matern_cross(samples, marg, d, cfg, sign);
            nlohmann::json rj = fit_result_to_json(res);
            rj["input"] = in;
            results.push_back(rj);
            if (res.invalid_model)
                std::cerr << "warning: fitted cross parameters fail the validity check for " << in << "\n";
        }
        // Table-style summary for batch fits over horizons.
        std::cout << "input\trho\ta12\tnu12\n";
        for (const auto& rj : results) {
            const auto& est = rj["estimates"];
            std::cout << rj["input"].get<std::string>() << "\t" << est["rho"].get<double>() << "\t"
                      << est["a12"].get<double>() << "\t" << est["nu12"].get<double>() << "\n";
        }
    } else {
        throw std::invalid_argument("--stage must be marginal or cross");
    }

    std::ofstream os(out);
    if (!os) throw std::invalid_argument("cannot open for writing: " + out);
    os << (results.size() == 1 ? results[0] : results).dump(2) << "\n";
    return kExitOk;
}

int cmd_filter_experiment(const std::string& model_path, const std::string& grid_arg,
                          const std::string& spacing_arg, int reps, std::uint64_t seed,
                          const std::string& out) {
    const AnyModel model = load_model(model_path);
    const ValidityResult val = model_validity_check(model);
    if (!val.valid) {
        std::cerr << "invalid model: " << val.constraint << "\n";
        return kExitInvalidModel;
    }
    const FilteredCorrelation fc =
        filtered_correlation(model, make_grid(grid_arg, spacing_arg), reps, seed);
    std::ofstream os(out);
    if (!os) throw std::invalid_argument("cannot open for writing: " + out);
    os.precision(17);
    os << "filter,corr,nreps\n";
    os << "low," << fc.low_corr << "," << fc.nreps << "\n";
    os << "high," << fc.high_corr << "," << fc.nreps << "\n";
    return kExitOk;
}

int cmd_validate(const std::string& model_path) {
    const AnyModel model = load_model(model_path);
    const ValidityResult val = model_validity_check(model);
    if (val.valid) {
        std::cout << "valid (sup squared coherence " << val.sup_coh2 << ")\n";
        return kExitOk;
    }
    std::cout << "invalid: " << val.constraint << "\n";
    if (val.witness) {
        std::cout << "witness frequency:";
        for (double w : *val.witness) std::cout << " " << w;
        std::cout << "\n";
    }
    return kExitInvalidModel;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"speccoh: spectral coherence analysis for multivariate random fields on grids"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 2 usage error, 3 invalid model, 4 numerical failure.\n"
               "SPECCOH_THREADS caps the worker count.");

    std::string model_path, grid_arg, spacing_arg, out, pair_arg, var_arg, kernel_arg = "box3";
    std::string band_arg, method = "circulant", stage, marginals, detrend_arg;
    std::vector<std::string> inputs;
    int reps = 1, npoints = 200, lag = 0;
    std::uint64_t seed = 0;
    double rmin = 1e-2, rmax = 1e2;
    bool standardize = false, avg_spectra = false;

    auto* curve = app.add_subcommand("model-curve", "coherence/phase/gain of a model over ||omega||");
    curve->add_option("--model", model_path, "model JSON file")->required();
    curve->add_option("--pair", pair_arg, "variable pair, 1-based, e.g. 1,2")->default_val("1,2");
    curve->add_option("--rmin", rmin, "smallest radius");
    curve->add_option("--rmax", rmax, "largest radius");
    curve->add_option("--npoints", npoints, "number of log-spaced radii");
    curve->add_option("--out", out, "output CSV")->required();

    auto* sim = app.add_subcommand("simulate", "draw Gaussian replicates from a model");
    sim->add_option("--model", model_path)->required();
    sim->add_option("--grid", grid_arg, "per-axis sizes, e.g. 64,64")->required();
    sim->add_option("--spacing", spacing_arg, "per-axis spacings, e.g. 0.125,0.125");
    sim->add_option("--reps", reps);
    sim->add_option("--seed", seed);
    sim->add_option("--method", method, "dense or circulant");
    sim->add_option("--out", out, "output MFLD1 file")->required();

    auto* pg = app.add_subcommand("periodogram", "replicate-averaged (smoothed) periodogram");
    pg->add_option("--in", model_path, "input MFLD1 or CSV field")->required();
    pg->add_option("--var", var_arg, "1-based variable for a diagonal entry");
    pg->add_option("--pair", pair_arg, "1-based pair for a cross entry");
    pg->add_option("--kernel", kernel_arg, "box3, none, or custom:file");
    pg->add_flag("--standardize", standardize, "standardized anomalies first");
    pg->add_option("--detrend", detrend_arg, "nw:bandwidth detrending first");
    pg->add_option("--out", out)->required();

    auto* coh = app.add_subcommand("coherence", "replicate-averaged coherence of a pair");
    coh->add_option("--in", model_path)->required();
    coh->add_option("--pair", pair_arg)->required();
    coh->add_option("--kernel", kernel_arg, "box3 or custom:file");
    coh->add_option("--lag", lag, "pair replicate r of the first variable with r-lag of the second");
    coh->add_flag("--standardize", standardize);
    coh->add_option("--detrend", detrend_arg, "nw:bandwidth");
    coh->add_flag("--avg-spectra", avg_spectra, "average spectra before the quotient");
    coh->add_option("--out", out)->required();

    auto* fit = app.add_subcommand("fit", "least-squares spectral fits");
    fit->add_option("--stage", stage, "marginal or cross")->required();
    fit->add_option("--in", inputs, "input CSV (repeatable for batch cross fits)")->required();
    fit->add_option("--marginals", marginals, "two marginal fit JSONs (cross stage)");
    fit->add_option("--band", band_arg, "rmin:rmax fit band");
    fit->add_option("--out", out)->required();

    auto* fexp = app.add_subcommand("filter-experiment", "low/high-pass filtered correlations");
    fexp->add_option("--model", model_path)->required();
    fexp->add_option("--grid", grid_arg)->required();
    fexp->add_option("--spacing", spacing_arg);
    fexp->add_option("--reps", reps);
    fexp->add_option("--seed", seed);
    fexp->add_option("--out", out)->required();

    auto* vm = app.add_subcommand("validate-model", "spectral validity check");
    vm->add_option("--model", model_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    std::optional<double> detrend_bw;
    try {
        if (!detrend_arg.empty()) {
            if (detrend_arg.rfind("nw:", 0) != 0)
                throw std::invalid_argument("--detrend expects nw:bandwidth");
            detrend_bw = std::stod(detrend_arg.substr(3));
        }
        if (curve->parsed()) return cmd_model_curve(model_path, pair_arg, rmin, rmax, npoints, out);
        if (sim->parsed()) return cmd_simulate(model_path, grid_arg, spacing_arg, reps, seed, method, out);
        if (pg->parsed())
            return cmd_periodogram(model_path, var_arg, pair_arg, kernel_arg, standardize, detrend_bw, out);
        if (coh->parsed())
            return cmd_coherence(model_path, pair_arg, kernel_arg, lag, standardize, detrend_bw,
                                 avg_spectra, out);
        if (fit->parsed()) return cmd_fit(stage, inputs, marginals, band_arg, out);
        if (fexp->parsed()) return cmd_filter_experiment(model_path, grid_arg, spacing_arg, reps, seed, out);
        if (vm->parsed()) return cmd_validate(model_path);
    } catch (const SimulationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
