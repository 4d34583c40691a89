// SPDX-License-Identifier: Apache-2.0
//
// Multivariate gridded fields and the MFLD1 on-disk format.

#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "speccoh/grid.hpp"
#include "json.hpp"

namespace speccoh {

struct FieldFormatError : std::runtime_error {
    explicit FieldFormatError(const std::string& m) : std::runtime_error("field format error: " + m) {}
};
struct FieldVersionError : std::runtime_error {
    explicit FieldVersionError(const std::string& m) : std::runtime_error("unsupported field version: " + m) {}
};
struct FieldSizeError : std::runtime_error {
    explicit FieldSizeError(const std::string& m) : std::runtime_error("field size mismatch: " + m) {}
};

/// p-variate complex field sampled on a GridSpec, possibly replicated.
/// Values are stored (replicate, variable, site) with sites row-major over
/// the grid axes.  A field flagged real_valued() has zero imaginary part
/// everywhere.  Instances are immutable by convention once filled.
class MultiField {
public:
    MultiField(GridSpec grid, int nvars, int nreps, bool real_valued)
        : grid_(std::move(grid)), nvars_(nvars), nreps_(nreps), real_(real_valued),
          values_(static_cast<std::size_t>(nreps) * nvars * grid_.total_points()) {
        if (nvars_ < 1 || nreps_ < 1)
            throw std::invalid_argument("MultiField: nvars and nreps must be >= 1");
    }

    const GridSpec& grid() const { return grid_; }
    int nvars() const { return nvars_; }
    int nreps() const { return nreps_; }
    bool real_valued() const { return real_; }
    std::int64_t npoints() const { return grid_.total_points(); }

    std::complex<double>& value(int rep, int var, std::int64_t site) {
        return values_[offset(rep, var, site)];
    }
    const std::complex<double>& value(int rep, int var, std::int64_t site) const {
        return values_[offset(rep, var, site)];
    }

    /// Contiguous slice of one (replicate, variable) over all sites.
    const std::complex<double>* slice(int rep, int var) const {
        return values_.data() + offset(rep, var, 0);
    }
    std::complex<double>* slice(int rep, int var) {
        return values_.data() + offset(rep, var, 0);
    }

    const std::vector<std::complex<double>>& values() const { return values_; }
    std::vector<std::complex<double>>& values() { return values_; }

private:
    std::size_t offset(int rep, int var, std::int64_t site) const {
        return (static_cast<std::size_t>(rep) * nvars_ + var) * npoints() + site;
    }

    GridSpec grid_;
    int nvars_;
    int nreps_;
    bool real_;
    std::vector<std::complex<double>> values_;
};

namespace detail {

inline void put_le_double(std::string& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

inline double get_le_double(const char* p) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i)
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace detail

/// Serialize to the MFLD1 format: one JSON header line, then raw
/// little-endian float64 pairs (re, im) in storage order; real fields store
/// only the real part.
inline void write_field(const MultiField& f, std::ostream& os) {
    nlohmann::json hdr;
    hdr["magic"] = "MFLD1";
    hdr["dims"] = f.grid().dims();
    hdr["sizes"] = f.grid().sizes();
    hdr["spacings"] = f.grid().spacings();
    hdr["nvars"] = f.nvars();
    hdr["reps"] = f.nreps();
    hdr["real"] = f.real_valued();
    os << hdr.dump() << "\n";
    std::string buf;
    buf.reserve(f.values().size() * (f.real_valued() ? 8 : 16));
    for (const auto& z : f.values()) {
        detail::put_le_double(buf, z.real());
        if (!f.real_valued()) detail::put_le_double(buf, z.imag());
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline void write_field(const MultiField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_field(f, os);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline MultiField read_field(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FieldFormatError("missing header line");
    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw FieldFormatError(std::string("header is not valid JSON: ") + e.what());
    }
    if (!hdr.contains("magic") || !hdr["magic"].is_string())
        throw FieldFormatError("header lacks magic string");
    const std::string magic = hdr["magic"];
    if (magic != "MFLD1") {
        if (magic.rfind("MFLD", 0) == 0) throw FieldVersionError(magic);
        throw FieldFormatError("unknown magic '" + magic + "'");
    }
    int dims, nvars, reps;
    bool real;
    std::vector<int> sizes;
    std::vector<double> spacings;
    try {
        dims = hdr.at("dims").get<int>();
        sizes = hdr.at("sizes").get<std::vector<int>>();
        spacings = hdr.at("spacings").get<std::vector<double>>();
        nvars = hdr.at("nvars").get<int>();
        reps = hdr.at("reps").get<int>();
        real = hdr.at("real").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw FieldFormatError(std::string("header field missing or mistyped: ") + e.what());
    }
    if (dims != static_cast<int>(sizes.size()))
        throw FieldFormatError("dims does not match sizes length");

    MultiField f(GridSpec(sizes, spacings), nvars, reps, real);
    const std::size_t nvalues = f.values().size();
    const std::size_t bytes_per = real ? 8 : 16;
    std::string buf(nvalues * bytes_per, '\0');
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(is.gcount()) != buf.size())
        throw FieldSizeError("expected " + std::to_string(nvalues) + " values, file truncated");
    if (is.peek() != std::char_traits<char>::eof())
        throw FieldSizeError("trailing bytes beyond declared value count");
    const char* p = buf.data();
    for (std::size_t i = 0; i < nvalues; ++i) {
        const double re = detail::get_le_double(p);
        p += 8;
        double im = 0.0;
        if (!real) {
            im = detail::get_le_double(p);
            p += 8;
        }
        f.values()[i] = {re, im};
    }
    return f;
}

inline MultiField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_field(is);
}

/// CSV import: header row, then rows `rep,var,i1,...,id,re[,im]` with 0-based
/// indices in any order.  Grid sizes, variable and replicate counts are
/// inferred from the maxima; every cell must appear exactly once.  Spacings
/// are not carried by the format and default to 1 unless given.
inline MultiField read_field_csv(std::istream& is, std::vector<double> spacings = {}) {
    std::string line;
    if (!std::getline(is, line)) throw FieldFormatError("empty CSV");
    const auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.push_back("");
        return out;
    };
    const std::size_t ncols = split(line).size();
    if (ncols < 4) throw FieldFormatError("CSV needs at least rep,var,i1,re columns");
    const bool has_im = [&] {
        auto hdr = split(line);
        return !hdr.empty() && (hdr.back() == "im" || hdr.back() == "imag");
    }();
    const int d = static_cast<int>(ncols) - 3 - (has_im ? 1 : 0);
    if (d < 1) throw FieldFormatError("CSV header implies zero grid axes");

    struct Row {
        int rep, var;
        std::vector<int> idx;
        std::complex<double> v;
    };
    std::vector<Row> rows;
    int max_rep = -1, max_var = -1;
    std::vector<int> max_idx(d, -1);
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != ncols)
            throw FieldFormatError("row " + std::to_string(lineno) + ": expected " +
                                   std::to_string(ncols) + " cells, got " + std::to_string(cells.size()));
        Row r;
        try {
            std::size_t c = 0;
            r.rep = std::stoi(cells[c++]);
            r.var = std::stoi(cells[c++]);
            r.idx.resize(d);
            for (int ax = 0; ax < d; ++ax) r.idx[ax] = std::stoi(cells[c++]);
            const double re = std::stod(cells[c++]);
            const double im = has_im ? std::stod(cells[c++]) : 0.0;
            r.v = {re, im};
        } catch (const std::exception&) {
            throw FieldFormatError("row " + std::to_string(lineno) + ": unparsable cell");
        }
        if (r.rep < 0 || r.var < 0) throw FieldFormatError("row " + std::to_string(lineno) + ": negative index");
        for (int ax = 0; ax < d; ++ax) {
            if (r.idx[ax] < 0) throw FieldFormatError("row " + std::to_string(lineno) + ": negative index");
            max_idx[ax] = std::max(max_idx[ax], r.idx[ax]);
        }
        max_rep = std::max(max_rep, r.rep);
        max_var = std::max(max_var, r.var);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw FieldFormatError("CSV has no data rows");

    std::vector<int> sizes(max_idx.begin(), max_idx.end());
    for (int& s : sizes) s += 1;
    if (spacings.empty()) spacings.assign(d, 1.0);
    if (static_cast<int>(spacings.size()) != d)
        throw std::invalid_argument("read_field_csv: spacing count does not match CSV axes");

    MultiField f(GridSpec(sizes, spacings), max_var + 1, max_rep + 1, !has_im);
    std::vector<char> seen(f.values().size(), 0);
    for (const auto& r : rows) {
        const std::int64_t site = f.grid().flat_index(r.idx);
        const std::size_t off = (static_cast<std::size_t>(r.rep) * f.nvars() + r.var) * f.npoints() + site;
        if (seen[off]) throw FieldSizeError("duplicate cell for rep/var/site");
        seen[off] = 1;
        f.values()[off] = r.v;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw FieldSizeError("missing cells: CSV must cover every (rep, var, site)");
    return f;
}

inline MultiField read_field_csv(const std::string& path, std::vector<double> spacings = {}) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_field_csv(is, std::move(spacings));
}

}  // namespace speccoh
