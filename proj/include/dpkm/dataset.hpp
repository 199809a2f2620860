#ifndef DPKM_DATASET_HPP
#define DPKM_DATASET_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpkm/mechanisms.hpp"
#include "dpkm/rng.hpp"

namespace dpkm {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// N x d row-major point matrix. r > 0 means every coordinate lies in [-r, r];
// r == 0 marks raw (unnormalized) data.
struct Dataset {
    std::vector<double> points;
    std::size_t n = 0;
    std::size_t d = 0;
    double r = 0.0;
    std::string provenance;

    double at(std::size_t i, std::size_t j) const { return points[i * d + j]; }
    std::span<const double> row(std::size_t i) const { return {points.data() + i * d, d}; }
};

// Ordered list of k centroids in d dimensions, row-major.
struct Centroids {
    std::vector<double> points;
    std::size_t k = 0;
    std::size_t d = 0;

    double at(std::size_t j, std::size_t i) const { return points[j * d + i]; }
    double& at(std::size_t j, std::size_t i) { return points[j * d + i]; }
    std::span<const double> row(std::size_t j) const { return {points.data() + j * d, d}; }
};

namespace detail {

inline bool parse_double(std::string_view field, double& out) {
    // trim surrounding whitespace
    std::size_t b = 0, e = field.size();
    while (b < e && std::isspace(static_cast<unsigned char>(field[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(field[e - 1]))) --e;
    if (b == e) return false;
    const char* first = field.data() + b;
    const char* last = field.data() + e;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

} // namespace detail

// Comma-separated decimal numbers, optional single header line (detected when
// the first row fails numeric parse), LF or CRLF. Errors name the line.
inline Dataset load_csv(const std::string& path, int expected_d = -1) {
    std::ifstream in(path);
    if (!in) throw IoError("load_csv: cannot open '" + path + "'");

    Dataset ds;
    ds.provenance = path;
    std::string line;
    std::size_t lineno = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_fields(line);
        std::vector<double> row(fields.size());
        bool ok = true;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (!detail::parse_double(fields[j], row[j])) { ok = false; break; }
        }
        if (!ok) {
            if (first_row) { first_row = false; continue; } // header line
            throw FormatError("load_csv: non-numeric field at line " + std::to_string(lineno) +
                              " of '" + path + "'");
        }
        if (ds.n == 0) {
            ds.d = row.size();
            if (expected_d > 0 && ds.d != static_cast<std::size_t>(expected_d))
                throw FormatError("load_csv: expected " + std::to_string(expected_d) +
                                  " columns, got " + std::to_string(ds.d) +
                                  " at line " + std::to_string(lineno));
        } else if (row.size() != ds.d) {
            throw FormatError("load_csv: ragged row at line " + std::to_string(lineno) +
                              " (" + std::to_string(row.size()) + " columns, expected " +
                              std::to_string(ds.d) + ")");
        }
        ds.points.insert(ds.points.end(), row.begin(), row.end());
        ++ds.n;
        first_row = false;
    }
    if (ds.n == 0) throw FormatError("load_csv: no data rows in '" + path + "'");
    return ds;
}

inline void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_csv: cannot open '" + path + "' for writing");
    out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t j = 0; j < ds.d; ++j) {
            if (j) out << ',';
            out << ds.at(i, j);
        }
        out << '\n';
    }
    if (!out) throw IoError("write_csv: write failed for '" + path + "'");
}

// Affine per-dimension map of observed [min, max] onto [-r, r].
// Constant columns map to 0.
inline Dataset normalize(const Dataset& raw, double r) {
    if (!(r > 0.0)) throw ParameterError("normalize: r must be positive");
    if (raw.n == 0) throw ParameterError("normalize: empty dataset");
    Dataset out = raw;
    out.r = r;
    for (std::size_t j = 0; j < raw.d; ++j) {
        double lo = raw.at(0, j), hi = raw.at(0, j);
        for (std::size_t i = 1; i < raw.n; ++i) {
            lo = std::min(lo, raw.at(i, j));
            hi = std::max(hi, raw.at(i, j));
        }
        for (std::size_t i = 0; i < raw.n; ++i) {
            double v;
            if (hi > lo) {
                v = -r + 2.0 * r * (raw.at(i, j) - lo) / (hi - lo);
                v = std::clamp(v, -r, r);
            } else {
                v = 0.0;
            }
            out.points[i * raw.d + j] = v;
        }
    }
    return out;
}

struct SyntheticSpec {
    std::size_t d = 2;
    std::size_t k = 2;
    std::size_t n = 1000;
    double separation = 0.5;
    double cluster_std = 0.0; // 0 -> separation / 6
    double r = 1.0;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    Dataset data;
    Centroids true_centers;
};

// k well-separated isotropic Gaussian clusters of (near-)equal size inside
// [-r, r]^d. Centers are rejection-sampled with pairwise distance >= separation
// inside the 3-sigma-inset cube; points are clamped into the cube.
inline SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    if (spec.k == 0 || spec.n == 0 || spec.d == 0)
        throw ParameterError("gen_synthetic: d, k, N must be positive");
    if (spec.k > spec.n) throw ParameterError("gen_synthetic: k must be <= N");
    if (!(spec.separation > 0.0)) throw ParameterError("gen_synthetic: separation must be positive");
    const double sigma = spec.cluster_std > 0.0 ? spec.cluster_std : spec.separation / 6.0;
    const double inset = spec.r - 3.0 * sigma;
    if (!(inset > 0.0))
        throw ParameterError("gen_synthetic: cluster_std too large for the domain");

    Rng rng(spec.seed);
    Centroids centers;
    centers.k = spec.k;
    centers.d = spec.d;
    centers.points.assign(spec.k * spec.d, 0.0);

    const int kMaxAttempts = 10000;
    int attempts = 0;
    std::size_t placed = 0;
    std::vector<double> cand(spec.d);
    while (placed < spec.k) {
        if (attempts >= kMaxAttempts)
            throw ParameterError("gen_synthetic: infeasible spec, center placement failed after " +
                                 std::to_string(kMaxAttempts) + " rejection attempts");
        ++attempts;
        for (std::size_t i = 0; i < spec.d; ++i) cand[i] = rng.uniform(-inset, inset);
        bool ok = true;
        for (std::size_t j = 0; j < placed && ok; ++j) {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < spec.d; ++i) {
                const double diff = cand[i] - centers.at(j, i);
                dist2 += diff * diff;
            }
            if (dist2 < spec.separation * spec.separation) ok = false;
        }
        if (!ok) continue;
        for (std::size_t i = 0; i < spec.d; ++i) centers.at(placed, i) = cand[i];
        ++placed;
    }

    Dataset ds;
    ds.n = spec.n;
    ds.d = spec.d;
    ds.r = spec.r;
    ds.provenance = "synthetic";
    ds.points.reserve(spec.n * spec.d);
    const std::size_t base = spec.n / spec.k;
    const std::size_t remainder = spec.n % spec.k;
    for (std::size_t j = 0; j < spec.k; ++j) {
        const std::size_t size = base + (j < remainder ? 1 : 0);
        for (std::size_t p = 0; p < size; ++p) {
            for (std::size_t i = 0; i < spec.d; ++i) {
                double v = rng.gaussian(centers.at(j, i), sigma);
                ds.points.push_back(std::clamp(v, -spec.r, spec.r));
            }
        }
    }
    return {std::move(ds), std::move(centers)};
}

} // namespace dpkm

#endif // DPKM_DATASET_HPP
