#ifndef DPKM_EUGKM_HPP
#define DPKM_EUGKM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/kmeans.hpp"
#include "dpkm/mechanisms.hpp"

namespace dpkm {

// Uniform grid of m^d equal-width cells tiling [-r, r]^d. Cells are half-open
// [low, high) per dimension, except the top cell which is closed, so every
// point maps to exactly one cell.
struct Grid {
    std::size_t d = 0;
    std::size_t m = 1;
    double r = 1.0;

    double cell_width() const { return 2.0 * r / static_cast<double>(m); }

    std::size_t total_cells() const {
        std::size_t total = 1;
        for (std::size_t i = 0; i < d; ++i) total *= m;
        return total;
    }

    std::size_t axis_index(double x) const {
        const double pos = (x + r) / cell_width();
        auto idx = static_cast<std::ptrdiff_t>(std::floor(pos));
        idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(m) - 1);
        return static_cast<std::size_t>(idx);
    }

    // row-major flat index of the cell containing x
    std::size_t cell_index(std::span<const double> x) const {
        std::size_t flat = 0;
        for (std::size_t i = 0; i < d; ++i) flat = flat * m + axis_index(x[i]);
        return flat;
    }

    void cell_center(std::size_t flat, std::span<double> out) const {
        const double w = cell_width();
        for (std::size_t i = d; i-- > 0;) {
            const std::size_t axis = flat % m;
            flat /= m;
            out[i] = -r + (static_cast<double>(axis) + 0.5) * w;
        }
    }
};

// Published noisy histogram: real-valued (possibly negative) per-cell counts.
struct Synopsis {
    Grid grid;
    std::vector<double> counts;
    double eps_used = 0.0;
};

// Cell-count target from the grid-sizing rule: (N * eps / theta)^(2d/(2+d)).
inline double choose_M(std::size_t n, double eps, std::size_t d, double theta) {
    if (n == 0 || !(eps > 0.0) || !(theta > 0.0) || d == 0)
        throw ParameterError("choose_M: N, eps, theta, d must be positive");
    const double dd = static_cast<double>(d);
    return std::pow(static_cast<double>(n) * eps / theta, 2.0 * dd / (2.0 + dd));
}

// Per-dimension side m = max(1, ceil(M^(1/d))), so m^d >= M_target.
inline Grid grid_layout(std::size_t d, double r, double m_target) {
    if (m_target < 1.0) throw ParameterError("grid_layout: M_target must be >= 1");
    Grid g;
    g.d = d;
    g.r = r;
    const double side = std::pow(m_target, 1.0 / static_cast<double>(d));
    g.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(side - 1e-9)));
    return g;
}

// Noisy count per cell with Lap(1/eps) noise; counts are neither rounded nor
// truncated. One point affects exactly one cell, so publishing the whole grid
// consumes eps once (parallel composition).
inline Synopsis publish_synopsis(const Dataset& data, const Grid& grid, double eps,
                                 Rng& rng, Budget& budget) {
    if (data.d != grid.d) throw ParameterError("publish_synopsis: dimension mismatch");
    budget.spend("synopsis", eps);
    Synopsis s;
    s.grid = grid;
    s.eps_used = eps;
    s.counts.assign(grid.total_cells(), 0.0);
    for (std::size_t p = 0; p < data.n; ++p)
        s.counts[grid.cell_index(data.row(p))] += 1.0;
    const double scale = 1.0 / eps;
    for (double& c : s.counts) c += laplace_sample(scale, rng);
    return s;
}

// k-means over the synopsis: each cell acts as its center point weighted by
// its signed noisy count. A cluster whose weight sum is below 0.5 keeps its
// previous centroid for the iteration.
inline Centroids synopsis_kmeans(const Synopsis& s, const Centroids& init,
                                 std::size_t max_iter = 100, double tol = -1.0) {
    if (s.grid.d != init.d) throw ParameterError("synopsis_kmeans: dimension mismatch");
    if (tol < 0.0) tol = 1e-6 * s.grid.r;
    const std::size_t k = init.k;
    const std::size_t d = s.grid.d;
    Centroids current = init;
    std::vector<double> center(d), weights(k), sums(k * d);
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::fill(weights.begin(), weights.end(), 0.0);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t cell = 0; cell < s.counts.size(); ++cell) {
            s.grid.cell_center(cell, center);
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < k; ++j) {
                double dist2 = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    const double diff = center[i] - current.at(j, i);
                    dist2 += diff * diff;
                }
                if (dist2 < best) { best = dist2; best_j = j; }
            }
            const double w = s.counts[cell];
            weights[best_j] += w;
            for (std::size_t i = 0; i < d; ++i) sums[best_j * d + i] += w * center[i];
        }
        double max_disp = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (weights[j] < 0.5) continue;
            for (std::size_t i = 0; i < d; ++i) {
                const double v = sums[j * d + i] / weights[j];
                max_disp = std::max(max_disp, std::fabs(v - current.at(j, i)));
                current.at(j, i) = v;
            }
        }
        if (max_disp < tol) break;
    }
    return current;
}

// NICV relative to the synopsis: signed-weight mean squared distance of cell
// centers to their nearest centroid, denominator guarded at 1.
inline double synopsis_nicv(const Synopsis& s, const Centroids& c) {
    if (s.grid.d != c.d) throw ParameterError("synopsis_nicv: dimension mismatch");
    const std::size_t d = s.grid.d;
    std::vector<double> center(d);
    double weighted = 0.0, total_weight = 0.0;
    for (std::size_t cell = 0; cell < s.counts.size(); ++cell) {
        s.grid.cell_center(cell, center);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.k; ++j) {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = center[i] - c.at(j, i);
                dist2 += diff * diff;
            }
            best = std::min(best, dist2);
        }
        weighted += s.counts[cell] * best;
        total_weight += s.counts[cell];
    }
    return weighted / std::max(total_weight, 1.0);
}

struct EugkmOptions {
    double theta = 10.0;
    // Cap on the total number of cells; the per-dimension side shrinks to
    // floor(max_cells^(1/d)) when the sizing rule asks for more.
    std::size_t max_cells = std::size_t(1) << 20;
    std::size_t max_iter = 100;
};

struct EugkmResult {
    Centroids centroids;
    Synopsis synopsis;
};

// Non-interactive private k-means: publish one synopsis with the full eps,
// run synopsis k-means from every init set, and return the run minimizing the
// synopsis NICV (post-processing, no extra budget).
inline EugkmResult eugkm(const Dataset& data, std::size_t k, double eps,
                         const std::vector<Centroids>& init_sets, Rng& rng, Budget& budget,
                         const EugkmOptions& opts = {}) {
    if (init_sets.empty()) throw ParameterError("eugkm: need at least one init set");
    if (!(data.r > 0.0)) throw ParameterError("eugkm: dataset must be normalized (r > 0)");

    Grid grid = grid_layout(data.d, data.r, choose_M(data.n, eps, data.d, opts.theta));
    if (grid.total_cells() > opts.max_cells) {
        const double side = std::pow(static_cast<double>(opts.max_cells),
                                     1.0 / static_cast<double>(data.d));
        grid.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(side + 1e-9)));
    }

    EugkmResult result;
    result.synopsis = publish_synopsis(data, grid, eps, rng, budget);

    double best_score = std::numeric_limits<double>::infinity();
    for (const Centroids& init : init_sets) {
        Centroids c = synopsis_kmeans(result.synopsis, init, opts.max_iter);
        const double score = synopsis_nicv(result.synopsis, c);
        if (score < best_score) {
            best_score = score;
            result.centroids = std::move(c);
        }
    }
    return result;
}

// --- synopsis file format -------------------------------------------------
// line 1: "d m r eps_used"; then m^d lines of "flat_cell_index noisy_count"
// in row-major order. Doubles carry max_digits10 so the file round-trips
// bit-exactly.

inline void write_synopsis(const Synopsis& s, std::ostream& out) {
    out.precision(std::numeric_limits<double>::max_digits10);
    out << s.grid.d << ' ' << s.grid.m << ' ' << s.grid.r << ' ' << s.eps_used << '\n';
    for (std::size_t i = 0; i < s.counts.size(); ++i)
        out << i << ' ' << s.counts[i] << '\n';
}

inline void write_synopsis(const Synopsis& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_synopsis: cannot open '" + path + "'");
    write_synopsis(s, out);
    if (!out) throw IoError("write_synopsis: write failed for '" + path + "'");
}

inline Synopsis read_synopsis(std::istream& in) {
    Synopsis s;
    if (!(in >> s.grid.d >> s.grid.m >> s.grid.r >> s.eps_used))
        throw FormatError("read_synopsis: bad header line");
    const std::size_t total = s.grid.total_cells();
    s.counts.assign(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t idx;
        double count;
        if (!(in >> idx >> count) || idx != i)
            throw FormatError("read_synopsis: bad cell line " + std::to_string(i + 2));
        s.counts[i] = count;
    }
    return s;
}

inline Synopsis read_synopsis(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_synopsis: cannot open '" + path + "'");
    return read_synopsis(in);
}

} // namespace dpkm

#endif // DPKM_EUGKM_HPP
