#ifndef DPKM_KMEANS_HPP
#define DPKM_KMEANS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/rng.hpp"

namespace dpkm {

// Per-point cluster labels (0-based internally).
struct Assignment {
    std::vector<std::uint32_t> labels;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

// Nearest-centroid assignment; ties broken by lowest centroid index.
inline Assignment assign(const Dataset& data, const Centroids& c) {
    if (data.d != c.d) throw ParameterError("assign: dimension mismatch");
    Assignment a;
    a.labels.resize(data.n);
    for (std::size_t p = 0; p < data.n; ++p) {
        const auto x = data.row(p);
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_j = 0;
        for (std::size_t j = 0; j < c.k; ++j) {
            const double dist = squared_distance(x, c.row(j));
            if (dist < best) {
                best = dist;
                best_j = static_cast<std::uint32_t>(j);
            }
        }
        a.labels[p] = best_j;
    }
    return a;
}

// Per-cluster coordinate means; an empty cluster keeps its previous centroid.
inline Centroids update_centroids(const Dataset& data, const Assignment& a,
                                  std::size_t k, const Centroids& previous) {
    Centroids out;
    out.k = k;
    out.d = data.d;
    out.points.assign(k * data.d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t p = 0; p < data.n; ++p) {
        const std::uint32_t j = a.labels[p];
        ++counts[j];
        for (std::size_t i = 0; i < data.d; ++i) out.at(j, i) += data.at(p, i);
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            for (std::size_t i = 0; i < data.d; ++i) out.at(j, i) = previous.at(j, i);
        } else {
            for (std::size_t i = 0; i < data.d; ++i) out.at(j, i) /= static_cast<double>(counts[j]);
        }
    }
    return out;
}

// Normalized intra-cluster variance: mean squared distance of each point to
// its nearest centroid.
inline double nicv(const Dataset& data, const Centroids& c) {
    if (data.d != c.d) throw ParameterError("nicv: dimension mismatch");
    double total = 0.0;
    for (std::size_t p = 0; p < data.n; ++p) {
        const auto x = data.row(p);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.k; ++j)
            best = std::min(best, squared_distance(x, c.row(j)));
        total += best;
    }
    return total / static_cast<double>(data.n);
}

// Lloyd's algorithm: alternate assignment and centroid update until the max
// centroid displacement drops below tol or max_iter is reached.
inline Centroids lloyd(const Dataset& data, const Centroids& init,
                       std::size_t max_iter = 1000, double tol = -1.0) {
    if (tol < 0.0) tol = 1e-6 * (data.r > 0.0 ? data.r : 1.0);
    Centroids current = init;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Assignment a = assign(data, current);
        Centroids next = update_centroids(data, a, current.k, current);
        double max_disp = 0.0;
        for (std::size_t idx = 0; idx < next.points.size(); ++idx)
            max_disp = std::max(max_disp, std::fabs(next.points[idx] - current.points[idx]));
        current = std::move(next);
        if (max_disp < tol) break;
    }
    return current;
}

struct SpherePacking {
    Centroids centroids;
    double radius = 0.0; // achieved packing radius a
};

namespace detail {

// One placement attempt: draw each centroid with up to 10 tries, requiring
// border distance >= a and pairwise distance >= 2a.
inline bool try_pack(std::size_t d, std::size_t k, double r, double a,
                     Rng& rng, Centroids& out) {
    const double lo = -r + a, hi = r - a;
    if (lo > hi) return false;
    out.k = k;
    out.d = d;
    out.points.assign(k * d, 0.0);
    std::vector<double> cand(d);
    for (std::size_t j = 0; j < k; ++j) {
        bool placed = false;
        for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
            for (std::size_t i = 0; i < d; ++i) cand[i] = rng.uniform(lo, hi);
            bool ok = true;
            for (std::size_t prev = 0; prev < j && ok; ++prev) {
                double dist2 = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    const double diff = cand[i] - out.at(prev, i);
                    dist2 += diff * diff;
                }
                if (dist2 < 4.0 * a * a) ok = false;
            }
            if (ok) {
                for (std::size_t i = 0; i < d; ++i) out.at(j, i) = cand[i];
                placed = true;
            }
        }
        if (!placed) return false;
    }
    return true;
}

} // namespace detail

// Data-independent initial centroids: maximize (by binary search) a radius a
// such that k points fit with border distance >= a and pairwise distance
// >= 2a. A radius is declared infeasible after 200 failed placement attempts.
inline SpherePacking sphere_packing_init(std::size_t d, std::size_t k, double r,
                                         std::uint64_t seed) {
    if (k == 0 || d == 0) throw ParameterError("sphere_packing_init: d, k must be positive");
    if (!(r > 0.0)) throw ParameterError("sphere_packing_init: r must be positive");
    Rng rng(seed);

    auto feasible = [&](double a, Centroids& out) {
        for (int attempt = 0; attempt < 200; ++attempt)
            if (detail::try_pack(d, k, r, a, rng, out)) return true;
        return false;
    };

    SpherePacking best;
    // a = 0 is always feasible (uniform random points)
    detail::try_pack(d, k, r, 0.0, rng, best.centroids);

    double lo = 0.0, hi = r;
    const double abs_tol = 1e-3 * r;
    Centroids scratch;
    for (int iter = 0; iter < 30 && hi - lo > abs_tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid, scratch)) {
            lo = mid;
            best.centroids = scratch;
            best.radius = mid;
        } else {
            hi = mid;
        }
    }
    return best;
}

} // namespace dpkm

#endif // DPKM_KMEANS_HPP
