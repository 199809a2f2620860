#ifndef DPKM_GKM_HPP
#define DPKM_GKM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/kmeans.hpp"
#include "dpkm/mechanisms.hpp"

namespace dpkm {

// Block-count policy for sample-and-aggregate k-means.
struct BlockPolicy {
    enum class Mode { N_POW_04, THREE_K, EXPLICIT };
    Mode mode = Mode::N_POW_04;
    std::size_t explicit_ell = 0;
};

inline std::size_t resolve_ell(std::size_t n, std::size_t k, const BlockPolicy& policy) {
    if (n == 0) throw ParameterError("resolve_ell: N must be >= 1");
    switch (policy.mode) {
        case BlockPolicy::Mode::N_POW_04: {
            const double ell = std::round(std::pow(static_cast<double>(n), 0.4));
            return std::max<std::size_t>(1, static_cast<std::size_t>(ell));
        }
        case BlockPolicy::Mode::THREE_K: {
            const std::size_t ell = n / (3 * k);
            return std::max<std::size_t>(1, ell);
        }
        case BlockPolicy::Mode::EXPLICIT:
            if (policy.explicit_ell == 0 || policy.explicit_ell > n)
                throw ParameterError("resolve_ell: explicit ell must satisfy 1 <= ell <= N");
            return policy.explicit_ell;
    }
    throw ParameterError("resolve_ell: bad policy");
}

// Uniformly random partition into ell blocks with sizes differing by at most 1.
inline std::vector<Dataset> partition_blocks(const Dataset& data, std::size_t ell, Rng& rng) {
    if (ell == 0 || ell > data.n)
        throw ParameterError("partition_blocks: need 1 <= ell <= N");
    std::vector<std::size_t> perm(data.n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = data.n - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_int(i + 1);
        std::swap(perm[i], perm[j]);
    }
    std::vector<Dataset> blocks(ell);
    const std::size_t base = data.n / ell;
    const std::size_t remainder = data.n % ell;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < ell; ++b) {
        const std::size_t size = base + (b < remainder ? 1 : 0);
        Dataset& blk = blocks[b];
        blk.n = size;
        blk.d = data.d;
        blk.r = data.r;
        blk.provenance = data.provenance;
        blk.points.reserve(size * data.d);
        for (std::size_t p = 0; p < size; ++p, ++pos) {
            const auto row = data.row(perm[pos]);
            blk.points.insert(blk.points.end(), row.begin(), row.end());
        }
    }
    return blocks;
}

struct GkmOptions {
    // Simulate reserving half the budget for output-range estimation by
    // doubling the noise scale. Default: fixed domain range, full budget.
    bool half_budget_mode = false;
    // Sort each block's centroids lexicographically before index-wise
    // aggregation, instead of the raw per-block ordering.
    bool canonical_order = false;
    std::size_t block_max_iter = 50;
};

namespace detail {

inline Centroids random_centroids(std::size_t k, std::size_t d, double r, Rng& rng) {
    Centroids c;
    c.k = k;
    c.d = d;
    c.points.resize(k * d);
    for (double& v : c.points) v = rng.uniform(-r, r);
    return c;
}

inline void sort_centroids_lex(Centroids& c) {
    std::vector<std::vector<double>> rows(c.k);
    for (std::size_t j = 0; j < c.k; ++j)
        rows[j].assign(c.points.begin() + j * c.d, c.points.begin() + (j + 1) * c.d);
    std::sort(rows.begin(), rows.end());
    for (std::size_t j = 0; j < c.k; ++j)
        std::copy(rows[j].begin(), rows[j].end(), c.points.begin() + j * c.d);
}

// Index-wise mean of per-block k-means outputs (no noise).
inline Centroids aggregate_blocks(const Dataset& data, std::size_t k, std::size_t ell,
                                  Rng& rng, const GkmOptions& opts) {
    const auto blocks = partition_blocks(data, ell, rng);
    Centroids agg;
    agg.k = k;
    agg.d = data.d;
    agg.points.assign(k * data.d, 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        Rng block_rng = rng.derive("block/" + std::to_string(b));
        Centroids init = random_centroids(k, data.d, data.r, block_rng);
        Centroids c = lloyd(blocks[b], init, opts.block_max_iter);
        if (opts.canonical_order) sort_centroids_lex(c);
        for (std::size_t idx = 0; idx < agg.points.size(); ++idx)
            agg.points[idx] += c.points[idx];
    }
    for (double& v : agg.points) v /= static_cast<double>(ell);
    return agg;
}

} // namespace detail

// Sample-and-aggregate k-means: partition into ell blocks, run plain k-means
// per block, average centroids index-wise, and add Laplace noise of scale
// 2*(max-min)*k*d/(ell*eps) per coordinate with (min, max) = (-r, +r).
inline Centroids gkm(const Dataset& data, std::size_t k, double eps,
                     const BlockPolicy& policy, Rng& rng, Budget& budget,
                     const GkmOptions& opts = {}) {
    if (!(data.r > 0.0)) throw ParameterError("gkm: dataset must be normalized (r > 0)");
    const std::size_t ell = resolve_ell(data.n, k, policy);
    budget.spend("gkm", eps);

    Centroids agg = detail::aggregate_blocks(data, k, ell, rng, opts);

    const double range = 2.0 * data.r; // max_i - min_i, fixed-domain mode
    double scale = 2.0 * range * static_cast<double>(k) * static_cast<double>(data.d) /
                   (static_cast<double>(ell) * eps);
    if (opts.half_budget_mode) scale *= 2.0;
    for (double& v : agg.points)
        v = std::clamp(v + laplace_sample(scale, rng), -data.r, data.r);
    return agg;
}

// The aggregation step alone, without the Laplace noise. Used to decompose
// the GkM error into sample-and-aggregate error and noise error.
inline Centroids sag_only(const Dataset& data, std::size_t k, std::size_t ell,
                          Rng& rng, const GkmOptions& opts = {}) {
    return detail::aggregate_blocks(data, k, ell, rng, opts);
}

} // namespace dpkm

#endif // DPKM_GKM_HPP
