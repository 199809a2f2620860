#ifndef DPKM_DPLLOYD_HPP
#define DPKM_DPLLOYD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/kmeans.hpp"
#include "dpkm/mechanisms.hpp"

namespace dpkm {

struct DPLloydParams {
    std::size_t t = 5;   // fixed iteration count
    bool clamp = true;   // clamp noisy centroids into [-r, r]
};

// Interactive private k-means: t Lloyd iterations where every per-cluster
// count and per-dimension coordinate sum is perturbed with Laplace noise of
// scale (dr+1)t/eps. Clusters within one iteration are disjoint, so the
// per-iteration ledger spend is (1 + d*r) * eps/((dr+1)t) = eps/t; the
// total over t iterations is exactly eps.
inline Centroids dplloyd(const Dataset& data, const Centroids& init, double eps,
                         const DPLloydParams& params, Rng& rng, Budget& budget) {
    if (params.t == 0) throw ParameterError("dplloyd: t must be >= 1");
    if (data.d != init.d) throw ParameterError("dplloyd: dimension mismatch");
    if (!(data.r > 0.0)) throw ParameterError("dplloyd: dataset must be normalized (r > 0)");
    if (!(eps > 0.0)) throw ParameterError("dplloyd: eps must be positive");

    const double r = data.r;
    const double d = static_cast<double>(data.d);
    const double t = static_cast<double>(params.t);
    const double scale = (d * r + 1.0) * t / eps; // per-query Laplace scale
    const double eps_per_unit = eps / ((d * r + 1.0) * t);

    Centroids current = init;
    const std::size_t k = init.k;
    std::vector<double> counts(k), sums(k * data.d);

    for (std::size_t iter = 0; iter < params.t; ++iter) {
        const Assignment a = assign(data, current);
        std::fill(counts.begin(), counts.end(), 0.0);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t p = 0; p < data.n; ++p) {
            const std::uint32_t j = a.labels[p];
            counts[j] += 1.0;
            for (std::size_t i = 0; i < data.d; ++i) sums[j * data.d + i] += data.at(p, i);
        }
        // One count query (sensitivity 1) and d sum queries (sensitivity r)
        // per iteration; parallel composition across the disjoint clusters.
        budget.spend("dplloyd/count", eps_per_unit);
        for (std::size_t i = 0; i < data.d; ++i) budget.spend("dplloyd/sum", r * eps_per_unit);

        for (std::size_t j = 0; j < k; ++j) {
            const double noisy_c = counts[j] + laplace_sample(scale, rng);
            std::vector<double> noisy_s(data.d);
            for (std::size_t i = 0; i < data.d; ++i)
                noisy_s[i] = sums[j * data.d + i] + laplace_sample(scale, rng);
            if (noisy_c < 0.5) continue; // degenerate noisy count: keep previous centroid
            for (std::size_t i = 0; i < data.d; ++i) {
                double v = noisy_s[i] / noisy_c;
                if (params.clamp) v = std::clamp(v, -r, r);
                current.at(j, i) = v;
            }
        }
    }
    return current;
}

// One noisy Lloyd step (t = 1), Laplace scale (dr+1)/eps. Used as the
// refinement stage of the hybrid algorithm.
inline Centroids dplloyd_one_round(const Dataset& data, const Centroids& init, double eps,
                                   Rng& rng, Budget& budget) {
    DPLloydParams params;
    params.t = 1;
    return dplloyd(data, init, eps, params, rng, budget);
}

} // namespace dpkm

#endif // DPKM_DPLLOYD_HPP
