#ifndef DPKM_HYBRID_HPP
#define DPKM_HYBRID_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/dplloyd.hpp"
#include "dpkm/eugkm.hpp"
#include "dpkm/mechanisms.hpp"

namespace dpkm {

// Outcome of the hybrid threshold test. Depends only on public parameters
// (N, d, k, r, rho, t), never on data values, so it is budget-free.
struct HybridDecision {
    double eps_threshold = 0.0; // eps_b
    bool applied_hybrid = false;
    double x_term = 0.0; // hybrid one-round MSE without the eps^-2 factor
    double y_term = 0.0; // EUGkM variance lower bound without the eps^(-4/(2+d)) factor
};

// Threshold pieces:
//   X = 8d(1+(2*rho*r)^2) (k(dr+1)/N)^2
//   Y = 2dr^2 k^((d-2)/d) / (3 * 10^(2d/(2+d)) * N^(4/(2+d)))
//   eps_b = (X/Y)^((2+d)/(2d)),  with the t >= 2 side condition.
inline HybridDecision hybrid_threshold(std::size_t n, std::size_t d, std::size_t k,
                                       double r, double rho, std::size_t t) {
    if (n == 0 || d == 0 || k == 0 || !(r > 0.0))
        throw ParameterError("hybrid_threshold: parameters must be positive");
    const double dd = static_cast<double>(d);
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);

    HybridDecision dec;
    const double ratio = kk * (dd * r + 1.0) / nn;
    dec.x_term = 8.0 * dd * (1.0 + std::pow(2.0 * rho * r, 2.0)) * ratio * ratio;
    dec.y_term = 2.0 * dd * r * r * std::pow(kk, (dd - 2.0) / dd) /
                 (3.0 * std::pow(10.0, 2.0 * dd / (2.0 + dd)) *
                  std::pow(nn, 4.0 / (2.0 + dd)));
    dec.eps_threshold = std::pow(dec.x_term / dec.y_term, (2.0 + dd) / (2.0 * dd));
    dec.applied_hybrid = (t >= 2); // eps comparison happens at run time
    return dec;
}

struct HybridParams {
    std::size_t t = 5;   // the DPLloyd iteration count the threshold compares against
    double rho = 0.25;
    EugkmOptions eugkm;
};

struct HybridResult {
    Centroids centroids;
    HybridDecision decision;
};

// Above the threshold: EUGkM with eps/2 to seed one DPLloyd round with eps/2.
// Below it (or when t < 2): plain EUGkM with the full eps.
inline HybridResult hybrid(const Dataset& data, std::size_t k, double eps,
                           const std::vector<Centroids>& init_sets, Rng& rng, Budget& budget,
                           const HybridParams& params = {}) {
    HybridResult result;
    result.decision = hybrid_threshold(data.n, data.d, k, data.r, params.rho, params.t);
    result.decision.applied_hybrid =
        result.decision.applied_hybrid && eps >= result.decision.eps_threshold;

    if (!result.decision.applied_hybrid) {
        result.centroids = eugkm(data, k, eps, init_sets, rng, budget, params.eugkm).centroids;
        return result;
    }
    const Centroids intermediate =
        eugkm(data, k, eps / 2.0, init_sets, rng, budget, params.eugkm).centroids;
    result.centroids = dplloyd_one_round(data, intermediate, eps / 2.0, rng, budget);
    return result;
}

} // namespace dpkm

#endif // DPKM_HYBRID_HPP
