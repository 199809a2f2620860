#ifndef DPKM_ERROR_MODELS_HPP
#define DPKM_ERROR_MODELS_HPP

#include <cmath>
#include <cstddef>

#include "dpkm/eugkm.hpp"
#include "dpkm/mechanisms.hpp"

namespace dpkm {

// Inputs for the closed-form error predictors. rho is the normalized centroid
// coordinate magnitude |S_i|/(2rC); the models are configurable in it.
struct ErrorModelParams {
    std::size_t n = 10000;
    std::size_t d = 2;
    std::size_t k = 5;
    std::size_t t = 5;
    double r = 1.0;
    double rho = 0.25;
    double eps = 1.0;
    double m_cells = 0.0;  // 0 -> derive from choose_M(n, eps, d, theta)
    double theta = 10.0;
};

namespace detail {
inline double resolved_m(const ErrorModelParams& p) {
    return p.m_cells > 0.0 ? p.m_cells : choose_M(p.n, p.eps, p.d, p.theta);
}
} // namespace detail

// Per-round DPLloyd centroid MSE: 2d(1+(2*rho*r)^2) * (kt(dr+1)/(N*eps))^2.
inline double predict_dplloyd_mse(const ErrorModelParams& p) {
    const double d = static_cast<double>(p.d);
    const double ratio = static_cast<double>(p.k) * static_cast<double>(p.t) * (d * p.r + 1.0) /
                         (static_cast<double>(p.n) * p.eps);
    return 2.0 * d * (1.0 + std::pow(2.0 * p.rho * p.r, 2.0)) * ratio * ratio;
}

// EUGkM centroid variance: 2dMr^2 k^((d-2)/d) / (3 N^2 eps^2).
inline double predict_eugkm_variance(const ErrorModelParams& p) {
    const double d = static_cast<double>(p.d);
    const double m = detail::resolved_m(p);
    const double n = static_cast<double>(p.n);
    return 2.0 * d * m * p.r * p.r * std::pow(static_cast<double>(p.k), (d - 2.0) / d) /
           (3.0 * n * n * p.eps * p.eps);
}

// Upper bound on the EUGkM squared centroid bias: d r^2 / M^(2/d).
inline double predict_eugkm_bias_bound(const ErrorModelParams& p) {
    const double d = static_cast<double>(p.d);
    const double m = detail::resolved_m(p);
    return d * p.r * p.r / std::pow(m, 2.0 / d);
}

// MSE of the hybrid's refinement stage: one DPLloyd round at half budget,
// i.e. 8d(1+(2*rho*r)^2) * (k(dr+1)/(N*eps))^2.
inline double predict_hybrid_one_round_mse(const ErrorModelParams& p) {
    const double d = static_cast<double>(p.d);
    const double ratio = static_cast<double>(p.k) * (d * p.r + 1.0) /
                         (static_cast<double>(p.n) * p.eps);
    return 8.0 * d * (1.0 + std::pow(2.0 * p.rho * p.r, 2.0)) * ratio * ratio;
}

} // namespace dpkm

#endif // DPKM_ERROR_MODELS_HPP
