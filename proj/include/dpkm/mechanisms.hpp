#ifndef DPKM_MECHANISMS_HPP
#define DPKM_MECHANISMS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpkm/rng.hpp"

namespace dpkm {

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Privacy budget accumulator. Every mechanism invocation records its spend
// in the ledger; overspending beyond a 1e-9 float tolerance is an error.
class Budget {
public:
    explicit Budget(double total) : total_(total) {
        if (!(total > 0.0) || !std::isfinite(total))
            throw ParameterError("Budget: total epsilon must be positive and finite");
    }

    void spend(std::string label, double eps) {
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw ParameterError("Budget::spend: epsilon must be positive and finite");
        if (spent_ + eps > total_ + kTolerance)
            throw BudgetError("Budget::spend: '" + label + "' would exceed total (" +
                              std::to_string(spent_ + eps) + " > " + std::to_string(total_) + ")");
        spent_ += eps;
        ledger_.emplace_back(std::move(label), eps);
    }

    double total() const { return total_; }
    double spent() const { return spent_; }
    double remaining() const { return total_ - spent_; }
    const std::vector<std::pair<std::string, double>>& ledger() const { return ledger_; }

    static constexpr double kTolerance = 1e-9;

private:
    double total_;
    double spent_ = 0.0;
    std::vector<std::pair<std::string, double>> ledger_;
};

// Draw from the two-sided Laplace distribution with the given scale, via the
// inverse CDF of a single uniform. Mean 0, variance 2*scale^2.
inline double laplace_sample(double scale, Rng& rng) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ParameterError("laplace_sample: scale must be positive and finite");
    const double u = rng.uniform() - 0.5; // (-0.5, 0.5)
    const double sign = (u < 0.0) ? -1.0 : 1.0;
    return -scale * sign * std::log1p(-2.0 * std::fabs(u));
}

// true_count + Lap(sensitivity/eps); records eps in the ledger.
// The result may be negative or non-integer.
inline double noisy_count(double true_count, double sensitivity, double eps,
                          Rng& rng, Budget& budget) {
    if (!(sensitivity > 0.0))
        throw ParameterError("noisy_count: sensitivity must be positive");
    budget.spend("noisy_count", eps);
    return true_count + laplace_sample(sensitivity / eps, rng);
}

struct Candidate {
    std::vector<double> value;
    double quality = 0.0;
};

// Exponential mechanism: select index i with probability proportional to
// exp(eps * q_i / (2 * quality_sensitivity)). Numerically stabilized by
// subtracting the max logit.
inline std::size_t exp_select(std::span<const double> qualities, double eps,
                              double quality_sensitivity, Rng& rng, Budget& budget) {
    if (qualities.empty())
        throw ParameterError("exp_select: empty candidate list");
    if (!(eps > 0.0) || !(quality_sensitivity > 0.0))
        throw ParameterError("exp_select: eps and quality sensitivity must be positive");
    for (double q : qualities) {
        if (!std::isfinite(q))
            throw ParameterError("exp_select: non-finite quality");
    }
    budget.spend("exp_select", eps);

    const double coeff = eps / (2.0 * quality_sensitivity);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (double q : qualities) max_logit = std::max(max_logit, coeff * q);

    std::vector<double> weights(qualities.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < qualities.size(); ++i) {
        weights[i] = std::exp(coeff * qualities[i] - max_logit);
        sum += weights[i];
    }
    double target = rng.uniform() * sum;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        target -= weights[i];
        if (target < 0.0) return i;
    }
    return weights.size() - 1;
}

inline std::size_t exp_select(const std::vector<Candidate>& candidates, double eps,
                              double quality_sensitivity, Rng& rng, Budget& budget) {
    std::vector<double> qualities;
    qualities.reserve(candidates.size());
    for (const auto& c : candidates) qualities.push_back(c.quality);
    return exp_select(std::span<const double>(qualities), eps, quality_sensitivity, rng, budget);
}

} // namespace dpkm

#endif // DPKM_MECHANISMS_HPP
