#ifndef DPKM_PGKM_HPP
#define DPKM_PGKM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/kmeans.hpp"
#include "dpkm/mechanisms.hpp"

namespace dpkm {

struct PgkmParams {
    std::size_t pool_size = 200;
    std::size_t m_prime = 10;          // candidates selected per round
    double x = 1.25e-3;                // round-count coefficient
    double mutation_scale0 = -1.0;     // < 0 -> 0.25 * r
    double mutation_decay = 0.95;
};

// Flat vector of k*d reals encoding k centroids.
using ParamVector = std::vector<double>;

inline Centroids decode_params(const ParamVector& p, std::size_t k, std::size_t d) {
    Centroids c;
    c.k = k;
    c.d = d;
    c.points = p;
    return c;
}

// max(8, floor(x * N * eps / m'))
inline std::size_t num_rounds(std::size_t n, double eps, const PgkmParams& params = {}) {
    if (n == 0 || !(eps > 0.0)) throw ParameterError("num_rounds: need N >= 1 and eps > 0");
    const double raw = params.x * static_cast<double>(n) * eps / static_cast<double>(params.m_prime);
    const std::size_t rounds = static_cast<std::size_t>(std::floor(raw));
    return std::max<std::size_t>(8, rounds);
}

// Nominal budget for a single exponential-mechanism selection: eps/(R*m').
inline double per_selection_budget(std::size_t n, double eps, const PgkmParams& params = {}) {
    return eps / (static_cast<double>(num_rounds(n, eps, params)) *
                  static_cast<double>(params.m_prime));
}

// Swap the tails of the two vectors after a uniformly random split point.
inline std::pair<ParamVector, ParamVector> crossover(const ParamVector& p1,
                                                     const ParamVector& p2, Rng& rng) {
    if (p1.size() != p2.size()) throw ParameterError("crossover: length mismatch");
    if (p1.size() < 2) throw ParameterError("crossover: vectors must have length >= 2");
    const std::size_t split = 1 + rng.uniform_int(p1.size() - 1); // in [1, len-1]
    ParamVector c1 = p1, c2 = p2;
    for (std::size_t i = split; i < p1.size(); ++i) std::swap(c1[i], c2[i]);
    return {std::move(c1), std::move(c2)};
}

// Perturb one uniformly chosen coordinate by U[-scale, +scale], clamped to [-r, r].
inline ParamVector mutate(const ParamVector& p, double scale, double r, Rng& rng) {
    if (scale < 0.0) throw ParameterError("mutate: scale must be >= 0");
    ParamVector out = p;
    if (scale == 0.0 || out.empty()) return out;
    const std::size_t idx = rng.uniform_int(out.size());
    out[idx] = std::clamp(out[idx] + rng.uniform(-scale, scale), -r, r);
    return out;
}

// Negated non-normalized clustering cost, so higher is better.
inline double fitness(const Dataset& data, const ParamVector& p, std::size_t k) {
    const Centroids c = decode_params(p, k, data.d);
    return -nicv(data, c) * static_cast<double>(data.n);
}

// PrivGene-based k-means: a pool of candidate centroid sets refined by
// exponential-mechanism selection, crossover, and mutation. Quality
// sensitivity 4*d*r^2 (one point changes the cost by at most the cube's
// maximum squared distance).
inline Centroids pgkm(const Dataset& data, std::size_t k, double eps,
                      const PgkmParams& params, Rng& rng, Budget& budget) {
    if (!(data.r > 0.0)) throw ParameterError("pgkm: dataset must be normalized (r > 0)");
    if (params.m_prime == 0 || params.m_prime > params.pool_size)
        throw ParameterError("pgkm: need 1 <= m_prime <= pool_size");

    const std::size_t len = k * data.d;
    const double r = data.r;
    const double sensitivity = 4.0 * static_cast<double>(data.d) * r * r;
    const std::size_t rounds = num_rounds(data.n, eps, params);
    const double eps_per_round = eps / static_cast<double>(rounds);
    double mutation_scale = params.mutation_scale0 >= 0.0 ? params.mutation_scale0 : 0.25 * r;

    std::vector<ParamVector> pool(params.pool_size);
    std::vector<double> scores(params.pool_size);
    for (auto& p : pool) {
        p.resize(len);
        for (double& v : p) v = rng.uniform(-r, r);
    }
    for (std::size_t i = 0; i < pool.size(); ++i) scores[i] = fitness(data, pool[i], k);

    std::vector<std::size_t> selected;
    for (std::size_t round = 0; round < rounds; ++round) {
        const bool last = (round + 1 == rounds);
        // The last round carves one extra selection (the final pick) out of
        // its allocation, keeping the total ledger exactly eps.
        const std::size_t selections = params.m_prime + (last ? 1 : 0);
        const double eps_per_select = eps_per_round / static_cast<double>(selections);

        // select m' distinct candidates without replacement
        std::vector<std::size_t> remaining(pool.size());
        for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
        selected.clear();
        for (std::size_t s = 0; s < params.m_prime; ++s) {
            std::vector<double> qualities(remaining.size());
            for (std::size_t i = 0; i < remaining.size(); ++i) qualities[i] = scores[remaining[i]];
            const std::size_t pick =
                exp_select(std::span<const double>(qualities), eps_per_select, sensitivity, rng, budget);
            selected.push_back(remaining[pick]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
        }

        if (last) {
            std::vector<double> qualities(selected.size());
            for (std::size_t i = 0; i < selected.size(); ++i) qualities[i] = scores[selected[i]];
            const std::size_t winner =
                exp_select(std::span<const double>(qualities), eps_per_select, sensitivity, rng, budget);
            return decode_params(pool[selected[winner]], k, data.d);
        }

        // refill: keep the selected, fill the rest with mutated crossover children
        std::vector<ParamVector> next;
        std::vector<double> next_scores;
        next.reserve(params.pool_size);
        next_scores.reserve(params.pool_size);
        for (std::size_t idx : selected) {
            next.push_back(pool[idx]);
            next_scores.push_back(scores[idx]);
        }
        while (next.size() < params.pool_size) {
            const ParamVector& a = pool[selected[rng.uniform_int(selected.size())]];
            const ParamVector& b = pool[selected[rng.uniform_int(selected.size())]];
            std::pair<ParamVector, ParamVector> children =
                len >= 2 ? crossover(a, b, rng) : std::make_pair(a, b);
            for (ParamVector* child : {&children.first, &children.second}) {
                if (next.size() >= params.pool_size) break;
                ParamVector mutated = mutate(*child, mutation_scale, r, rng);
                next_scores.push_back(fitness(data, mutated, k));
                next.push_back(std::move(mutated));
            }
        }
        pool = std::move(next);
        scores = std::move(next_scores);
        mutation_scale *= params.mutation_decay;
    }
    throw ParameterError("pgkm: unreachable"); // rounds >= 8 guarantees the loop returns
}

} // namespace dpkm

#endif // DPKM_PGKM_HPP
