#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/hybrid.hpp"
#include "dpkm/kmeans.hpp"

using namespace dpkm;

namespace {

std::vector<Centroids> make_inits(std::size_t d, std::size_t k, std::size_t count) {
    std::vector<Centroids> sets;
    for (std::size_t i = 0; i < count; ++i)
        sets.push_back(sphere_packing_init(d, k, 1.0, 100 + i).centroids);
    return sets;
}

} // namespace

TEST_CASE("hybrid: above the threshold runs both stages at eps/2 each") {
    SyntheticSpec spec{2, 5, 10000, 0.45, 0.0, 1.0, 1};
    const Dataset data = gen_synthetic(spec).data;
    const auto inits = make_inits(2, 5, 3);
    const double eps = 4.0; // threshold at these parameters is 3.375
    Rng rng(2);
    Budget budget(eps);
    const HybridResult res = hybrid(data, 5, eps, inits, rng, budget);
    CHECK(res.decision.applied_hybrid);
    CHECK(res.decision.eps_threshold == doctest::Approx(3.375).epsilon(1e-12));
    CHECK(budget.spent() == doctest::Approx(eps).epsilon(1e-12));
    // ledger: one synopsis spend of eps/2 plus the one-round DPLloyd spends
    double synopsis_spent = 0.0;
    for (const auto& [label, amount] : budget.ledger())
        if (label == "synopsis") synopsis_spent += amount;
    CHECK(synopsis_spent == doctest::Approx(eps / 2.0).epsilon(1e-12));
}

TEST_CASE("hybrid: below the threshold falls back to full-budget eugkm") {
    SyntheticSpec spec{2, 5, 10000, 0.45, 0.0, 1.0, 1};
    const Dataset data = gen_synthetic(spec).data;
    const auto inits = make_inits(2, 5, 3);
    const double eps = 1.0; // < 3.375
    Rng rng1(3), rng2(3);
    Budget b1(eps), b2(eps);
    const HybridResult res = hybrid(data, 5, eps, inits, rng1, b1);
    CHECK_FALSE(res.decision.applied_hybrid);
    CHECK(b1.spent() == doctest::Approx(eps).epsilon(1e-12));
    // must reproduce plain eugkm stream-for-stream
    const EugkmResult plain = eugkm(data, 5, eps, inits, rng2, b2);
    CHECK(res.centroids.points == plain.centroids.points);
}

TEST_CASE("hybrid: t < 2 forces the fallback even above the threshold") {
    SyntheticSpec spec{2, 5, 10000, 0.45, 0.0, 1.0, 1};
    const Dataset data = gen_synthetic(spec).data;
    const auto inits = make_inits(2, 5, 2);
    HybridParams params;
    params.t = 1;
    Rng rng(4);
    Budget budget(8.0);
    const HybridResult res = hybrid(data, 5, 8.0, inits, rng, budget, params);
    CHECK_FALSE(res.decision.applied_hybrid);
    CHECK(budget.spent() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("hybrid: decision depends only on public parameters") {
    // two different datasets with identical (N, d, r) must share the decision
    SyntheticSpec s1{2, 5, 10000, 0.45, 0.0, 1.0, 11};
    SyntheticSpec s2{2, 5, 10000, 0.9, 0.05, 1.0, 22};
    const Dataset d1 = gen_synthetic(s1).data;
    const Dataset d2 = gen_synthetic(s2).data;
    const auto inits = make_inits(2, 5, 2);
    Rng r1(5), r2(5);
    Budget b1(4.0), b2(4.0);
    const HybridResult h1 = hybrid(d1, 5, 4.0, inits, r1, b1);
    const HybridResult h2 = hybrid(d2, 5, 4.0, inits, r2, b2);
    CHECK(h1.decision.eps_threshold == h2.decision.eps_threshold);
    CHECK(h1.decision.applied_hybrid == h2.decision.applied_hybrid);
}

TEST_CASE("hybrid: exactly at the threshold the refinement applies") {
    SyntheticSpec spec{2, 5, 10000, 0.45, 0.0, 1.0, 1};
    const Dataset data = gen_synthetic(spec).data;
    const auto inits = make_inits(2, 5, 2);
    const double eps_b = hybrid_threshold(10000, 2, 5, 1.0, 0.25, 5).eps_threshold;
    Rng rng(6);
    Budget budget(eps_b);
    CHECK(hybrid(data, 5, eps_b, inits, rng, budget).decision.applied_hybrid);
}

TEST_CASE("hybrid: refinement stays inside the domain and improves on noise-free data") {
    // with a huge eps both stages are effectively noise-free; the one-round
    // refinement must not degrade the eugkm NICV
    SyntheticSpec spec{2, 3, 8000, 0.9, 0.1, 1.0, 7};
    const Dataset data = gen_synthetic(spec).data;
    const auto inits = make_inits(2, 3, 3);
    EugkmOptions opts;
    opts.max_cells = 4096;
    HybridParams params;
    params.eugkm = opts;

    Rng rng1(8), rng2(8);
    Budget b1(1e6), b2(1e6);
    const HybridResult res = hybrid(data, 3, 1e6, inits, rng1, b1, params);
    for (double v : res.centroids.points) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    const EugkmResult stage1 = eugkm(data, 3, 0.5e6, inits, rng2, b2, opts);
    CHECK(nicv(data, res.centroids) <= nicv(data, stage1.centroids) + 1e-6);
}
