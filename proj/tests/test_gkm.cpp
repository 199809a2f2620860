#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/gkm.hpp"
#include "dpkm/kmeans.hpp"

using namespace dpkm;

TEST_CASE("resolve_ell: matches the published block counts") {
    BlockPolicy p04;
    p04.mode = BlockPolicy::Mode::N_POW_04;
    CHECK(resolve_ell(10000, 5, p04) == 40);
    CHECK(resolve_ell(5000, 15, p04) == 30);
    CHECK(resolve_ell(107091, 5, p04) == 103);

    BlockPolicy p3k;
    p3k.mode = BlockPolicy::Mode::THREE_K;
    CHECK(resolve_ell(107091, 5, p3k) == 7139);
    CHECK(resolve_ell(16281, 2, p3k) == 2713);
}

TEST_CASE("resolve_ell: explicit policy validates bounds") {
    BlockPolicy p;
    p.mode = BlockPolicy::Mode::EXPLICIT;
    p.explicit_ell = 5;
    CHECK(resolve_ell(10, 2, p) == 5);
    p.explicit_ell = 11;
    CHECK_THROWS_AS(resolve_ell(10, 2, p), ParameterError);
}

TEST_CASE("partition_blocks: remainder sizes and exact cover") {
    SyntheticSpec spec{2, 2, 10, 0.5, 0.0, 1.0, 3};
    const Dataset data = gen_synthetic(spec).data;
    Rng rng(1);
    const auto blocks = partition_blocks(data, 3, rng);
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0].n == 4);
    CHECK(blocks[1].n == 3);
    CHECK(blocks[2].n == 3);

    // disjoint cover: every original row appears exactly once
    std::multiset<std::vector<double>> original, partitioned;
    for (std::size_t p = 0; p < data.n; ++p)
        original.insert({data.at(p, 0), data.at(p, 1)});
    for (const auto& blk : blocks)
        for (std::size_t p = 0; p < blk.n; ++p)
            partitioned.insert({blk.at(p, 0), blk.at(p, 1)});
    CHECK(original == partitioned);
}

TEST_CASE("partition_blocks: ell = N yields singletons") {
    SyntheticSpec spec{2, 2, 12, 0.5, 0.0, 1.0, 4};
    const Dataset data = gen_synthetic(spec).data;
    Rng rng(2);
    const auto blocks = partition_blocks(data, 12, rng);
    for (const auto& blk : blocks) CHECK(blk.n == 1);
}

TEST_CASE("gkm: noise scale arithmetic") {
    // r=1, k=5, d=2, ell=7139, eps=1 -> 2*2*5*2/7139
    const double scale = 2.0 * 2.0 * 5.0 * 2.0 / 7139.0;
    CHECK(scale == doctest::Approx(5.60e-3).epsilon(0.01));
}

TEST_CASE("gkm: noise-free single block equals plain k-means") {
    SyntheticSpec spec{2, 2, 200, 0.8, 0.1, 1.0, 5};
    const Dataset data = gen_synthetic(spec).data;
    BlockPolicy p;
    p.mode = BlockPolicy::Mode::EXPLICIT;
    p.explicit_ell = 1;
    Rng rng1(9);
    Budget budget(1e9);
    const Centroids noisy = gkm(data, 2, 1e9, p, rng1, budget);

    // reproduce the same per-block run without noise
    Rng rng2(9);
    const Centroids exact = sag_only(data, 2, 1, rng2);
    for (std::size_t i = 0; i < noisy.points.size(); ++i)
        CHECK(std::fabs(noisy.points[i] - exact.points[i]) < 1e-3);
}

TEST_CASE("gkm: ledger equals eps") {
    SyntheticSpec spec{2, 2, 300, 0.8, 0.1, 1.0, 6};
    const Dataset data = gen_synthetic(spec).data;
    BlockPolicy p;
    p.mode = BlockPolicy::Mode::THREE_K;
    Rng rng(3);
    Budget budget(0.25);
    gkm(data, 2, 0.25, p, rng, budget);
    CHECK(budget.spent() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("sag_only: deterministic given seed; ell=1 equals one k-means run") {
    SyntheticSpec spec{2, 2, 150, 0.8, 0.1, 1.0, 7};
    const Dataset data = gen_synthetic(spec).data;
    Rng a(11), b(11);
    CHECK(sag_only(data, 2, 5, a).points == sag_only(data, 2, 5, b).points);
}

TEST_CASE("sag_only: canonical-order block averages land near the true centers") {
    // two clusters far apart on the x axis so the lexicographic sort gives a
    // stable centroid order across blocks
    const std::vector<std::vector<double>> true_centers{{-0.5, -0.5}, {0.5, 0.5}};
    Dataset data;
    data.n = 3000;
    data.d = 2;
    data.r = 1.0;
    data.points.resize(3000 * 2);
    Rng gen(8);
    for (std::size_t p = 0; p < data.n; ++p) {
        const auto& c = true_centers[p % 2];
        for (std::size_t i = 0; i < 2; ++i)
            data.points[p * 2 + i] = std::clamp(gen.gaussian(c[i], 0.1), -1.0, 1.0);
    }
    Rng rng(13);
    GkmOptions opts;
    opts.canonical_order = true;
    const Centroids agg = sag_only(data, 2, 100, rng, opts);
    for (std::size_t j = 0; j < 2; ++j) {
        double best = 1e300;
        for (const auto& c : true_centers) {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < 2; ++i) {
                const double diff = agg.at(j, i) - c[i];
                dist2 += diff * diff;
            }
            best = std::min(best, dist2);
        }
        CHECK(std::sqrt(best) < 0.15);
    }
}

TEST_CASE("gkm: noise only adds error relative to sag_only") {
    SyntheticSpec spec{2, 2, 1200, 0.6, 0.1, 1.0, 9};
    const Dataset data = gen_synthetic(spec).data;
    BlockPolicy p;
    p.mode = BlockPolicy::Mode::THREE_K;
    const std::size_t ell = resolve_ell(data.n, 2, p);
    double mean_sag = 0.0, mean_gkm = 0.0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
        Rng rng1(derive_seed(1000, std::to_string(run)));
        Rng rng2(derive_seed(1000, std::to_string(run)));
        Budget budget(0.1);
        mean_sag += nicv(data, sag_only(data, 2, ell, rng1));
        mean_gkm += nicv(data, gkm(data, 2, 0.1, p, rng2, budget));
    }
    CHECK(mean_sag / runs <= mean_gkm / runs);
}

TEST_CASE("gkm: aggregation identity with identical blocks") {
    // all points identical -> every block's k-means returns coincident
    // centroids; with huge eps the aggregate must equal them
    Dataset data;
    data.n = 40;
    data.d = 1;
    data.r = 1.0;
    data.points.assign(40, 0.25);
    BlockPolicy p;
    p.mode = BlockPolicy::Mode::EXPLICIT;
    p.explicit_ell = 4;
    Rng rng(17);
    Budget budget(1e9);
    const Centroids out = gkm(data, 1, 1e9, p, rng, budget);
    CHECK(out.at(0, 0) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("gkm: half-budget mode doubles the noise scale") {
    Dataset data;
    data.n = 20;
    data.d = 1;
    data.r = 1.0;
    data.points.assign(20, 0.0);
    BlockPolicy p;
    p.mode = BlockPolicy::Mode::EXPLICIT;
    p.explicit_ell = 1;
    GkmOptions full, half;
    half.half_budget_mode = true;
    // same rng stream: the half-budget deviation from the aggregate must be
    // exactly twice the full-budget one (eps large enough that neither clamps)
    Rng rng1(23), rng2(23);
    Budget b1(100.0), b2(100.0);
    const double dev_full = gkm(data, 1, 100.0, p, rng1, b1, full).at(0, 0);
    const double dev_half = gkm(data, 1, 100.0, p, rng2, b2, half).at(0, 0);
    CHECK(dev_full != 0.0);
    CHECK(dev_half == doctest::Approx(2.0 * dev_full).epsilon(1e-9));
}
