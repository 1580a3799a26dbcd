#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dsbad/latent_math.hpp"
#include "dsbad/random.hpp"
#include "test_support.hpp"

using namespace dsbad;

namespace {

const double kHalfSqrt2 = std::sqrt(2.0) / 2.0;

std::vector<double> random_vector(Rng& rng, std::size_t d) {
    std::vector<double> v(d);
    for (auto& x : v) x = standard_normal(rng);
    return v;
}

}  // namespace

TEST_CASE("cosine similarity examples") {
    CHECK(cosine_similarity(Embedding({1, 0}), Embedding({0, 1})) == 0.0);
    CHECK(cosine_similarity(Embedding({1, 0}), Embedding({1, 0})) == 1.0);
    // 3 / (1 * 3*sqrt(2)) = 1/sqrt(2)
    CHECK(std::abs(cosine_similarity(Embedding({1, 0}), Embedding({3, 3})) - 0.7071067811865476) <= 1e-12);
    CHECK_THROWS_AS(cosine_similarity(Embedding({1, 0}), Embedding({1, 0, 0})), Error);
}

TEST_CASE("cosine similarity properties") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = 1 + uniform_index(rng, 8);
        const Embedding a(random_vector(rng, d));
        const Embedding b(random_vector(rng, d));
        const double lambda = 0.01 + 100.0 * uniform01(rng);
        std::vector<double> scaled(a.values().begin(), a.values().end());
        for (auto& x : scaled) x *= lambda;

        CHECK(std::abs(cosine_similarity(a, a) - 1.0) <= 1e-12);
        CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));
        CHECK(std::abs(cosine_similarity(Embedding(scaled), b) - cosine_similarity(a, b)) <= 1e-12);
        CHECK(cosine_similarity(a, b) >= -1.0);
        CHECK(cosine_similarity(a, b) <= 1.0);
    }
}

TEST_CASE("similarity matrix invariants") {
    Rng rng(2);
    std::vector<std::vector<double>> embs;
    for (int i = 0; i < 12; ++i) embs.push_back(random_vector(rng, 5));
    const auto s = dsbad::test::candidates(embs);
    const SimilarityMatrix m(s.items());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(std::abs(m(i, i) - 1.0) <= 1e-9);
        for (std::size_t j = 0; j < m.size(); ++j) {
            CHECK(std::abs(m(i, j) - m(j, i)) <= 1e-9);
            CHECK(m(i, j) >= -1.0 - 1e-9);
            CHECK(m(i, j) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("density scores") {
    CHECK(density_scores(dsbad::test::candidates({{1, 0}}).items()) == std::vector<double>{1.0});
    CHECK(density_scores(dsbad::test::candidates({{1, 0}, {0, 1}}).items()) == std::vector<double>{1.0, 1.0});

    // Hand sums: a=(1,0): 1 + 0 + r; b=(0,1): 0 + 1 + r; c: r + r + 1, r = sqrt(2)/2.
    const auto s = dsbad::test::candidates({{1, 0}, {0, 1}, {kHalfSqrt2, kHalfSqrt2}});
    const auto d = density_scores(s.items());
    REQUIRE(d.size() == 3);
    CHECK(std::abs(d[0] - 1.7071) <= 1e-4);
    CHECK(std::abs(d[1] - 1.7071) <= 1e-4);
    CHECK(std::abs(d[2] - 2.4142) <= 1e-4);

    SUBCASE("inner and cosine differ for unnormalized embeddings") {
        const auto u = dsbad::test::candidates({{2, 0}, {0, 1}});
        CHECK(density_scores(u.items(), DensityMetric::Inner) == std::vector<double>{4.0, 1.0});
        CHECK(density_scores(u.items(), DensityMetric::Cosine) == std::vector<double>{1.0, 1.0});
    }
}

TEST_CASE("density scores are permutation-equivariant") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> embs;
        for (int i = 0; i < 9; ++i) embs.push_back(random_vector(rng, 4));
        std::vector<std::size_t> perm(embs.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[uniform_index(rng, i + 1)]);
        std::vector<std::vector<double>> permuted;
        for (auto p : perm) permuted.push_back(embs[p]);

        const auto base = density_scores(dsbad::test::candidates(embs).items());
        const auto moved = density_scores(dsbad::test::candidates(permuted).items());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            CHECK(moved[i] == doctest::Approx(base[perm[i]]).epsilon(1e-12));
        }
    }
}

TEST_CASE("nearest-rank quantile") {
    const std::vector<double> tenths{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    CHECK(quantile(tenths, 0.9) == 0.9);  // rank ceil(9) = 9
    CHECK(quantile(tenths, 1.0 - 0.1) == 0.9);
    CHECK(quantile(std::vector<double>{5}, 0.5) == 5);
    CHECK(quantile(std::vector<double>{3, 1, 2}, 0.0) == 1);
    CHECK(quantile(std::vector<double>{3, 1, 2}, 0.5) == 2);  // rank ceil(1.5) = 2
    CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), Error);
    CHECK_THROWS_AS(quantile(tenths, 1.5), Error);

    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(1 + uniform_index(rng, 30));
        for (auto& x : v) x = standard_normal(rng);
        CHECK(quantile(v, 1.0) == *std::max_element(v.begin(), v.end()));
        CHECK(quantile(v, 0.0) == *std::min_element(v.begin(), v.end()));
        auto shuffled = v;
        std::reverse(shuffled.begin(), shuffled.end());
        const double q = uniform01(rng);
        CHECK(quantile(shuffled, q) == quantile(v, q));
    }
}

TEST_CASE("distances to center") {
    // Zero embeddings are rejected at ingestion, so the 1-d examples are translated by +1;
    // distances to the mean are translation-invariant.
    CHECK(distances_to_center(dsbad::test::candidates({{3, 4}}).items()) == std::vector<double>{0.0});
    CHECK(distances_to_center(dsbad::test::candidates({{1}, {3}}).items()) == std::vector<double>{1.0, 1.0});
    CHECK(distances_to_center(dsbad::test::candidates({{1}, {2}, {3}, {4}, {5}}).items()) ==
          std::vector<double>{2, 1, 0, 1, 2});
}

TEST_CASE("sum of squared distances equals n times total variance") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto n = 1 + uniform_index(rng, 20);
        const auto d = 1 + uniform_index(rng, 6);
        std::vector<std::vector<double>> embs;
        for (std::size_t i = 0; i < n; ++i) embs.push_back(random_vector(rng, d));
        const auto dist = distances_to_center(dsbad::test::candidates(embs).items());
        double lhs = 0.0;
        for (double x : dist) lhs += x * x;
        double var_sum = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            double mean = 0.0;
            for (const auto& e : embs) mean += e[k];
            mean /= static_cast<double>(n);
            double v = 0.0;
            for (const auto& e : embs) v += (e[k] - mean) * (e[k] - mean);
            var_sum += v / static_cast<double>(n);
        }
        CHECK(std::abs(lhs - static_cast<double>(n) * var_sum) <= 1e-9);
    }
}
