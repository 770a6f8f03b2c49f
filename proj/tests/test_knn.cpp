#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nnfe/knn.hpp"
#include "nnfe/special.hpp"

using namespace nnfe;

namespace {

Sample random_sample(std::mt19937_64& rng, std::size_t m, std::size_t d) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> data(m * d);
    for (double& x : data) x = gauss(rng);
    return Sample(std::move(data), m, d);
}

}  // namespace

TEST_CASE("kd-tree equals brute force bit for bit on random instances") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> m_dist(2, 200);
    std::uniform_int_distribution<std::size_t> d_dist(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = m_dist(rng);
        const std::size_t d = d_dist(rng);
        const Sample X = random_sample(rng, m, d);
        std::uniform_int_distribution<int> k_dist(1, static_cast<int>(m) - 1);
        const int k = k_dist(rng);

        const KnnDistances tree = knn_within(X, k);
        const KnnDistances brute = knn_within_brute(X, k);
        REQUIRE(tree.dists.size() == brute.dists.size());
        for (std::size_t i = 0; i < tree.dists.size(); ++i) {
            CHECK(tree.dists[i] == brute.dists[i]);
        }

        const std::size_t n = m_dist(rng);
        const Sample Y = random_sample(rng, n, d);
        const int k_cross = std::min(k, static_cast<int>(n));
        const KnnDistances ct = knn_cross(X, Y, k_cross);
        const KnnDistances cb = knn_cross_brute(X, Y, k_cross);
        REQUIRE(ct.dists.size() == cb.dists.size());
        for (std::size_t i = 0; i < ct.dists.size(); ++i) {
            CHECK(ct.dists[i] == cb.dists[i]);
        }
    }
}

TEST_CASE("within-sample distances exclude the point itself") {
    // Three collinear points: nearest neighbour of the middle one is at
    // distance 1, not 0.
    const Sample X({0.0, 1.0, 3.0}, 3, 1);
    const KnnDistances d1 = knn_within(X, 2);
    CHECK(d1.rank_distance(0, 1) == 1.0);  // 0 -> 1
    CHECK(d1.rank_distance(0, 2) == 3.0);  // 0 -> 3
    CHECK(d1.rank_distance(1, 1) == 1.0);  // 1 -> 0
    CHECK(d1.rank_distance(1, 2) == 2.0);  // 1 -> 3
    CHECK(d1.rank_distance(2, 1) == 2.0);  // 3 -> 1
    CHECK(d1.rank_distance(2, 2) == 3.0);  // 3 -> 0
}

TEST_CASE("cross-sample distances keep coincident pairs") {
    const Sample X({0.0, 1.0}, 2, 1);
    const Sample Y({1.0, 2.0}, 2, 1);
    const KnnDistances d = knn_cross(X, Y, 1);
    CHECK(d.rank_distance(0, 1) == 1.0);
    CHECK(d.rank_distance(1, 1) == 0.0);  // X row 1 coincides with Y row 0
}

TEST_CASE("density estimate applies j / (size * V_d * rho^d)") {
    const Sample X({0.0, 1.0, 3.0}, 3, 1);
    const Sample Y({0.5, 2.0}, 2, 1);
    const KnnDistances d = knn_cross(X, Y, 1);
    const std::vector<double> ghat = density_estimate(d, Y.size(), 1, 1);
    // V_1 = 2, so ghat_i = 1 / (4 * rho_i) with rho = 0.5, 0.5, 1.
    REQUIRE(ghat.size() == 3);
    CHECK(ghat[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(ghat[1] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(ghat[2] == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("zero cross distance fails density estimation, not geometry") {
    const Sample X({0.0, 1.0}, 2, 1);
    const Sample Y({1.0, 2.0}, 2, 1);
    const KnnDistances d = knn_cross(X, Y, 1);
    CHECK_THROWS_AS(density_estimate(d, Y.size(), 1, 1), std::runtime_error);
}

TEST_CASE("sample validation rejects bad shapes, NaNs, and duplicate rows") {
    CHECK_THROWS_AS(Sample({1.0, 2.0, 3.0}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(Sample({1.0, std::nan("")}, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(Sample({0.5, 1.5, 0.5}, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(Sample({}, 0, 1), std::invalid_argument);
    // Duplicate coordinates in different rows are fine: only full rows count.
    CHECK_NOTHROW(Sample({0.5, 1.0, 0.5, 2.0}, 2, 2));
}

TEST_CASE("k bounds are enforced") {
    std::mt19937_64 rng(102);
    const Sample X = random_sample(rng, 10, 2);
    const Sample Y = random_sample(rng, 5, 2);
    CHECK_THROWS_AS(knn_within(X, 10), std::invalid_argument);
    CHECK_THROWS_AS(knn_within(X, 0), std::invalid_argument);
    CHECK_NOTHROW(knn_within(X, 9));
    CHECK_THROWS_AS(knn_cross(X, Y, 6), std::invalid_argument);
    CHECK_NOTHROW(knn_cross(X, Y, 5));
}

TEST_CASE("high dimension falls back to brute force and stays consistent") {
    std::mt19937_64 rng(103);
    const Sample X = random_sample(rng, 40, 18);
    const KnnDistances a = knn_within(X, 3);
    const KnnDistances b = knn_within_brute(X, 3);
    for (std::size_t i = 0; i < a.dists.size(); ++i) {
        CHECK(a.dists[i] == b.dists[i]);
    }
}
