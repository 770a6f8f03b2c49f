#pragma once

// Exact k-nearest-neighbour distances within a sample and across samples,
// plus the plug-in density transform built on them. A kd-tree serves
// dimensions up to 16; brute force covers higher dimensions and doubles as
// the test oracle. Queries over a built structure are read-only and safe to
// issue from multiple threads.

#include <cstddef>
#include <vector>

#include "nnfe/sample.hpp"

namespace nnfe {

enum class KnnMode { Within, Cross };

// One row of sorted neighbour distances per query point. Columns are
// addressed by neighbour rank j in 1..k, mirroring the rho_{(j),i} notation
// of the estimators.
struct KnnDistances {
    std::vector<double> dists;  // row-major, rows x k
    std::size_t rows = 0;
    int k = 0;
    KnnMode mode = KnnMode::Within;

    double rank_distance(std::size_t i, int j) const {
        return dists[i * static_cast<std::size_t>(k) +
                     static_cast<std::size_t>(j - 1)];
    }
};

// Distances from each point of `sample` to its k nearest neighbours among
// the other points (the point itself is excluded). Requires 1 <= k <= m-1.
KnnDistances knn_within(const Sample& sample, int k);

// Distances from each query point to its k nearest points of `reference`.
// There is no self-exclusion: a query coinciding with a reference point
// yields a zero distance. Requires 1 <= k <= n.
KnnDistances knn_cross(const Sample& queries, const Sample& reference, int k);

// O(m*n) reference implementations, kept as the correctness oracle.
KnnDistances knn_within_brute(const Sample& sample, int k);
KnnDistances knn_cross_brute(const Sample& queries, const Sample& reference, int k);

// Entry i is j / (sample_size * V_d * dists[i][j]^d), the k-NN density
// estimate at neighbour rank j. A zero distance is an explicit error, not
// an infinite density.
std::vector<double> density_estimate(const KnnDistances& dists,
                                     std::size_t sample_size, int d, int j);

}  // namespace nnfe
