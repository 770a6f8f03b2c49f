#pragma once

// Deterministic reductions. Pairwise summation keeps rounding error
// O(log n) and, crucially, gives the same bits for the same input order
// no matter how the terms were produced.

#include <cstddef>
#include <span>

namespace nnfe {

inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
    return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace nnfe
