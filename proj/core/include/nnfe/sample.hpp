#pragma once

// Sample: an ordered set of m points in R^d, stored row-major. Row order is
// meaningful; indices identify points throughout the estimators.

#include <cstddef>
#include <span>
#include <vector>

namespace nnfe {

class Sample {
public:
    Sample() = default;

    // Validates the shape, that every coordinate is finite, and that no two
    // rows coincide. Duplicate points are a data-quality error: they produce
    // zero nearest-neighbour distances and the density estimates divide by
    // those distances.
    Sample(std::vector<double> data, std::size_t m, std::size_t d);

    std::size_t size() const { return m_; }
    std::size_t dim() const { return d_; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * d_, d_};
    }
    const std::vector<double>& data() const { return data_; }

private:
    std::vector<double> data_;
    std::size_t m_ = 0;
    std::size_t d_ = 0;
};

}  // namespace nnfe
