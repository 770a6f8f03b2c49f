#include "nnfe/weights.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "nnfe/special.hpp"

namespace nnfe {

namespace {

constexpr double kResidualTol = 1e-8;

int first_allowed_rank(int k, double c) {
    // w_j = 0 for j < c*k; the first retained rank is the smallest integer
    // >= c*k (and k itself is always allowed since c < 1).
    int j = static_cast<int>(std::ceil(c * static_cast<double>(k)));
    if (j < 1) j = 1;
    if (j > k) j = k;
    return j;
}

void check_common(int k, double c) {
    if (k < 1) {
        throw std::invalid_argument("weights: k must be >= 1, got " + std::to_string(k));
    }
    if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("weights: c must lie in (0,1), got " +
                                    std::to_string(c));
    }
}

// Solves the constraint system for the minimum-norm weight vector. `rows`
// holds one coefficient vector per constraint over the allowed ranks
// first..k, `rhs` the right-hand sides (1 for the sum row, 0 otherwise).
WeightVector solve_min_norm(std::vector<std::vector<double>> rows,
                            std::vector<double> rhs, int k, int first,
                            const char* label) {
    const int na = k - first + 1;
    const int nr = static_cast<int>(rows.size());
    if (nr > na) {
        throw std::invalid_argument(
            std::string(label) + ": " + std::to_string(nr) + " constraints but only " +
            std::to_string(na) + " allowed ranks (deficit " + std::to_string(nr - na) +
            "); increase k or lower c");
    }

    Eigen::MatrixXd A(nr, na);
    Eigen::VectorXd y(nr);
    for (int r = 0; r < nr; ++r) {
        // Unit-normalise each row: the raw coefficients span many orders of
        // magnitude and would otherwise dominate the factorisation.
        double norm2 = 0.0;
        for (double v : rows[static_cast<std::size_t>(r)]) norm2 += v * v;
        const double scale = 1.0 / std::sqrt(norm2);
        for (int a = 0; a < na; ++a) {
            A(r, a) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(a)] * scale;
        }
        y(r) = rhs[static_cast<std::size_t>(r)] * scale;
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd sol = cod.solve(y);

    WeightVector out;
    out.k = k;
    out.first_allowed = first;
    out.w.assign(static_cast<std::size_t>(k), 0.0);
    for (int a = 0; a < na; ++a) {
        out.w[static_cast<std::size_t>(first - 1 + a)] = sol(a);
    }

    out.residuals.resize(static_cast<std::size_t>(nr));
    Eigen::VectorXd res = A * sol - y;
    for (int r = 0; r < nr; ++r) {
        out.residuals[static_cast<std::size_t>(r)] = std::abs(res(r));
        out.max_residual = std::max(out.max_residual, out.residuals[static_cast<std::size_t>(r)]);
    }
    if (out.max_residual > kResidualTol) {
        throw std::runtime_error(std::string(label) + ": constraint residual " +
                                 std::to_string(out.max_residual) +
                                 " exceeds tolerance; the system is numerically "
                                 "singular at this size, try a larger k");
    }

    for (double v : out.w) out.l1_norm += std::abs(v);
    return out;
}

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

WeightVector solve_general_weights(int k, int d, int I, double c) {
    check_common(k, c);
    if (d < 1) {
        throw std::invalid_argument("weights: d must be >= 1, got " + std::to_string(d));
    }
    if (I < 0) {
        throw std::invalid_argument("weights: I must be >= 0, got " + std::to_string(I));
    }
    const int first = first_allowed_rank(k, c);
    const int na = k - first + 1;
    const int l_max = (d + 1) / 2 - 1;  // ceil(d/2) - 1

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (int l = 0; l <= l_max; ++l) {
        for (int i = 0; i <= I; ++i) {
            const double expo = 2.0 * static_cast<double>(l) / static_cast<double>(d) -
                                static_cast<double>(i);
            std::vector<double> row(static_cast<std::size_t>(na));
            for (int a = 0; a < na; ++a) {
                row[static_cast<std::size_t>(a)] =
                    std::pow(static_cast<double>(first + a), expo);
            }
            rows.push_back(std::move(row));
            rhs.push_back(l == 0 && i == 0 ? 1.0 : 0.0);
        }
    }

    WeightVector out = solve_min_norm(std::move(rows), std::move(rhs), k, first,
                                      "solve_general_weights");
    out.classkind = WeightClassKind::General;
    out.d = d;
    out.I = I;
    out.c = c;
    out.l1_exceeds_bound = out.l1_norm > 1.0 / c;
    return out;
}

namespace {

WeightVector solve_gamma_moment_weights(int k, int d, double b, double c,
                                        const char* label) {
    check_common(k, c);
    if (d < 1) {
        throw std::invalid_argument("weights: d must be >= 1, got " + std::to_string(d));
    }
    const int first = first_allowed_rank(k, c);
    const int na = k - first + 1;
    const int l_max = (d + 1) / 2 - 1;

    if (static_cast<double>(first) - b <= 0.0) {
        throw std::invalid_argument(
            std::string(label) + ": allowed rank " + std::to_string(first) +
            " with shift b=" + std::to_string(b) +
            " puts a Gamma argument at or below its pole; need j > b for all "
            "allowed ranks");
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    rows.emplace_back(static_cast<std::size_t>(na), 1.0);
    rhs.push_back(1.0);
    for (int l = 1; l <= l_max; ++l) {
        const double shift = 2.0 * static_cast<double>(l) / static_cast<double>(d);
        std::vector<double> row(static_cast<std::size_t>(na));
        for (int a = 0; a < na; ++a) {
            const double j = static_cast<double>(first + a) - b;
            row[static_cast<std::size_t>(a)] = std::exp(log_gamma(j + shift) - log_gamma(j));
        }
        rows.push_back(std::move(row));
        rhs.push_back(0.0);
    }

    WeightVector out = solve_min_norm(std::move(rows), std::move(rhs), k, first, label);
    out.d = d;
    out.b = b;
    out.c = c;
    out.l1_exceeds_bound = out.l1_norm > 1.0 / c;
    return out;
}

}  // namespace

WeightVector solve_kl_weights(int k, int d, double c) {
    WeightVector out = solve_gamma_moment_weights(k, d, 0.0, c, "solve_kl_weights");
    out.classkind = WeightClassKind::KL;
    return out;
}

WeightVector solve_renyi_weights(int k, int d, double b, double c) {
    if (!std::isfinite(b)) {
        throw std::invalid_argument("solve_renyi_weights: b must be finite");
    }
    WeightVector out = solve_gamma_moment_weights(k, d, b, c, "solve_renyi_weights");
    out.classkind = WeightClassKind::Renyi;
    return out;
}

namespace {

// Cache keyed by the full parameter tuple; unique_ptr keeps addresses stable
// so callers may hold references while other threads insert.
using CacheKey = std::tuple<int, int, int, int, std::uint64_t, std::uint64_t>;
std::map<CacheKey, std::unique_ptr<WeightVector>> g_cache;
std::mutex g_cache_mutex;

const WeightVector& cache_lookup(WeightClassKind kind, int k, int d, int I, double b,
                                 double c) {
    const CacheKey key{static_cast<int>(kind), k, d, I, bits(b), bits(c)};
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_cache.find(key);
    if (it == g_cache.end()) {
        WeightVector solved;
        switch (kind) {
            case WeightClassKind::General:
                solved = solve_general_weights(k, d, I, c);
                break;
            case WeightClassKind::KL:
                solved = solve_kl_weights(k, d, c);
                break;
            case WeightClassKind::Renyi:
                solved = solve_renyi_weights(k, d, b, c);
                break;
        }
        it = g_cache.emplace(key, std::make_unique<WeightVector>(std::move(solved))).first;
    }
    return *it->second;
}

}  // namespace

const WeightVector& cached_general_weights(int k, int d, int I, double c) {
    return cache_lookup(WeightClassKind::General, k, d, I, 0.0, c);
}

const WeightVector& cached_kl_weights(int k, int d, double c) {
    return cache_lookup(WeightClassKind::KL, k, d, 0, 0.0, c);
}

const WeightVector& cached_renyi_weights(int k, int d, double b, double c) {
    return cache_lookup(WeightClassKind::Renyi, k, d, 0, b, c);
}

}  // namespace nnfe
