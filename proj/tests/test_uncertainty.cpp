#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nnfe/densities.hpp"
#include "nnfe/estimators.hpp"
#include "nnfe/functionals.hpp"
#include "nnfe/knn.hpp"
#include "nnfe/uncertainty.hpp"

using namespace nnfe;

namespace {

// Ball volume computed without the library's special functions.
double ball_volume(int d) {
    return std::pow(std::acos(-1.0), 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Densities rebuilt from the brute-force distances and the plain formula,
// so the transcription below shares no code with variance_estimate.
std::vector<double> oracle_density(const KnnDistances& dist, std::size_t divisor,
                                   int d, int k) {
    std::vector<double> out(dist.rows);
    for (std::size_t i = 0; i < dist.rows; ++i) {
        const double rho = dist.rank_distance(i, k);
        out[i] = static_cast<double>(k) /
                 (static_cast<double>(divisor) * ball_volume(d) * std::pow(rho, d));
    }
    return out;
}

double median_of_sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return (v.size() % 2 == 1) ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

TEST_CASE("interval half-width matches the frozen hand computation") {
    // v1 = 1, v2 = e - 1, m = n = 100, q = 0.05:
    // z_{0.025} * sqrt(e) / 10 = 0.323143431111736454.
    VarianceReport var;
    var.v1hat = 1.0;
    var.v2hat = std::exp(1.0) - 1.0;
    const ConfidenceInterval ci = confidence_interval(0.5, var, 100, 100, 0.05);
    CHECK(ci.half_width == doctest::Approx(0.323143431111736454).epsilon(1e-12));
    CHECK(ci.level == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(ci.lower == doctest::Approx(0.5 - ci.half_width).epsilon(1e-15));
    CHECK(ci.upper == doctest::Approx(0.5 + ci.half_width).epsilon(1e-15));
}

TEST_CASE("median interval uses the 0.75 normal quantile") {
    // q = 0.5, v1 = 4, v2 = 0, m = 16: half-width is z_{0.25} * 0.5 with
    // z_{0.25} = 0.674489750196081743.
    VarianceReport var;
    var.v1hat = 4.0;
    const ConfidenceInterval ci = confidence_interval(0.0, var, 16, 7, 0.5);
    CHECK(ci.half_width ==
          doctest::Approx(0.5 * 0.674489750196081743).epsilon(1e-13));
    CHECK(ci.level == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero variance estimates give a degenerate interval") {
    const VarianceReport var;  // both v1hat and v2hat zero
    const ConfidenceInterval ci = confidence_interval(1.25, var, 50, 60, 0.05);
    CHECK(ci.half_width == 0.0);
    CHECK(ci.lower == 1.25);
    CHECK(ci.upper == 1.25);
}

TEST_CASE("interval rejects levels outside (0, 1) and empty samples") {
    const VarianceReport var;
    CHECK_THROWS_AS(confidence_interval(0.0, var, 10, 10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(confidence_interval(0.0, var, 10, 10, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(confidence_interval(0.0, var, 10, 10, -0.2), std::invalid_argument);
    CHECK_THROWS_AS(confidence_interval(0.0, var, 10, 10, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(confidence_interval(0.0, var, 0, 10, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(variance_estimate(Sample({0.0, 1.0}, 2, 1),
                                      Sample({0.5}, 1, 1), kl_functional(), 0, 1),
                    std::invalid_argument);
}

TEST_CASE("all four components match an independent transcription") {
    const Sample X = sample_model(gaussian_model({0.0, 0.0}, {1.0, 1.0}), 40, 11);
    const Sample Y = sample_model(gaussian_model({0.5, 0.5}, {1.0, 1.0}), 30, 12);
    const int kx = 3, ky = 4;
    const VarianceReport r = variance_estimate(X, Y, kl_functional(), kx, ky);

    // Recompute from scratch: brute-force distances, the density formula,
    // the KL derivatives written out by hand, plain running sums.
    const std::vector<double> fhat =
        oracle_density(knn_within_brute(X, kx), X.size(), X.dim(), kx);
    const std::vector<double> ghat =
        oracle_density(knn_cross_brute(X, Y, ky), Y.size(), X.dim(), ky);
    const double level = std::min(std::log(40.0), std::log(30.0));
    double s11 = 0.0, s_phi = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double u = fhat[i], v = ghat[i];
        const double phi = std::log(u / v);
        const double f_phi10 = u * (1.0 / u);
        const double phi01 = -1.0 / v;
        s11 += std::min((phi + f_phi10) * (phi + f_phi10), level);
        s_phi += phi;
        s12 += f_phi10;
        s21 += std::min(u * v * phi01 * phi01, level);
        s22 += v * phi01;
    }
    const double inv_m = 1.0 / static_cast<double>(X.size());
    CHECK(r.truncation_level == doctest::Approx(level).epsilon(1e-15));
    CHECK(r.comp11 == doctest::Approx(s11 * inv_m).epsilon(1e-12));
    CHECK(r.comp12 == doctest::Approx((s_phi + s12) * inv_m).epsilon(1e-12));
    CHECK(r.comp21 == doctest::Approx(s21 * inv_m).epsilon(1e-12));
    CHECK(r.comp22 == doctest::Approx(s22 * inv_m).epsilon(1e-12));
    CHECK(r.v1hat ==
          doctest::Approx(std::max(r.comp11 - r.comp12 * r.comp12, 0.0))
              .epsilon(1e-12));
    CHECK(r.v2hat ==
          doctest::Approx(std::max(r.comp21 - r.comp22 * r.comp22, 0.0))
              .epsilon(1e-12));
}

TEST_CASE("truncation bites when the samples are far apart") {
    // X near 0, Y near 8: log(fhat/ghat) is far above sqrt(log n), so every
    // first-component summand clips at the level and the subtraction of the
    // large squared mean drives v1hat to its floor at zero.
    const Sample X = sample_model(gaussian_model({0.0}, {1.0}), 60, 21);
    const Sample Y = sample_model(gaussian_model({8.0}, {1.0}), 60, 22);
    const VarianceReport r = variance_estimate(X, Y, kl_functional(), 3, 3);
    CHECK(r.comp11 == doctest::Approx(r.truncation_level).epsilon(1e-13));
    CHECK(r.comp12 > std::sqrt(r.truncation_level));
    CHECK(r.v1hat == 0.0);
}

TEST_CASE("renyi at kappa = 1 has exactly zero variance estimates") {
    const Sample X = sample_model(gaussian_model({0.0}, {1.0}), 25, 31);
    const Sample Y = sample_model(gaussian_model({1.0}, {1.0}), 25, 32);
    const VarianceReport r = variance_estimate(X, Y, renyi_functional(1.0), 2, 2);
    CHECK(r.comp11 == 1.0);  // phi is identically one, below the level
    CHECK(r.comp12 == 1.0);
    CHECK(r.comp21 == 0.0);
    CHECK(r.comp22 == 0.0);
    CHECK(r.v1hat == 0.0);
    CHECK(r.v2hat == 0.0);
}

TEST_CASE("plug-in variances concentrate near the Gaussian KL constants") {
    // f = N(0,1), g = N(1,1): v1 = 1 and v2 = e - 1. At m = n = 4000 with
    // the rank pinned to 5 the medians over 200 replications should sit
    // near those constants; the pin keeps the runtime small and the bias
    // stable across replications.
    const int reps = 200;
    std::vector<double> v1(reps), v2(reps);
    for (int r = 0; r < reps; ++r) {
        const Sample X = sample_model(gaussian_model({0.0}, {1.0}), 4000,
                                      5000 + 2 * static_cast<std::uint64_t>(r));
        const Sample Y = sample_model(gaussian_model({1.0}, {1.0}), 4000,
                                      5001 + 2 * static_cast<std::uint64_t>(r));
        const VarianceReport rep = variance_estimate(X, Y, kl_functional(), 5, 5);
        v1[r] = rep.v1hat;
        v2[r] = rep.v2hat;
    }
    const double med1 = median_of_sorted_copy(v1);
    const double med2 = median_of_sorted_copy(v2);
    CHECK(std::abs(med1 - 1.0) <= 0.15);
    CHECK(std::abs(med2 - (std::exp(1.0) - 1.0)) <= 0.35);
}
