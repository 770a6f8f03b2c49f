#include "nnfe/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nnfe/knn.hpp"
#include "nnfe/numeric.hpp"
#include "nnfe/special.hpp"

namespace nnfe {

VarianceReport variance_estimate(const Sample& X, const Sample& Y,
                                 const FunctionalSpec& spec, int k_x, int k_y) {
    if (k_x < 1 || k_y < 1) {
        throw std::invalid_argument("variance_estimate: ranks must be positive");
    }
    const std::size_t m = X.size();
    const int d = X.dim();
    const KnnDistances dist_x = knn_within(X, k_x);
    const KnnDistances dist_y = knn_cross(X, Y, k_y);
    const std::vector<double> fhat = density_estimate(dist_x, m, d, k_x);
    const std::vector<double> ghat = density_estimate(dist_y, Y.size(), d, k_y);

    const double level =
        std::min(std::log(static_cast<double>(m)), std::log(static_cast<double>(Y.size())));

    std::vector<double> phis(m), t11(m), t12(m), t21(m), t22(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto x = X.row(i);
        const double u = fhat[i], v = ghat[i];
        phis[i] = spec.phi(u, v, x);
        const double f_phi10 = u * spec.phi10(u, v, x);
        const double phi01 = spec.phi01(u, v, x);
        const double a = phis[i] + f_phi10;
        t11[i] = std::min(a * a, level);
        t12[i] = f_phi10;
        t21[i] = std::min(u * v * phi01 * phi01, level);
        t22[i] = v * phi01;
    }

    VarianceReport report;
    report.truncation_level = level;
    report.comp11 = mean(t11);
    report.comp12 = mean(phis) + mean(t12);
    report.comp21 = mean(t21);
    report.comp22 = mean(t22);
    report.v1hat = std::max(report.comp11 - report.comp12 * report.comp12, 0.0);
    report.v2hat = std::max(report.comp21 - report.comp22 * report.comp22, 0.0);
    return report;
}

ConfidenceInterval confidence_interval(double point, const VarianceReport& var,
                                       std::size_t m, std::size_t n, double q) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw std::invalid_argument("confidence_interval: need 0 < q < 1");
    }
    if (m < 1 || n < 1) {
        throw std::invalid_argument("confidence_interval: need m, n >= 1");
    }
    const double z = normal_quantile(1.0 - 0.5 * q);
    ConfidenceInterval ci;
    ci.level = 1.0 - q;
    ci.half_width = z * std::sqrt(var.v1hat / static_cast<double>(m) +
                                  var.v2hat / static_cast<double>(n));
    ci.lower = point - ci.half_width;
    ci.upper = point + ci.half_width;
    return ci;
}

}  // namespace nnfe
