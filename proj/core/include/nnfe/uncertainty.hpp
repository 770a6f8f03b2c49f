#pragma once

// Plug-in estimators for the two asymptotic variance constants and the
// confidence interval built from them. All four components are averages
// over the X points of the same density estimates the naive estimator
// uses; squared summands are truncated at min(log m, log n).

#include <cstddef>

#include "nnfe/functionals.hpp"
#include "nnfe/sample.hpp"

namespace nnfe {

struct VarianceReport {
    double v1hat = 0.0;  // max(comp11 - comp12^2, 0)
    double v2hat = 0.0;  // max(comp21 - comp22^2, 0)
    double comp11 = 0.0;  // mean of min((phi + fhat*phi10)^2, log m, log n)
    double comp12 = 0.0;  // naive estimate + mean of fhat*phi10
    double comp21 = 0.0;  // mean of min(fhat*ghat*phi01^2, log m, log n)
    double comp22 = 0.0;  // mean of ghat*phi01
    double truncation_level = 0.0;  // min(log m, log n)
};

VarianceReport variance_estimate(const Sample& X, const Sample& Y,
                                 const FunctionalSpec& spec, int k_x, int k_y);

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;  // 1 - q
    double half_width = 0.0;
};

// Interval centred at the point estimate with half-width
// z_{q/2} (v1hat/m + v2hat/n)^{1/2}. Requires 0 < q < 1.
ConfidenceInterval confidence_interval(double point, const VarianceReport& var,
                                       std::size_t m, std::size_t n, double q);

}  // namespace nnfe
