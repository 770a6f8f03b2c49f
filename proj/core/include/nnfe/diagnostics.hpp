#pragma once

// Derived rate parameters for the smoothness class (alpha, beta, lambda1,
// lambda2, gamma, C) paired with a functional's regularity exponents, plus
// the neighbour-count range those parameters admit. Purely advisory: the
// estimators accept any valid k, these values only annotate reports and
// flag hypothesis violations.

#include <cstddef>

#include "nnfe/functionals.hpp"

namespace nnfe {

struct ClassParams {
    double alpha = 0.0;
    double beta = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double gamma = 0.0;
    double C = 1.0;
    Regularity xi;  // kappa1, kappa2, beta1*, beta2*, L
};

struct DerivedParams {
    // A parameter whose defining denominator vanishes is NaN and fails its
    // flag.
    double zeta = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    double gamma_star = 0.0;
    double gamma1_star = 0.0;
    double gamma2_star = 0.0;
    double tau1_star = 0.0;
    double tau2_star = 0.0;

    bool zeta_ok = false;          // zeta < 1/2
    bool tau1_ok = false;          // tau1 > 1/beta1*
    bool tau2_ok = false;          // tau2 > 1/beta2*
    bool gamma_ok = false;         // gamma > gamma*
    bool gamma_strong_ok = false;  // min(gamma1*,gamma2*) > 0 and gamma > max of them
};

DerivedParams derive_params(int d, const ClassParams& params);

struct KRange {
    int k_x_lo = 0, k_x_hi = 0;
    int k_y_lo = 0, k_y_hi = 0;
    bool x_empty = false, y_empty = false;
};

// Admissible neighbour counts: lo = ceil(size^{1/beta*} log size),
// hi = floor(size^{tau - eps}) with eps = 0.01, clamped to the geometry's
// valid range. An empty range (lo > hi) is reported, not thrown.
KRange k_range(int d, const ClassParams& params, std::size_t m, std::size_t n);

}  // namespace nnfe
