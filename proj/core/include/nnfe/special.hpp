#pragma once

// Scalar special functions used by the estimators: log-Gamma and digamma
// (debiasing identities and weight-class coefficients), the standard normal
// CDF and its inverse (confidence intervals), and the volume of the unit
// d-ball (nearest-neighbour density estimates).

namespace nnfe {

// log Gamma(x) for x > 0, accurate to ~1e-13 relative.
double log_gamma(double x);

// Digamma Psi(x) = d/dx log Gamma(x) for x > 0, accurate to ~1e-13.
double digamma(double x);

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF for p in (0,1), accurate to 1e-12.
double normal_quantile(double p);

// V_d = pi^{d/2} / Gamma(1 + d/2), the Lebesgue volume of the unit ball.
double unit_ball_volume(int d);

}  // namespace nnfe
