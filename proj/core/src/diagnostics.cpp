#include "nnfe/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nnfe/estimators.hpp"

namespace nnfe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double safe_div(double num, double den) {
    return den == 0.0 ? kNaN : num / den;
}

double tau(double dd, double beta, double beta_star, double lambda, double zeta) {
    const double branch4 = safe_div(1.0, 2.0 * lambda * (1.0 - zeta));
    const double worst = std::max({dd / (2.0 * beta),
                                   dd / (2.0 * std::min(2.0, beta) + dd),
                                   dd / (4.0 * beta_star), branch4});
    return 1.0 - worst;
}

}  // namespace

DerivedParams derive_params(int d, const ClassParams& p) {
    if (d < 1) {
        throw std::invalid_argument("derive_params: need d >= 1");
    }
    if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.lambda1 > 0.0) ||
        !(p.lambda2 > 0.0) || !(p.gamma > 0.0) || !(p.C > 0.0)) {
        throw std::invalid_argument(
            "derive_params: class parameters must be strictly positive");
    }
    const double dd = static_cast<double>(d);
    const double a = p.alpha;
    const double k1 = p.xi.kappa1, k2 = p.xi.kappa2;

    DerivedParams out;
    out.zeta = k1 / p.lambda1 + k2 / p.lambda2 + dd * (k1 + k2) / a;
    out.tau1 = tau(dd, p.beta, p.xi.beta1_star, p.lambda1, out.zeta);
    out.tau2 = tau(dd, p.beta, p.xi.beta2_star, p.lambda2, out.zeta);

    out.gamma_star =
        safe_div((2.0 * a + dd) * (1.0 + 2.0 * k2), 2.0 * a + dd - 2.0 * (a + dd) * k1);
    out.gamma1_star =
        safe_div(6.0 * k2 * (2.0 * a + dd), 3.0 * a + dd - 6.0 * k1 * (a + dd));
    out.tau1_star = 1.0 - safe_div(3.0 * a + 3.0 * dd,
                                   3.0 * a + 3.0 * dd +
                                       (3.0 * a + dd - 6.0 * k1 * (a + dd)) *
                                           (1.0 - out.gamma1_star / p.gamma));
    out.gamma2_star =
        safe_div(3.0 * (1.0 + 2.0 * k2) * (2.0 * a + dd),
                 2.0 * (4.0 * a + 3.0 * dd - (1.0 + 3.0 * k1) * (a + dd)));
    out.tau2_star =
        1.0 - safe_div(1.0, 1.0 + (1.0 + 2.0 * k2) * (p.gamma / out.gamma2_star - 1.0));

    out.zeta_ok = out.zeta < 0.5;
    out.tau1_ok = out.tau1 > 1.0 / p.xi.beta1_star;
    out.tau2_ok = out.tau2 > 1.0 / p.xi.beta2_star;
    out.gamma_ok = std::isfinite(out.gamma_star) && p.gamma > out.gamma_star;
    out.gamma_strong_ok = std::isfinite(out.gamma1_star) &&
                          std::isfinite(out.gamma2_star) &&
                          std::min(out.gamma1_star, out.gamma2_star) > 0.0 &&
                          p.gamma > std::max(out.gamma1_star, out.gamma2_star);
    return out;
}

namespace {

// floor(size^{tau-eps}); a non-positive exponent keeps the range empty.
int upper_k(std::size_t size, double tau_value) {
    constexpr double kEps = 0.01;
    const double expo = tau_value - kEps;
    if (!std::isfinite(expo) || expo <= 0.0) return 0;
    return static_cast<int>(std::floor(std::pow(static_cast<double>(size), expo)));
}

}  // namespace

KRange k_range(int d, const ClassParams& params, std::size_t m, std::size_t n) {
    const DerivedParams derived = derive_params(d, params);
    KRange r;
    const int m_cap = std::max(static_cast<int>(m) - 1, 1);
    const int n_cap = std::max(static_cast<int>(n) - 1, 1);
    r.k_x_lo = std::clamp(resolve_auto_k(m, params.xi.beta1_star), 1, m_cap);
    r.k_y_lo = std::clamp(resolve_auto_k(n, params.xi.beta2_star), 1, n_cap);
    r.k_x_hi = std::clamp(upper_k(m, derived.tau1), 0, m_cap);
    r.k_y_hi = std::clamp(upper_k(n, derived.tau2), 0, n_cap);
    r.x_empty = r.k_x_lo > r.k_x_hi;
    r.y_empty = r.k_y_lo > r.k_y_hi;
    return r;
}

}  // namespace nnfe
