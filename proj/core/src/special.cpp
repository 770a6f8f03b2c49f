#include "nnfe/special.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nnfe {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178032973640562;

// Stirling series tail for log Gamma: sum B_{2n} / (2n(2n-1) x^{2n-1}).
// With the recurrence pushing x to >= 6, truncating after the x^{-13}
// term leaves an error below 1e-13 absolute.
double stirling_log_gamma_tail(double x) {
    const double r = 1.0 / (x * x);
    double s = 1.0 / 156.0;
    s = s * r - 691.0 / 360360.0;
    s = s * r + 1.0 / 1188.0;
    s = s * r - 1.0 / 1680.0;
    s = s * r + 1.0 / 1260.0;
    s = s * r - 1.0 / 360.0;
    s = s * r + 1.0 / 12.0;
    return s / x;
}

// Asymptotic tail for digamma: sum B_{2n} / (2n x^{2n}), subtracted from
// log x - 1/(2x). Terms through x^{-14} keep the error below 1e-14 for
// x >= 6.
double digamma_tail(double x) {
    const double r = 1.0 / (x * x);
    double s = -1.0 / 12.0;
    s = s * r + 691.0 / 32760.0;
    s = s * r - 1.0 / 132.0;
    s = s * r + 1.0 / 240.0;
    s = s * r - 1.0 / 252.0;
    s = s * r + 1.0 / 120.0;
    s = s * r - 1.0 / 12.0;
    return s * r;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("log_gamma: argument must be positive, got " +
                                    std::to_string(x));
    }
    // Raise the argument above 6 via Gamma(x) = Gamma(x+n) / (x...(x+n-1)),
    // then apply the Stirling expansion.
    double shift = 0.0;
    while (x < 6.0) {
        shift -= std::log(x);
        x += 1.0;
    }
    return shift + (x - 0.5) * std::log(x) - x + kHalfLogTwoPi +
           stirling_log_gamma_tail(x);
}

double digamma(double x) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("digamma: argument must be positive, got " +
                                    std::to_string(x));
    }
    // Psi(x) = Psi(x+1) - 1/x raises the argument above 6.
    double shift = 0.0;
    while (x < 6.0) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    return shift + std::log(x) - 0.5 / x + digamma_tail(x);
}

double normal_cdf(double x) {
    // erfc keeps full relative accuracy in the lower tail.
    return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must lie in (0,1), got " +
                                    std::to_string(p));
    }
    // Bisection on the CDF. The bracket [-40, 40] covers every p
    // representable in double away from 0 and 1; 70 halvings bring the
    // bracket width under 1e-19, well past the 1e-12 target.
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 70 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double unit_ball_volume(int d) {
    if (d < 1) {
        throw std::invalid_argument("unit_ball_volume: dimension must be >= 1, got " +
                                    std::to_string(d));
    }
    const double half_d = 0.5 * static_cast<double>(d);
    return std::exp(half_d * std::log(M_PI) - log_gamma(half_d + 1.0));
}

}  // namespace nnfe
