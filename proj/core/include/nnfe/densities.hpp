#pragma once

// Analytic density models: exact pointwise evaluation, seeded sampling, and
// truth oracles for the target functional value T, the efficiency constants
// v1 and v2, and the oracle variance sigma^2. Oracles come from registered
// closed forms where hand-verifiable, adaptive quadrature in low dimension,
// or Monte Carlo with a reported standard error.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nnfe/functionals.hpp"
#include "nnfe/sample.hpp"

namespace nnfe {

struct DensityModel {
    enum class Kind { Gaussian, SphericalBeta, Uniform };

    Kind kind = Kind::Gaussian;
    int d = 1;

    std::vector<double> mean, var;  // Gaussian with diagonal covariance
    double a = 1.0, b = 1.0;        // SphericalBeta exponents
    std::vector<double> lo, hi;     // Uniform box

    double pdf(std::span<const double> x) const;
    std::string name() const;
};

DensityModel gaussian_model(std::vector<double> mean, std::vector<double> var);
// Density C_{d,a,b} ||x||^{a-1} (1-||x||)^{b-1} on the unit ball, a,b >= 1.
DensityModel spherical_beta_model(double a, double b, int d);
DensityModel uniform_model(std::vector<double> lo, std::vector<double> hi);

// gaussian:<mean>:<var> | sphbeta:<a>:<b>[:<d>] | uniform:<lo>:<hi>, with
// per-dimension values comma-separated. Throws ParseError.
DensityModel parse_model(const std::string& text);

// i.i.d. draws, bit-reproducible for a given seed. SphericalBeta draws the
// radius by Beta inverse CDF and an independent uniform direction; Gaussians
// go through the normal quantile so the draw count per point is fixed.
Sample sample_model(const DensityModel& model, std::size_t m, std::uint64_t seed);

enum class TruthMethod { Auto, ClosedForm, Quadrature, MonteCarlo };

struct TruthOracle {
    double T = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    double sigma2 = 0.0;
    TruthMethod method = TruthMethod::ClosedForm;
    // Standard errors: zero for closed forms, the quadrature tolerance, or
    // the Monte Carlo standard error.
    double se_T = 0.0, se_v1 = 0.0, se_v2 = 0.0, se_sigma2 = 0.0;
    std::uint64_t mc_seed = 0;
    std::size_t mc_draws = 0;
};

// Two-sample truth: T = integral of f*phi(f,g,x) over {f>0, g>0},
// v1 = Var_f(phi + f*phi10), v2 = Var_g(f*phi01), sigma2 = Var_f(phi).
TruthOracle truth(const DensityModel& model_f, const DensityModel& model_g,
                  const FunctionalSpec& spec, TruthMethod method = TruthMethod::Auto,
                  std::size_t mc_draws = 1000000, std::uint64_t mc_seed = 12345);

// One-sample truth: T = integral of f*psi(f), sigma2 = Var_f(psi(f)); v1, v2
// are not defined for entropies and are reported as zero.
TruthOracle truth_one_sample(const DensityModel& model_f, const OneSampleSpec& spec,
                             TruthMethod method = TruthMethod::Auto,
                             std::size_t mc_draws = 1000000,
                             std::uint64_t mc_seed = 12345);

}  // namespace nnfe
