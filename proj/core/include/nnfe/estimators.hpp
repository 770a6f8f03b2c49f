#pragma once

// Point estimators. The naive plug-in replaces density values by k-nearest-
// neighbour estimates; the weighted variants combine naive estimates across
// neighbour ranks with bias-cancelling weights; the debiased variants apply
// the digamma shift (KL) or Gamma-ratio prefactor (Renyi). Oracle estimators
// evaluate the integrand at the true densities and serve as benchmarks.

#include <optional>
#include <string>
#include <vector>

#include "nnfe/densities.hpp"
#include "nnfe/functionals.hpp"
#include "nnfe/sample.hpp"
#include "nnfe/weights.hpp"

namespace nnfe {

enum class WeightMode { Unweighted, General, ClassSpecific };

enum class EstimatorVariant { Naive, Weighted, Debiased, DebiasedWeighted };

// naive | weighted | debiased | debiased-weighted. Throws ParseError.
EstimatorVariant parse_estimator(const std::string& name);
std::string estimator_name(EstimatorVariant v);

struct EstimatorConfig {
    static constexpr int kAuto = 0;

    int k_x = kAuto;
    int k_y = kAuto;
    WeightMode weight_mode = WeightMode::Unweighted;
    double c = 0.25;
    // Moment-vanishing order for the general weight class; -1 derives
    // ceil((ceil(beta*) - 1) / 2) from the functional's regularity.
    int moment_order_x = -1;
    int moment_order_y = -1;
};

struct EstimateReport {
    double value = 0.0;
    // The m summand values actually averaged; value is their mean.
    std::vector<double> per_point_terms;
    int k_x = 0;
    int k_y = 0;
    WeightMode weight_mode = WeightMode::Unweighted;
    double c = 0.25;
    std::string functional;
    std::string weight_class = "none";
    std::optional<WeightVector> weights_x, weights_y;
};

// ceil(size^{1/beta*} log size), the default neighbour-count rule. Callers
// clamp to the valid range for their geometry.
int resolve_auto_k(std::size_t size, double beta_star);

// Moment-vanishing order derived from a smoothness exponent: with
// beta-underbar = ceil(beta*) - 1, returns ceil(beta-underbar / 2).
int derived_moment_order(double beta_star);

EstimateReport naive_estimate(const Sample& X, const Sample& Y,
                              const FunctionalSpec& spec, int k_x, int k_y);

// Double-weighted combination over neighbour ranks (j_x, j_y), with
// minimum-norm general-class weights at (k_x, k_y). Geometry is computed
// once at the top rank and sliced per j.
EstimateReport weighted_estimate(const Sample& X, const Sample& Y,
                                 const FunctionalSpec& spec,
                                 const EstimatorConfig& config);

// KL divergence with the digamma correction Psi(k) - log k applied per
// sample side; weighted variant combines per-rank debiased estimates with
// the KL weight class.
EstimateReport kl_debiased_estimate(const Sample& X, const Sample& Y, int k_x,
                                    int k_y, bool weighted, double c = 0.25);

// Renyi integral with the Gamma-ratio prefactor
// k_x^{1-kappa} Gamma(k_x) k_y^{kappa-1} Gamma(k_y)
//   / (Gamma(k_x - kappa + 1) Gamma(k_y + kappa - 1)),
// computed in log-Gamma space. Requires kappa > 1/2 (the bias expansion
// behind the correction needs the reciprocal-density moment E g^{1-kappa}
// to be finite) and both Gamma arguments positive.
EstimateReport renyi_debiased_estimate(const Sample& X, const Sample& Y,
                                       double kappa, int k_x, int k_y,
                                       bool weighted, double c = 0.25);

// One-sample entropies. Debiasing replaces k with e^{Psi(k)} inside the
// density estimate; for Shannon this adds log k - Psi(k) to the estimate.
// The weighted variant combines ranks with the KL class (Shannon) or the
// Renyi class at b = kappa - 1 (Renyi entropy).
EstimateReport one_sample_estimate(const Sample& X, const OneSampleSpec& spec,
                                   int k, bool debias, bool weighted = false,
                                   double c = 0.25);

// Dispatch by estimator variant, resolving auto-k from the functional's
// regularity (clamped to the valid range). Debiased variants require a KL
// or Renyi functional.
EstimateReport run_two_sample_estimator(const Sample& X, const Sample& Y,
                                        const FunctionalSpec& spec,
                                        EstimatorVariant variant,
                                        const EstimatorConfig& config);
EstimateReport run_one_sample_estimator(const Sample& X, const OneSampleSpec& spec,
                                        EstimatorVariant variant,
                                        const EstimatorConfig& config);

// Benchmarks with the true densities plugged in.
double oracle_estimate(const Sample& X, const DensityModel& model_f,
                       const DensityModel& model_g, const FunctionalSpec& spec);
double oracle_estimate(const Sample& X, const DensityModel& model_f,
                       const OneSampleSpec& spec);

}  // namespace nnfe
