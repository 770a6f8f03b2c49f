#pragma once

// Catalogue of the integrand functionals phi(u,v,x) with their partial
// derivatives in u and v, and the one-sample entropy integrands psi(y).
// The regularity tags ride along for diagnostics and the automatic k rule;
// they never enter an estimate.

#include <functional>
#include <memory>
#include <span>
#include <string>

namespace nnfe {

struct Regularity {
    double kappa1 = 0.05;
    double kappa2 = 0.05;
    double beta1_star = 4.0;
    double beta2_star = 4.0;
    double L = 2.0;
};

struct FunctionalSpec {
    enum class Kind { KL, Renyi, IntFG, WeightedPhi };

    Kind kind = Kind::KL;
    double kappa = 1.0;  // Renyi order, unused by other kinds
    Regularity regularity{};

    // WeightedPhi only: phi(u,v,x) = weight(x) * base->phi(u,v,x).
    std::shared_ptr<const FunctionalSpec> base;
    std::function<double(std::span<const double>)> weight;

    double phi(double u, double v, std::span<const double> x) const;
    double phi10(double u, double v, std::span<const double> x) const;
    double phi01(double u, double v, std::span<const double> x) const;

    std::string name() const;
};

struct OneSampleSpec {
    enum class Kind { Shannon, RenyiEntropy };

    Kind kind = Kind::Shannon;
    double kappa = 1.0;  // RenyiEntropy order
    Regularity regularity{};

    double psi(double y) const;
    double psi_prime(double y) const;

    std::string name() const;
};

FunctionalSpec kl_functional();
FunctionalSpec renyi_functional(double kappa);
FunctionalSpec intfg_functional();
FunctionalSpec weighted_phi_functional(
    FunctionalSpec base, std::function<double(std::span<const double>)> weight);

OneSampleSpec shannon_spec();
OneSampleSpec renyi_entropy_spec(double kappa);

// CLI-facing names: kl, renyi:<kappa>, intfg / shannon, renyi-entropy:<kappa>.
// Throw ParseError for anything else.
FunctionalSpec parse_functional(const std::string& name);
OneSampleSpec parse_one_sample(const std::string& name);
bool is_one_sample_name(const std::string& name);

}  // namespace nnfe
