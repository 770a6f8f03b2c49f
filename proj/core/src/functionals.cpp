#include "nnfe/functionals.hpp"

#include <cmath>
#include <stdexcept>

#include "nnfe/errors.hpp"

namespace nnfe {

namespace {

void check_positive(double u, double v) {
    if (!(u > 0.0) || !(v > 0.0)) {
        throw std::invalid_argument("functional: phi requires u > 0 and v > 0, got u=" +
                                    std::to_string(u) + " v=" + std::to_string(v));
    }
}

double parse_order(const std::string& name, std::size_t colon) {
    const std::string arg = name.substr(colon + 1);
    std::size_t used = 0;
    double kappa = 0.0;
    try {
        kappa = std::stod(arg, &used);
    } catch (const std::exception&) {
        throw ParseError("functional '" + name + "': order after ':' is not a number");
    }
    if (used != arg.size() || !std::isfinite(kappa) || kappa <= 0.0) {
        throw ParseError("functional '" + name + "': order must be a positive real");
    }
    return kappa;
}

}  // namespace

double FunctionalSpec::phi(double u, double v, std::span<const double> x) const {
    check_positive(u, v);
    switch (kind) {
        case Kind::KL:
            return std::log(u / v);
        case Kind::Renyi:
            return std::pow(u / v, kappa - 1.0);
        case Kind::IntFG:
            return v;
        case Kind::WeightedPhi:
            return weight(x) * base->phi(u, v, x);
    }
    throw std::logic_error("FunctionalSpec: unknown kind");
}

double FunctionalSpec::phi10(double u, double v, std::span<const double> x) const {
    check_positive(u, v);
    switch (kind) {
        case Kind::KL:
            return 1.0 / u;
        case Kind::Renyi:
            return (kappa - 1.0) * std::pow(u, kappa - 2.0) * std::pow(v, 1.0 - kappa);
        case Kind::IntFG:
            return 0.0;
        case Kind::WeightedPhi:
            return weight(x) * base->phi10(u, v, x);
    }
    throw std::logic_error("FunctionalSpec: unknown kind");
}

double FunctionalSpec::phi01(double u, double v, std::span<const double> x) const {
    check_positive(u, v);
    switch (kind) {
        case Kind::KL:
            return -1.0 / v;
        case Kind::Renyi:
            return (1.0 - kappa) * std::pow(u, kappa - 1.0) * std::pow(v, -kappa);
        case Kind::IntFG:
            return 1.0;
        case Kind::WeightedPhi:
            return weight(x) * base->phi01(u, v, x);
    }
    throw std::logic_error("FunctionalSpec: unknown kind");
}

std::string FunctionalSpec::name() const {
    switch (kind) {
        case Kind::KL:
            return "kl";
        case Kind::Renyi:
            return "renyi:" + std::to_string(kappa);
        case Kind::IntFG:
            return "intfg";
        case Kind::WeightedPhi:
            return "weighted-phi(" + base->name() + ")";
    }
    return "?";
}

double OneSampleSpec::psi(double y) const {
    if (!(y > 0.0)) {
        throw std::invalid_argument("one-sample functional: psi requires y > 0, got " +
                                    std::to_string(y));
    }
    switch (kind) {
        case Kind::Shannon:
            return -std::log(y);
        case Kind::RenyiEntropy:
            return std::pow(y, kappa - 1.0);
    }
    throw std::logic_error("OneSampleSpec: unknown kind");
}

double OneSampleSpec::psi_prime(double y) const {
    if (!(y > 0.0)) {
        throw std::invalid_argument("one-sample functional: psi requires y > 0, got " +
                                    std::to_string(y));
    }
    switch (kind) {
        case Kind::Shannon:
            return -1.0 / y;
        case Kind::RenyiEntropy:
            return (kappa - 1.0) * std::pow(y, kappa - 2.0);
    }
    throw std::logic_error("OneSampleSpec: unknown kind");
}

std::string OneSampleSpec::name() const {
    switch (kind) {
        case Kind::Shannon:
            return "shannon";
        case Kind::RenyiEntropy:
            return "renyi-entropy:" + std::to_string(kappa);
    }
    return "?";
}

FunctionalSpec kl_functional() {
    FunctionalSpec s;
    s.kind = FunctionalSpec::Kind::KL;
    return s;
}

FunctionalSpec renyi_functional(double kappa) {
    FunctionalSpec s;
    s.kind = FunctionalSpec::Kind::Renyi;
    s.kappa = kappa;
    // Matches the bias analysis for the Renyi integrand: the u-exponent is
    // kappa-1, so the negative part bounds the singularity near u=0 and the
    // positive part the growth.
    s.regularity.kappa1 = std::max(1.0 - kappa, 0.0);
    s.regularity.kappa2 = std::max(kappa - 1.0, 0.0);
    return s;
}

FunctionalSpec intfg_functional() {
    FunctionalSpec s;
    s.kind = FunctionalSpec::Kind::IntFG;
    s.regularity.kappa1 = 0.0;
    s.regularity.kappa2 = 1.0;  // phi = v grows linearly in the densities
    return s;
}

FunctionalSpec weighted_phi_functional(
    FunctionalSpec base, std::function<double(std::span<const double>)> weight) {
    if (!weight) {
        throw std::invalid_argument("weighted_phi_functional: weight function is empty");
    }
    FunctionalSpec s;
    s.kind = FunctionalSpec::Kind::WeightedPhi;
    s.regularity = base.regularity;
    s.base = std::make_shared<const FunctionalSpec>(std::move(base));
    s.weight = std::move(weight);
    return s;
}

OneSampleSpec shannon_spec() {
    OneSampleSpec s;
    s.kind = OneSampleSpec::Kind::Shannon;
    return s;
}

OneSampleSpec renyi_entropy_spec(double kappa) {
    OneSampleSpec s;
    s.kind = OneSampleSpec::Kind::RenyiEntropy;
    s.kappa = kappa;
    s.regularity.kappa1 = std::max(1.0 - kappa, 0.0);
    s.regularity.kappa2 = std::max(kappa - 1.0, 0.0);
    return s;
}

FunctionalSpec parse_functional(const std::string& name) {
    if (name == "kl") return kl_functional();
    if (name == "intfg") return intfg_functional();
    if (name.rfind("renyi:", 0) == 0) return renyi_functional(parse_order(name, 5));
    throw ParseError("unknown functional '" + name +
                     "' (two-sample kinds: kl, renyi:<kappa>, intfg)");
}

OneSampleSpec parse_one_sample(const std::string& name) {
    if (name == "shannon") return shannon_spec();
    if (name.rfind("renyi-entropy:", 0) == 0) {
        return renyi_entropy_spec(parse_order(name, 13));
    }
    throw ParseError("unknown one-sample functional '" + name +
                     "' (kinds: shannon, renyi-entropy:<kappa>)");
}

bool is_one_sample_name(const std::string& name) {
    return name == "shannon" || name.rfind("renyi-entropy:", 0) == 0;
}

}  // namespace nnfe
