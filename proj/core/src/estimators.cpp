#include "nnfe/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nnfe/errors.hpp"
#include "nnfe/knn.hpp"
#include "nnfe/numeric.hpp"
#include "nnfe/special.hpp"

namespace nnfe {

EstimatorVariant parse_estimator(const std::string& name) {
    if (name == "naive") return EstimatorVariant::Naive;
    if (name == "weighted") return EstimatorVariant::Weighted;
    if (name == "debiased") return EstimatorVariant::Debiased;
    if (name == "debiased-weighted") return EstimatorVariant::DebiasedWeighted;
    throw ParseError("unknown estimator '" + name +
                     "' (known: naive, weighted, debiased, debiased-weighted)");
}

std::string estimator_name(EstimatorVariant v) {
    switch (v) {
        case EstimatorVariant::Naive: return "naive";
        case EstimatorVariant::Weighted: return "weighted";
        case EstimatorVariant::Debiased: return "debiased";
        case EstimatorVariant::DebiasedWeighted: return "debiased-weighted";
    }
    return "?";
}

int resolve_auto_k(std::size_t size, double beta_star) {
    if (size < 1) {
        throw std::invalid_argument("resolve_auto_k: empty sample");
    }
    if (!(beta_star > 0.0)) {
        throw std::invalid_argument("resolve_auto_k: need beta* > 0");
    }
    const double s = static_cast<double>(size);
    return static_cast<int>(std::ceil(std::pow(s, 1.0 / beta_star) * std::log(s)));
}

int derived_moment_order(double beta_star) {
    const int under = static_cast<int>(std::ceil(beta_star)) - 1;
    return under <= 0 ? 0 : (under + 1) / 2;
}

namespace {

std::string fmt_g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

// All weight mass on rank k: reproduces the unweighted estimator through
// the same combination path, bit for bit.
WeightVector degenerate_weights(int k, int d, double c) {
    WeightVector w;
    w.k = k;
    w.d = d;
    w.c = c;
    w.w.assign(static_cast<std::size_t>(k), 0.0);
    w.w.back() = 1.0;
    w.first_allowed = k;
    w.l1_norm = 1.0;
    return w;
}

std::vector<int> nonzero_ranks(const WeightVector& w) {
    std::vector<int> ranks;
    for (int j = 1; j <= w.k; ++j) {
        if (w.w[static_cast<std::size_t>(j - 1)] != 0.0) ranks.push_back(j);
    }
    return ranks;
}

// Shared driver: geometry once at the top ranks, density estimates sliced
// per rank, then the weighted double sum accumulated per point so that the
// report's value is exactly the mean of its per-point terms.
template <typename Term>
EstimateReport combine_two_sample(const Sample& X, const Sample& Y,
                                  const WeightVector& wx, const WeightVector& wy,
                                  Term term) {
    const std::size_t m = X.size();
    const int d = X.dim();
    const KnnDistances dist_x = knn_within(X, wx.k);
    const KnnDistances dist_y = knn_cross(X, Y, wy.k);

    const std::vector<int> jxs = nonzero_ranks(wx);
    const std::vector<int> jys = nonzero_ranks(wy);
    std::vector<std::vector<double>> fhat, ghat;
    fhat.reserve(jxs.size());
    ghat.reserve(jys.size());
    for (int j : jxs) fhat.push_back(density_estimate(dist_x, m, d, j));
    for (int j : jys) ghat.push_back(density_estimate(dist_y, Y.size(), d, j));

    std::vector<double> terms(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto x = X.row(i);
        double t = 0.0;
        for (std::size_t a = 0; a < jxs.size(); ++a) {
            const double wxa = wx.w[static_cast<std::size_t>(jxs[a] - 1)];
            for (std::size_t b = 0; b < jys.size(); ++b) {
                const double wyb = wy.w[static_cast<std::size_t>(jys[b] - 1)];
                t += wxa * wyb * term(jxs[a], jys[b], fhat[a][i], ghat[b][i], x);
            }
        }
        terms[i] = t;
    }

    EstimateReport report;
    report.value = mean(terms);
    report.per_point_terms = std::move(terms);
    report.k_x = wx.k;
    report.k_y = wy.k;
    return report;
}

template <typename Term>
EstimateReport combine_one_sample(const Sample& X, const WeightVector& w, Term term) {
    const std::size_t m = X.size();
    const int d = X.dim();
    const KnnDistances dist = knn_within(X, w.k);

    const std::vector<int> js = nonzero_ranks(w);
    std::vector<std::vector<double>> fhat;
    fhat.reserve(js.size());
    for (int j : js) fhat.push_back(density_estimate(dist, m, d, j));

    std::vector<double> terms(m);
    for (std::size_t i = 0; i < m; ++i) {
        double t = 0.0;
        for (std::size_t a = 0; a < js.size(); ++a) {
            t += w.w[static_cast<std::size_t>(js[a] - 1)] * term(js[a], fhat[a][i]);
        }
        terms[i] = t;
    }

    EstimateReport report;
    report.value = mean(terms);
    report.per_point_terms = std::move(terms);
    report.k_x = w.k;
    return report;
}

void check_rank(int k, const char* label) {
    if (k < 1) {
        throw std::invalid_argument(std::string("estimate: ") + label +
                                    " must be a positive rank");
    }
}

}  // namespace

EstimateReport naive_estimate(const Sample& X, const Sample& Y,
                              const FunctionalSpec& spec, int k_x, int k_y) {
    check_rank(k_x, "k_x");
    check_rank(k_y, "k_y");
    EstimateReport report = combine_two_sample(
        X, Y, degenerate_weights(k_x, X.dim(), 0.25),
        degenerate_weights(k_y, X.dim(), 0.25),
        [&spec](int, int, double fh, double gh, std::span<const double> x) {
            return spec.phi(fh, gh, x);
        });
    report.functional = spec.name();
    return report;
}

namespace {

struct ResolvedKs {
    int k_x, k_y;
};

ResolvedKs resolve_ks(const Sample& X, const Sample& Y, const Regularity& reg,
                      const EstimatorConfig& config) {
    ResolvedKs r{config.k_x, config.k_y};
    const int m_cap = static_cast<int>(X.size()) - 1;
    const int n_cap = static_cast<int>(Y.size());
    if (r.k_x == EstimatorConfig::kAuto) {
        r.k_x = std::clamp(resolve_auto_k(X.size(), reg.beta1_star), 1, std::max(m_cap, 1));
    }
    if (r.k_y == EstimatorConfig::kAuto) {
        r.k_y = std::clamp(resolve_auto_k(Y.size(), reg.beta2_star), 1, n_cap);
    }
    return r;
}

}  // namespace

EstimateReport weighted_estimate(const Sample& X, const Sample& Y,
                                 const FunctionalSpec& spec,
                                 const EstimatorConfig& config) {
    const ResolvedKs ks = resolve_ks(X, Y, spec.regularity, config);
    const int d = X.dim();
    const int I_x = config.moment_order_x >= 0
                        ? config.moment_order_x
                        : derived_moment_order(spec.regularity.beta1_star);
    const int I_y = config.moment_order_y >= 0
                        ? config.moment_order_y
                        : derived_moment_order(spec.regularity.beta2_star);
    const WeightVector& wx = cached_general_weights(ks.k_x, d, I_x, config.c);
    const WeightVector& wy = cached_general_weights(ks.k_y, d, I_y, config.c);

    EstimateReport report = combine_two_sample(
        X, Y, wx, wy,
        [&spec](int, int, double fh, double gh, std::span<const double> x) {
            return spec.phi(fh, gh, x);
        });
    report.functional = spec.name();
    report.weight_mode = WeightMode::General;
    report.c = config.c;
    report.weight_class = "general(I_x=" + std::to_string(I_x) +
                          ",I_y=" + std::to_string(I_y) + ",c=" + fmt_g(config.c) + ")";
    report.weights_x = wx;
    report.weights_y = wy;
    return report;
}

EstimateReport kl_debiased_estimate(const Sample& X, const Sample& Y, int k_x,
                                    int k_y, bool weighted, double c) {
    check_rank(k_x, "k_x");
    check_rank(k_y, "k_y");
    const FunctionalSpec spec = kl_functional();
    const int d = X.dim();

    // Per-rank digamma shift; at equal ranks the two sides cancel exactly.
    auto shift = [](int j) {
        return digamma(static_cast<double>(j)) - std::log(static_cast<double>(j));
    };
    auto term = [&spec, &shift](int jx, int jy, double fh, double gh,
                                std::span<const double> x) {
        return spec.phi(fh, gh, x) + (shift(jx) - shift(jy));
    };

    EstimateReport report =
        weighted ? combine_two_sample(X, Y, cached_kl_weights(k_x, d, c),
                                      cached_kl_weights(k_y, d, c), term)
                 : combine_two_sample(X, Y, degenerate_weights(k_x, d, c),
                                      degenerate_weights(k_y, d, c), term);
    report.functional = spec.name();
    report.c = c;
    if (weighted) {
        report.weight_mode = WeightMode::ClassSpecific;
        report.weight_class = "kl(c=" + fmt_g(c) + ")";
        report.weights_x = cached_kl_weights(k_x, d, c);
        report.weights_y = cached_kl_weights(k_y, d, c);
    }
    return report;
}

namespace {

// log of the X-side Renyi debias factor at one rank; throws on a Gamma
// pole. kappa = 1 gives exactly zero, hence a factor of exactly one. The
// same factor debiases the one-sample Renyi integral estimator.
double log_renyi_prefactor_x(int j, double kappa) {
    const double a = static_cast<double>(j) - kappa + 1.0;
    if (!(a > 0.0)) {
        throw std::runtime_error(
            "renyi debias: Gamma(k_x - kappa + 1) pole at rank " +
            std::to_string(j) + " with kappa=" + fmt_g(kappa) +
            "; increase k or c");
    }
    return (1.0 - kappa) * std::log(static_cast<double>(j)) +
           log_gamma(static_cast<double>(j)) - log_gamma(a);
}

double log_renyi_prefactor_y(int j, double kappa) {
    const double a = static_cast<double>(j) + kappa - 1.0;
    if (!(a > 0.0)) {
        throw std::runtime_error(
            "renyi debias: Gamma(k_y + kappa - 1) pole at rank " +
            std::to_string(j) + " with kappa=" + fmt_g(kappa));
    }
    return (kappa - 1.0) * std::log(static_cast<double>(j)) +
           log_gamma(static_cast<double>(j)) - log_gamma(a);
}

double log_renyi_prefactor(int j_x, int j_y, double kappa) {
    return log_renyi_prefactor_x(j_x, kappa) + log_renyi_prefactor_y(j_y, kappa);
}

}  // namespace

EstimateReport renyi_debiased_estimate(const Sample& X, const Sample& Y,
                                       double kappa, int k_x, int k_y,
                                       bool weighted, double c) {
    check_rank(k_x, "k_x");
    check_rank(k_y, "k_y");
    if (!(kappa > 0.5)) {
        throw std::invalid_argument(
            "renyi debias: requires kappa > 1/2; the Gamma-ratio correction "
            "rests on a bias expansion whose moment E[g^{1-kappa}] of the "
            "reciprocal density diverges otherwise");
    }
    const FunctionalSpec spec = renyi_functional(kappa);
    const int d = X.dim();

    WeightVector wx, wy;
    if (weighted) {
        wx = cached_renyi_weights(k_x, d, kappa - 1.0, c);
        wy = cached_renyi_weights(k_y, d, 1.0 - kappa, c);
    } else {
        wx = degenerate_weights(k_x, d, c);
        wy = degenerate_weights(k_y, d, c);
    }

    // Validate every rank pair in use before touching geometry: a Gamma
    // pole fails the whole estimate rather than renormalising.
    std::vector<double> prefactor(static_cast<std::size_t>(k_x * k_y), 1.0);
    for (int jx : nonzero_ranks(wx)) {
        for (int jy : nonzero_ranks(wy)) {
            prefactor[static_cast<std::size_t>((jx - 1) * k_y + (jy - 1))] =
                std::exp(log_renyi_prefactor(jx, jy, kappa));
        }
    }

    EstimateReport report = combine_two_sample(
        X, Y, wx, wy,
        [&spec, &prefactor, k_y](int jx, int jy, double fh, double gh,
                                 std::span<const double> x) {
            return prefactor[static_cast<std::size_t>((jx - 1) * k_y + (jy - 1))] *
                   spec.phi(fh, gh, x);
        });
    report.functional = spec.name();
    report.c = c;
    if (weighted) {
        report.weight_mode = WeightMode::ClassSpecific;
        report.weight_class = "renyi(b_x=" + fmt_g(kappa - 1.0) +
                              ",b_y=" + fmt_g(1.0 - kappa) + ",c=" + fmt_g(c) + ")";
        report.weights_x = wx;
        report.weights_y = wy;
    }
    return report;
}

EstimateReport one_sample_estimate(const Sample& X, const OneSampleSpec& spec,
                                   int k, bool debias, bool weighted, double c) {
    check_rank(k, "k");
    const int d = X.dim();

    WeightVector w;
    std::string weight_class = "none";
    if (weighted) {
        if (spec.kind == OneSampleSpec::Kind::Shannon) {
            w = cached_kl_weights(k, d, c);
            weight_class = "kl(c=" + fmt_g(c) + ")";
        } else {
            w = cached_renyi_weights(k, d, spec.kappa - 1.0, c);
            weight_class = "renyi(b=" + fmt_g(spec.kappa - 1.0) + ",c=" + fmt_g(c) + ")";
        }
    } else {
        w = degenerate_weights(k, d, c);
    }

    // Debias per functional. Shannon replaces the rank with e^{Psi(rank)}
    // inside the density estimate, which cancels the log-Gamma bias exactly.
    // The Renyi integral is a power of the density, so the correction is the
    // X-side Gamma-ratio prefactor on each term instead; pulling the rank
    // substitution through the power would leave an O(Psi'(k)) bias behind.
    // Identity scale and prefactor keep the raw estimator bit-identical.
    std::vector<double> scale(static_cast<std::size_t>(k), 1.0);
    std::vector<double> prefactor(static_cast<std::size_t>(k), 1.0);
    if (debias) {
        if (spec.kind == OneSampleSpec::Kind::Shannon) {
            for (int j = 1; j <= k; ++j) {
                scale[static_cast<std::size_t>(j - 1)] =
                    std::exp(digamma(static_cast<double>(j))) / static_cast<double>(j);
            }
        } else {
            // Validate every rank in use before touching geometry: a Gamma
            // pole fails the whole estimate rather than renormalising.
            for (int j : nonzero_ranks(w)) {
                prefactor[static_cast<std::size_t>(j - 1)] =
                    std::exp(log_renyi_prefactor_x(j, spec.kappa));
            }
        }
    }

    EstimateReport report =
        combine_one_sample(X, w, [&spec, &scale, &prefactor](int j, double fh) {
            return prefactor[static_cast<std::size_t>(j - 1)] *
                   spec.psi(fh * scale[static_cast<std::size_t>(j - 1)]);
        });
    report.functional = spec.name();
    report.c = c;
    report.weight_class = weight_class;
    if (weighted) {
        report.weight_mode = WeightMode::ClassSpecific;
        report.weights_x = w;
    }
    return report;
}

EstimateReport run_two_sample_estimator(const Sample& X, const Sample& Y,
                                        const FunctionalSpec& spec,
                                        EstimatorVariant variant,
                                        const EstimatorConfig& config) {
    const ResolvedKs ks = resolve_ks(X, Y, spec.regularity, config);
    switch (variant) {
        case EstimatorVariant::Naive:
            return naive_estimate(X, Y, spec, ks.k_x, ks.k_y);
        case EstimatorVariant::Weighted: {
            EstimatorConfig resolved = config;
            resolved.k_x = ks.k_x;
            resolved.k_y = ks.k_y;
            return weighted_estimate(X, Y, spec, resolved);
        }
        case EstimatorVariant::Debiased:
        case EstimatorVariant::DebiasedWeighted: {
            const bool weighted = variant == EstimatorVariant::DebiasedWeighted;
            if (spec.kind == FunctionalSpec::Kind::KL) {
                return kl_debiased_estimate(X, Y, ks.k_x, ks.k_y, weighted, config.c);
            }
            if (spec.kind == FunctionalSpec::Kind::Renyi) {
                return renyi_debiased_estimate(X, Y, spec.kappa, ks.k_x, ks.k_y,
                                               weighted, config.c);
            }
            throw std::invalid_argument(
                "debiased estimators are defined for kl and renyi functionals only");
        }
    }
    throw std::logic_error("run_two_sample_estimator: unknown variant");
}

EstimateReport run_one_sample_estimator(const Sample& X, const OneSampleSpec& spec,
                                        EstimatorVariant variant,
                                        const EstimatorConfig& config) {
    int k = config.k_x;
    if (k == EstimatorConfig::kAuto) {
        const int cap = std::max(static_cast<int>(X.size()) - 1, 1);
        k = std::clamp(resolve_auto_k(X.size(), spec.regularity.beta1_star), 1, cap);
    }
    const bool debias = variant == EstimatorVariant::Debiased ||
                        variant == EstimatorVariant::DebiasedWeighted;
    const bool weighted = variant == EstimatorVariant::Weighted ||
                          variant == EstimatorVariant::DebiasedWeighted;
    return one_sample_estimate(X, spec, k, debias, weighted, config.c);
}

double oracle_estimate(const Sample& X, const DensityModel& model_f,
                       const DensityModel& model_g, const FunctionalSpec& spec) {
    std::vector<double> terms(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto x = X.row(i);
        terms[i] = spec.phi(model_f.pdf(x), model_g.pdf(x), x);
    }
    return mean(terms);
}

double oracle_estimate(const Sample& X, const DensityModel& model_f,
                       const OneSampleSpec& spec) {
    std::vector<double> terms(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        terms[i] = spec.psi(model_f.pdf(X.row(i)));
    }
    return mean(terms);
}

}  // namespace nnfe
