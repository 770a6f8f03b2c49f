#include "nnfe/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>
#include <thread>

#include "nnfe/errors.hpp"
#include "nnfe/estimators.hpp"
#include "nnfe/io.hpp"
#include "nnfe/numeric.hpp"
#include "nnfe/rng.hpp"
#include "nnfe/special.hpp"
#include "nnfe/uncertainty.hpp"

namespace nnfe {

namespace {

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int spawn = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int w = 0; w < spawn; ++w) {
        pool.emplace_back([&next, count, &body] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

double population_variance(std::span<const double> v, double center) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = v[i] - center;
        sq[i] = c * c;
    }
    return mean(sq);
}

double population_covariance(std::span<const double> a, std::span<const double> b,
                             double mean_a, double mean_b) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        prod[i] = (a[i] - mean_a) * (b[i] - mean_b);
    }
    return mean(prod);
}

double fourth_moment(std::span<const double> v, double center) {
    std::vector<double> q(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = v[i] - center;
        q[i] = c * c * c * c;
    }
    return mean(q);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Kolmogorov distance between the empirical law of z and N(0,1).
double kolmogorov_distance(std::vector<double> z) {
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double F = normal_cdf(z[i]);
        dist = std::max(dist, (static_cast<double>(i) + 1.0) / n - F);
        dist = std::max(dist, F - static_cast<double>(i) / n);
    }
    return dist;
}

struct RepOutcome {
    bool ok = false;
    double estimate = 0.0;
    double v1hat = 0.0, v2hat = 0.0;
    double lower = 0.0, upper = 0.0, half_width = 0.0;
    double oracle = 0.0;
    std::string error;
};

// Everything fixed across replications and sweep points.
struct RunContext {
    const ExperimentConfig* config = nullptr;
    bool one_sample = false;
    FunctionalSpec spec;
    OneSampleSpec one_spec;
    EstimatorVariant variant = EstimatorVariant::Naive;
    TruthOracle truth;
    bool need_ci = false;
};

void validate_config(const ExperimentConfig& config) {
    if (config.B < 2) {
        throw std::invalid_argument("experiment: need B >= 2 replications");
    }
    if (config.m_values.empty()) {
        throw std::invalid_argument("experiment: empty m sweep");
    }
    for (std::size_t i = 1; i < config.m_values.size(); ++i) {
        if (config.m_values[i] <= config.m_values[i - 1]) {
            throw std::invalid_argument("experiment: m sweep must be strictly increasing");
        }
    }
    if (!config.n_values.empty() && config.n_values.size() != 1 &&
        config.n_values.size() != config.m_values.size()) {
        throw std::invalid_argument(
            "experiment: n must be a single value or pair up with the m sweep");
    }
    if (!(config.q > 0.0) || !(config.q < 1.0)) {
        throw std::invalid_argument("experiment: need 0 < q < 1");
    }
    if (config.workers < 1) {
        throw std::invalid_argument("experiment: need workers >= 1");
    }
    if (!(config.scale_miscalibration > 0.0)) {
        throw std::invalid_argument("experiment: scale_miscalibration must be positive");
    }
}

RunContext make_context(const ExperimentConfig& config) {
    RunContext ctx;
    ctx.config = &config;
    ctx.one_sample = is_one_sample_name(config.functional);
    ctx.variant = parse_estimator(config.estimator);

    if (ctx.one_sample) {
        ctx.one_spec = parse_one_sample(config.functional);
        if (config.beta1_star > 0.0) ctx.one_spec.regularity.beta1_star = config.beta1_star;
        if (config.experiment == ExperimentKind::Coverage ||
            config.experiment == ExperimentKind::Normality) {
            throw std::invalid_argument(
                "experiment: coverage and normality require a two-sample functional");
        }
        if (config.experiment == ExperimentKind::SuperOracle) {
            if (ctx.one_spec.kind != OneSampleSpec::Kind::RenyiEntropy ||
                !(ctx.one_spec.kappa > 0.5) || !(ctx.one_spec.kappa < 1.0)) {
                throw std::invalid_argument(
                    "super-oracle: needs renyi-entropy with kappa in (1/2, 1)");
            }
            ctx.variant = EstimatorVariant::DebiasedWeighted;
        }
        ctx.truth = truth_one_sample(config.model_f, ctx.one_spec);
    } else {
        if (config.experiment == ExperimentKind::SuperOracle) {
            throw std::invalid_argument(
                "super-oracle: needs a one-sample renyi-entropy functional");
        }
        if (!config.model_g) {
            throw std::invalid_argument("experiment: model_g is required for functional '" +
                                        config.functional + "'");
        }
        ctx.spec = parse_functional(config.functional);
        if (config.beta1_star > 0.0) ctx.spec.regularity.beta1_star = config.beta1_star;
        if (config.beta2_star > 0.0) ctx.spec.regularity.beta2_star = config.beta2_star;
        ctx.truth = truth(config.model_f, *config.model_g, ctx.spec);
    }
    ctx.need_ci = config.experiment == ExperimentKind::Coverage;
    return ctx;
}

RepOutcome run_replication(const RunContext& ctx, std::size_t m, std::size_t n,
                           std::uint64_t point_seed, std::size_t b) {
    const ExperimentConfig& config = *ctx.config;
    RepOutcome out;
    try {
        EstimatorConfig ecfg;
        ecfg.k_x = config.k_x;
        ecfg.k_y = config.k_y;
        ecfg.c = config.c;
        const std::uint64_t seed_x = derive_seed(point_seed, 2 * b);
        if (ctx.one_sample) {
            const Sample X = sample_model(config.model_f, m, seed_x);
            const EstimateReport est =
                run_one_sample_estimator(X, ctx.one_spec, ctx.variant, ecfg);
            out.estimate = est.value;
            if (config.experiment == ExperimentKind::SuperOracle) {
                out.oracle = oracle_estimate(X, config.model_f, ctx.one_spec);
            }
        } else {
            const Sample X = sample_model(config.model_f, m, seed_x);
            const Sample Y =
                sample_model(*config.model_g, n, derive_seed(point_seed, 2 * b + 1));
            const EstimateReport est =
                run_two_sample_estimator(X, Y, ctx.spec, ctx.variant, ecfg);
            out.estimate = est.value;
            if (ctx.need_ci) {
                const VarianceReport vr =
                    variance_estimate(X, Y, ctx.spec, est.k_x, est.k_y);
                const ConfidenceInterval ci =
                    confidence_interval(est.value, vr, m, n, config.q);
                out.v1hat = vr.v1hat;
                out.v2hat = vr.v2hat;
                out.lower = ci.lower;
                out.upper = ci.upper;
                out.half_width = ci.half_width;
            }
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

std::vector<double> collect(const std::vector<RepOutcome>& reps,
                            double RepOutcome::*field) {
    std::vector<double> v;
    v.reserve(reps.size());
    for (const RepOutcome& r : reps) {
        if (r.ok) v.push_back(r.*field);
    }
    return v;
}

SweepPoint run_point(const RunContext& ctx, std::size_t m, std::size_t n,
                     std::size_t point_index) {
    const ExperimentConfig& config = *ctx.config;
    const std::uint64_t point_seed = derive_seed(config.base_seed, point_index);

    std::vector<RepOutcome> reps(config.B);
    parallel_for(config.B, config.workers, [&](std::size_t b) {
        reps[b] = run_replication(ctx, m, n, point_seed, b);
    });

    SweepPoint point;
    point.m = m;
    point.n = n;
    for (const RepOutcome& r : reps) {
        if (!r.ok) {
            ++point.failures;
            if (point.first_failure.empty()) point.first_failure = r.error;
        }
    }
    if (point.failures * 100 > config.B) {
        throw std::runtime_error(
            "experiment aborted: " + std::to_string(point.failures) + " of " +
            std::to_string(config.B) + " replications failed at m=" + std::to_string(m) +
            "; first failure: " + point.first_failure);
    }

    const std::vector<double> est = collect(reps, &RepOutcome::estimate);
    const double B_ok = static_cast<double>(est.size());
    const double T = ctx.truth.T;

    std::vector<Metric>& out = point.metrics;
    if (config.experiment != ExperimentKind::SuperOracle) {
        const double est_mean = mean(est);
        const double est_var = population_variance(est, est_mean);
        const double se_mean = std::sqrt(est_var / B_ok);
        out.push_back({"mean", est_mean, se_mean});
        out.push_back({"bias", est_mean - T, se_mean});
        out.push_back({"variance", est_var,
                       std::sqrt(std::max(fourth_moment(est, est_mean) - est_var * est_var,
                                          0.0) /
                                 B_ok)});
        std::vector<double> sqdev(est.size());
        for (std::size_t i = 0; i < est.size(); ++i) {
            const double e = est[i] - T;
            sqdev[i] = e * e;
        }
        const double mse = mean(sqdev);
        const double se_mse =
            std::sqrt(population_variance(sqdev, mse) / B_ok);
        out.push_back({"mse", mse, se_mse});

        if (!ctx.one_sample) {
            const double theory = ctx.truth.v1 / static_cast<double>(m) +
                                  ctx.truth.v2 / static_cast<double>(n);
            if (theory > 0.0) {
                out.push_back({"mse_ratio_vs_theory", mse / theory, se_mse / theory});
                out.push_back({"mse_ratio_median", median_of(sqdev) / theory, 0.0});
            }
        }
    }

    switch (config.experiment) {
        case ExperimentKind::Coverage: {
            double hits = 0.0;
            for (const RepOutcome& r : reps) {
                if (r.ok && r.lower <= T && T <= r.upper) hits += 1.0;
            }
            const double coverage = hits / B_ok;
            out.push_back(
                {"coverage", coverage, std::sqrt(coverage * (1.0 - coverage) / B_ok)});
            out.push_back(
                {"ci_half_width_median", median_of(collect(reps, &RepOutcome::half_width)), 0.0});
            out.push_back({"v1hat_median", median_of(collect(reps, &RepOutcome::v1hat)), 0.0});
            out.push_back({"v2hat_median", median_of(collect(reps, &RepOutcome::v2hat)), 0.0});
            break;
        }
        case ExperimentKind::Normality: {
            const double scale = std::sqrt(ctx.truth.v1 / static_cast<double>(m) +
                                           ctx.truth.v2 / static_cast<double>(n));
            std::vector<double> z(est.size()), z_control(est.size());
            for (std::size_t i = 0; i < est.size(); ++i) {
                z[i] = (est[i] - T) / scale;
                z_control[i] = z[i] / config.scale_miscalibration;
            }
            out.push_back({"d_k", kolmogorov_distance(z), 0.0});
            out.push_back({"d_k_control", kolmogorov_distance(std::move(z_control)), 0.0});
            break;
        }
        case ExperimentKind::SuperOracle: {
            const std::vector<double> orc = collect(reps, &RepOutcome::oracle);
            std::vector<double> sq_est(est.size()), sq_orc(orc.size());
            for (std::size_t i = 0; i < est.size(); ++i) {
                const double e = est[i] - T;
                const double o = orc[i] - T;
                sq_est[i] = e * e;
                sq_orc[i] = o * o;
            }
            const double mse_est = mean(sq_est);
            const double mse_orc = mean(sq_orc);
            const double var_est = population_variance(sq_est, mse_est);
            const double var_orc = population_variance(sq_orc, mse_orc);
            out.push_back({"estimator_mse", mse_est, std::sqrt(var_est / B_ok)});
            out.push_back({"oracle_mse", mse_orc, std::sqrt(var_orc / B_ok)});
            const double ratio = mse_est / mse_orc;
            // Delta-method standard error for the ratio of two correlated means.
            const double cov = population_covariance(sq_est, sq_orc, mse_est, mse_orc);
            const double rel_var = var_est / (mse_est * mse_est) +
                                   var_orc / (mse_orc * mse_orc) -
                                   2.0 * cov / (mse_est * mse_orc);
            out.push_back({"super_oracle_ratio", ratio,
                           std::abs(ratio) * std::sqrt(std::max(rel_var, 0.0) / B_ok)});
            break;
        }
        case ExperimentKind::Mse:
            break;
    }

    out.push_back({"failures", static_cast<double>(point.failures), 0.0});

    if (!config.metrics.empty()) {
        std::vector<Metric> filtered;
        for (const Metric& metric : out) {
            if (std::find(config.metrics.begin(), config.metrics.end(), metric.name) !=
                config.metrics.end()) {
                filtered.push_back(metric);
            }
        }
        point.metrics = std::move(filtered);
    }
    return point;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    const RunContext ctx = make_context(config);

    ExperimentResult result;
    for (std::size_t p = 0; p < config.m_values.size(); ++p) {
        const std::size_t m = config.m_values[p];
        const std::size_t n = config.n_values.empty()
                                  ? m
                                  : config.n_values[config.n_values.size() == 1 ? 0 : p];
        result.points.push_back(run_point(ctx, m, n, p));
    }
    return result;
}

ExperimentResult coverage_experiment(ExperimentConfig config) {
    config.experiment = ExperimentKind::Coverage;
    return run_experiment(config);
}

ExperimentResult normality_experiment(ExperimentConfig config) {
    config.experiment = ExperimentKind::Normality;
    return run_experiment(config);
}

ExperimentResult super_oracle_experiment(double kappa, const DensityModel& model_f,
                                         std::vector<std::size_t> m_sweep,
                                         std::size_t B, std::uint64_t seed) {
    ExperimentConfig config;
    config.experiment = ExperimentKind::SuperOracle;
    config.model_f = model_f;
    config.functional = "renyi-entropy:" + format_full(kappa);
    config.estimator = "debiased-weighted";
    config.m_values = std::move(m_sweep);
    config.B = B;
    config.base_seed = seed;
    return run_experiment(config);
}

namespace {

const std::set<std::string>& known_metric_names() {
    static const std::set<std::string> names = {
        "mean",        "bias",
        "variance",    "mse",
        "mse_ratio_vs_theory", "mse_ratio_median",
        "coverage",    "ci_half_width_median",
        "v1hat_median", "v2hat_median",
        "d_k",         "d_k_control",
        "estimator_mse", "oracle_mse",
        "super_oracle_ratio", "failures"};
    return names;
}

double config_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ParseError("config key '" + key + "': '" + value + "' is not a number");
    }
    if (used != value.size() || !std::isfinite(v)) {
        throw ParseError("config key '" + key + "': '" + value + "' is not a finite number");
    }
    return v;
}

std::uint64_t config_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ParseError("config key '" + key + "': '" + value +
                         "' is not a non-negative integer");
    }
}

std::string trim_copy(const std::string& s) {
    const std::size_t lo = s.find_first_not_of(" \t");
    if (lo == std::string::npos) return "";
    const std::size_t hi = s.find_last_not_of(" \t");
    return s.substr(lo, hi - lo + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = value.find(',', start);
        if (pos == std::string::npos) {
            items.push_back(trim_copy(value.substr(start)));
            return items;
        }
        items.push_back(trim_copy(value.substr(start, pos - start)));
        start = pos + 1;
    }
}

std::vector<std::size_t> config_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(value)) {
        const std::uint64_t v = config_u64(key, item);
        if (v < 1) {
            throw ParseError("config key '" + key + "': sizes must be >= 1");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

int config_k(const std::string& key, const std::string& value) {
    if (value == "auto") return 0;
    const std::uint64_t v = config_u64(key, value);
    if (v < 1) {
        throw ParseError("config key '" + key + "': expected 'auto' or an integer >= 1");
    }
    return static_cast<int>(v);
}

}  // namespace

ExperimentConfig build_experiment_config(const std::map<std::string, std::string>& kv) {
    static const std::set<std::string> known_keys = {
        "experiment", "model_f", "model_g", "functional", "estimator",
        "m",          "n",       "B",       "base_seed",  "k_x",
        "k_y",        "c",       "q",       "workers",    "scale_miscalibration",
        "beta1_star", "beta2_star", "metrics"};
    for (const auto& [key, value] : kv) {
        if (!known_keys.count(key)) {
            throw ParseError("unknown config key '" + key + "'");
        }
    }
    auto get = [&kv](const std::string& key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto require = [&get](const std::string& key) -> const std::string& {
        const std::string* v = get(key);
        if (!v) throw ParseError("missing required config key '" + key + "'");
        return *v;
    };

    ExperimentConfig config;
    if (const std::string* v = get("experiment")) {
        if (*v == "mse") config.experiment = ExperimentKind::Mse;
        else if (*v == "coverage") config.experiment = ExperimentKind::Coverage;
        else if (*v == "normality") config.experiment = ExperimentKind::Normality;
        else if (*v == "super-oracle") config.experiment = ExperimentKind::SuperOracle;
        else throw ParseError("config key 'experiment': unknown kind '" + *v +
                              "' (known: mse, coverage, normality, super-oracle)");
    }
    auto model_for = [](const std::string& key, const std::string& value) {
        try {
            return parse_model(value);
        } catch (const ParseError& e) {
            throw ParseError("config key '" + key + "': " + e.what());
        }
    };
    config.model_f = model_for("model_f", require("model_f"));
    if (const std::string* v = get("model_g")) config.model_g = model_for("model_g", *v);
    if (const std::string* v = get("functional")) config.functional = *v;
    if (const std::string* v = get("estimator")) config.estimator = *v;
    config.m_values = config_size_list("m", require("m"));
    if (const std::string* v = get("n")) config.n_values = config_size_list("n", *v);
    config.B = static_cast<std::size_t>(config_u64("B", require("B")));
    if (const std::string* v = get("base_seed")) config.base_seed = config_u64("base_seed", *v);
    if (const std::string* v = get("k_x")) config.k_x = config_k("k_x", *v);
    if (const std::string* v = get("k_y")) config.k_y = config_k("k_y", *v);
    if (const std::string* v = get("c")) config.c = config_double("c", *v);
    if (const std::string* v = get("q")) config.q = config_double("q", *v);
    if (const std::string* v = get("workers")) {
        config.workers = static_cast<int>(config_u64("workers", *v));
    }
    if (const std::string* v = get("scale_miscalibration")) {
        config.scale_miscalibration = config_double("scale_miscalibration", *v);
    }
    if (const std::string* v = get("beta1_star")) {
        config.beta1_star = config_double("beta1_star", *v);
    }
    if (const std::string* v = get("beta2_star")) {
        config.beta2_star = config_double("beta2_star", *v);
    }
    if (const std::string* v = get("metrics")) {
        for (const std::string& name : split_list(*v)) {
            if (!known_metric_names().count(name)) {
                throw ParseError("config key 'metrics': unknown metric '" + name + "'");
            }
            config.metrics.push_back(name);
        }
    }

    // Early schema checks; deeper semantic validation happens at run time.
    if (!is_one_sample_name(config.functional) && !get("model_g")) {
        throw ParseError("missing required config key 'model_g' (functional '" +
                         config.functional + "' is two-sample)");
    }
    try {
        parse_estimator(config.estimator);
        if (is_one_sample_name(config.functional)) {
            parse_one_sample(config.functional);
        } else {
            parse_functional(config.functional);
        }
    } catch (const ParseError& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return config;
}

void write_result_csv(std::ostream& out, const ExperimentResult& result) {
    out << "m,n,metric,value,se\n";
    for (const SweepPoint& point : result.points) {
        for (const Metric& metric : point.metrics) {
            out << point.m << ',' << point.n << ',' << metric.name << ','
                << format_full(metric.value) << ',' << format_full(metric.se) << '\n';
        }
    }
}

}  // namespace nnfe
