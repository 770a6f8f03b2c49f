#pragma once

// Monte Carlo experiment engine. Replications are independent and carry
// seeds derived from the base seed by counter splitting, so results are
// bit-identical for any worker count; all reductions run in replication
// order. A replication whose estimator throws is recorded and excluded,
// with more than 1% failures aborting the experiment.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nnfe/densities.hpp"

namespace nnfe {

enum class ExperimentKind { Mse, Coverage, Normality, SuperOracle };

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Mse;
    DensityModel model_f;
    std::optional<DensityModel> model_g;
    std::string functional = "kl";
    std::string estimator = "naive";
    std::vector<std::size_t> m_values;  // strictly increasing sweep
    std::vector<std::size_t> n_values;  // paired with m; empty means n = m
    std::size_t B = 2;
    std::uint64_t base_seed = 0;
    int k_x = 0;  // 0 = auto
    int k_y = 0;
    double c = 0.25;
    double q = 0.05;
    int workers = 1;
    // Normality control: the deliberately miscalibrated standardisation
    // uses this multiple of the true scale, shrinking each z by the factor.
    double scale_miscalibration = 2.0;
    // Positive values override the functional's default smoothness
    // exponents, changing auto-k and the derived moment order.
    double beta1_star = 0.0;
    double beta2_star = 0.0;
    std::vector<std::string> metrics;  // empty = emit all for the kind
};

struct Metric {
    std::string name;
    double value = 0.0;
    double se = 0.0;
};

struct SweepPoint {
    std::size_t m = 0, n = 0;
    std::vector<Metric> metrics;
    std::size_t failures = 0;
    std::string first_failure;
};

struct ExperimentResult {
    std::vector<SweepPoint> points;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Kind-forcing wrappers matching the experiment flavours.
ExperimentResult coverage_experiment(ExperimentConfig config);
ExperimentResult normality_experiment(ExperimentConfig config);
ExperimentResult super_oracle_experiment(double kappa, const DensityModel& model_f,
                                         std::vector<std::size_t> m_sweep,
                                         std::size_t B, std::uint64_t seed);

// Builds a config from parsed key=value pairs, validating keys and values;
// throws ParseError naming the offending key.
ExperimentConfig build_experiment_config(const std::map<std::string, std::string>& kv);

// One row per (m, n, metric): m,n,metric,value,se.
void write_result_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace nnfe
