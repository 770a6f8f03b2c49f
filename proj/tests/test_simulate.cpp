#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "nnfe/densities.hpp"
#include "nnfe/errors.hpp"
#include "nnfe/simulate.hpp"

using namespace nnfe;

namespace {

ExperimentConfig small_mse_config() {
    ExperimentConfig config;
    config.experiment = ExperimentKind::Mse;
    config.model_f = gaussian_model({0.0}, {1.0});
    config.model_g = gaussian_model({1.0}, {1.0});
    config.functional = "kl";
    config.estimator = "naive";
    config.m_values = {40, 80};
    config.B = 12;
    config.k_x = 3;
    config.k_y = 3;
    config.base_seed = 5;
    return config;
}

const Metric* find_metric(const SweepPoint& point, const std::string& name) {
    for (const Metric& metric : point.metrics) {
        if (metric.name == name) return &metric;
    }
    return nullptr;
}

std::string csv_of(const ExperimentResult& result) {
    std::ostringstream out;
    write_result_csv(out, result);
    return out.str();
}

}  // namespace

TEST_CASE("replication seeding makes results worker-count invariant") {
    ExperimentConfig config = small_mse_config();
    config.workers = 1;
    const std::string serial = csv_of(run_experiment(config));
    config.workers = 3;
    const std::string threaded = csv_of(run_experiment(config));
    CHECK(serial == threaded);
    CHECK(serial.find("mse") != std::string::npos);
}

TEST_CASE("the base seed pins the experiment exactly") {
    const ExperimentConfig config = small_mse_config();
    const std::string first = csv_of(run_experiment(config));
    const std::string second = csv_of(run_experiment(config));
    CHECK(first == second);

    ExperimentConfig reseeded = small_mse_config();
    reseeded.base_seed = 6;
    CHECK(csv_of(run_experiment(reseeded)) != first);
}

TEST_CASE("mse decomposes into squared bias plus variance") {
    const ExperimentResult result = run_experiment(small_mse_config());
    REQUIRE(result.points.size() == 2);
    for (const SweepPoint& point : result.points) {
        const Metric* bias = find_metric(point, "bias");
        const Metric* variance = find_metric(point, "variance");
        const Metric* mse = find_metric(point, "mse");
        REQUIRE(bias != nullptr);
        REQUIRE(variance != nullptr);
        REQUIRE(mse != nullptr);
        CHECK(mse->value == doctest::Approx(bias->value * bias->value +
                                            variance->value)
                                .epsilon(1e-10));
        const Metric* failures = find_metric(point, "failures");
        REQUIRE(failures != nullptr);
        CHECK(failures->value == 0.0);
    }
}

TEST_CASE("a sweep point whose replications all throw aborts the run") {
    ExperimentConfig config = small_mse_config();
    // The KL weight class in d = 6 carries three constraints, which two
    // allowed ranks cannot satisfy, so every replication's solve refuses.
    // The truth stays closed-form, so the failure is confined to the sweep.
    config.model_f = gaussian_model(std::vector<double>(6, 0.0), std::vector<double>(6, 1.0));
    config.model_g = gaussian_model(std::vector<double>(6, 1.0), std::vector<double>(6, 1.0));
    config.estimator = "weighted";
    config.k_x = 2;
    config.k_y = 2;
    config.m_values = {30};
    config.B = 5;
    try {
        run_experiment(config);
        FAIL("expected the experiment to abort");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("5 of 5 replications failed") != std::string::npos);
        CHECK(msg.find("first failure") != std::string::npos);
    }
}

TEST_CASE("experiment configs are validated before any work") {
    ExperimentConfig config = small_mse_config();
    config.B = 1;
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

    config = small_mse_config();
    config.m_values = {80, 40};
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

    config = small_mse_config();
    config.m_values = {};
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

    config = small_mse_config();
    config.q = 0.0;
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

    config = small_mse_config();
    config.workers = 0;
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

    config = small_mse_config();
    config.n_values = {30, 40, 50};  // three n for two m
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

    config = small_mse_config();
    config.model_g.reset();
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
}

TEST_CASE("n values broadcast or pair with the m sweep") {
    ExperimentConfig config = small_mse_config();
    config.B = 4;
    config.n_values = {30};
    ExperimentResult result = run_experiment(config);
    REQUIRE(result.points.size() == 2);
    CHECK(result.points[0].m == 40);
    CHECK(result.points[0].n == 30);
    CHECK(result.points[1].m == 80);
    CHECK(result.points[1].n == 30);

    config.n_values = {30, 60};
    result = run_experiment(config);
    CHECK(result.points[0].n == 30);
    CHECK(result.points[1].n == 60);

    config.n_values = {};
    result = run_experiment(config);
    CHECK(result.points[0].n == 40);
    CHECK(result.points[1].n == 80);
}

TEST_CASE("the metrics list filters the emitted rows") {
    ExperimentConfig config = small_mse_config();
    config.B = 4;
    config.metrics = {"mse"};
    const ExperimentResult result = run_experiment(config);
    for (const SweepPoint& point : result.points) {
        REQUIRE(point.metrics.size() == 1);
        CHECK(point.metrics[0].name == "mse");
    }
}

TEST_CASE("one-sample sweeps skip the two-sample theory ratios") {
    ExperimentConfig config;
    config.experiment = ExperimentKind::Mse;
    config.model_f = spherical_beta_model(2.0, 3.0, 1);
    config.functional = "shannon";
    config.estimator = "debiased";
    config.m_values = {40};
    config.B = 6;
    config.k_x = 4;
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.points.size() == 1);
    const SweepPoint& point = result.points[0];
    CHECK(find_metric(point, "mean") != nullptr);
    CHECK(find_metric(point, "mse") != nullptr);
    CHECK(find_metric(point, "mse_ratio_vs_theory") == nullptr);
    CHECK(find_metric(point, "mse_ratio_median") == nullptr);
}

TEST_CASE("coverage and normality require a two-sample functional") {
    ExperimentConfig config;
    config.model_f = spherical_beta_model(2.0, 3.0, 1);
    config.functional = "shannon";
    config.m_values = {40};
    config.B = 4;
    config.k_x = 4;
    CHECK_THROWS_AS(coverage_experiment(config), std::invalid_argument);
    CHECK_THROWS_AS(normality_experiment(config), std::invalid_argument);
}

TEST_CASE("the super-oracle sweep emits both mses and their ratio") {
    const ExperimentResult result = super_oracle_experiment(
        0.75, spherical_beta_model(2.0, 3.0, 1), {50, 100}, 4, 99);
    REQUIRE(result.points.size() == 2);
    for (const SweepPoint& point : result.points) {
        const Metric* est = find_metric(point, "estimator_mse");
        const Metric* oracle = find_metric(point, "oracle_mse");
        const Metric* ratio = find_metric(point, "super_oracle_ratio");
        REQUIRE(est != nullptr);
        REQUIRE(oracle != nullptr);
        REQUIRE(ratio != nullptr);
        CHECK(est->value > 0.0);
        CHECK(oracle->value > 0.0);
        CHECK(ratio->value == doctest::Approx(est->value / oracle->value)
                                  .epsilon(1e-12));
    }
}

TEST_CASE("config files build validated experiment configs") {
    std::map<std::string, std::string> kv{
        {"experiment", "coverage"}, {"model_f", "gaussian:0:1"},
        {"model_g", "gaussian:1:1"}, {"functional", "kl"},
        {"estimator", "debiased-weighted"}, {"m", "100, 200"},
        {"n", "150"}, {"B", "32"}, {"base_seed", "9"},
        {"k_x", "auto"}, {"k_y", "7"}, {"q", "0.1"},
        {"workers", "4"}, {"metrics", "coverage, ci_half_width_median"}};
    const ExperimentConfig config = build_experiment_config(kv);
    CHECK(config.experiment == ExperimentKind::Coverage);
    CHECK(config.functional == "kl");
    CHECK(config.estimator == "debiased-weighted");
    CHECK(config.m_values == std::vector<std::size_t>{100, 200});
    CHECK(config.n_values == std::vector<std::size_t>{150});
    CHECK(config.B == 32);
    CHECK(config.base_seed == 9);
    CHECK(config.k_x == 0);  // auto
    CHECK(config.k_y == 7);
    CHECK(config.q == 0.1);
    CHECK(config.workers == 4);
    CHECK(config.metrics ==
          std::vector<std::string>{"coverage", "ci_half_width_median"});
}

TEST_CASE("config building rejects what it cannot interpret") {
    const std::map<std::string, std::string> base{{"experiment", "mse"},
                                                  {"model_f", "gaussian:0:1"},
                                                  {"model_g", "gaussian:1:1"},
                                                  {"functional", "kl"},
                                                  {"m", "50"},
                                                  {"B", "4"}};
    auto with = [&base](const std::string& key, const std::string& value) {
        std::map<std::string, std::string> kv = base;
        kv[key] = value;
        return kv;
    };

    CHECK_THROWS_AS(build_experiment_config(with("experimen", "mse")), ParseError);
    try {
        build_experiment_config(with("experimen", "mse"));
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("unknown config key 'experimen'") !=
              std::string::npos);
    }

    CHECK_THROWS_AS(build_experiment_config(with("experiment", "banana")), ParseError);
    CHECK_THROWS_AS(build_experiment_config(with("metrics", "mean, nope")), ParseError);
    CHECK_THROWS_AS(build_experiment_config(with("m", "50, x")), ParseError);
    CHECK_THROWS_AS(build_experiment_config(with("B", "two")), ParseError);
    CHECK_THROWS_AS(build_experiment_config(with("k_x", "fast")), ParseError);

    try {
        build_experiment_config(with("model_f", "cauchy:0:1"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("model_f") != std::string::npos);
    }

    // A two-sample functional cannot run without the second model.
    std::map<std::string, std::string> missing = base;
    missing.erase("model_g");
    try {
        build_experiment_config(missing);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("model_g") != std::string::npos);
        CHECK(msg.find("kl") != std::string::npos);
    }

    std::map<std::string, std::string> nomodel = base;
    nomodel.erase("model_f");
    CHECK_THROWS_AS(build_experiment_config(nomodel), ParseError);
}
