// Command line front end: estimate on user data, run experiment configs,
// dump weight vectors, print rate diagnostics. Every output line is either
// a '#' comment or CSV. Exit codes: 0 success, 2 input/config parse error,
// 3 estimation failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "nnfe/diagnostics.hpp"
#include "nnfe/errors.hpp"
#include "nnfe/estimators.hpp"
#include "nnfe/functionals.hpp"
#include "nnfe/io.hpp"
#include "nnfe/simulate.hpp"
#include "nnfe/uncertainty.hpp"
#include "nnfe/weights.hpp"

namespace {

using namespace nnfe;

// Output sink: '--out FILE' redirects the CSV body there while the resolved
// configuration echo stays on stdout, so reruns with different worker counts
// can be compared byte for byte.
std::ofstream open_out(const std::string& path) {
    std::ofstream file(path);
    if (!file) {
        throw ParseError("cannot open output file: " + path);
    }
    return file;
}

struct EstimateArgs {
    std::string x_path, y_path, out_path;
    std::string functional = "kl";
    std::string estimator = "naive";
    int k_x = 0, k_y = 0;
    double c = 0.25;
    double q = 0.05;
};

int run_estimate(const EstimateArgs& args) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!args.out_path.empty()) {
        file = open_out(args.out_path);
        out = &file;
    }

    const Sample X = read_sample_csv(args.x_path);
    const EstimatorVariant variant = parse_estimator(args.estimator);
    EstimatorConfig config;
    config.k_x = args.k_x;
    config.k_y = args.k_y;
    config.c = args.c;

    std::cout << "# x = " << args.x_path << " (m = " << X.size()
              << ", d = " << X.dim() << ")\n";

    if (is_one_sample_name(args.functional)) {
        if (!args.y_path.empty()) {
            throw ParseError("functional '" + args.functional +
                             "' is one-sample; drop --y");
        }
        const OneSampleSpec spec = parse_one_sample(args.functional);
        const EstimateReport report = run_one_sample_estimator(X, spec, variant, config);
        std::cout << "# functional = " << spec.name() << "\n"
                  << "# estimator = " << estimator_name(variant) << "\n"
                  << "# k_x = " << report.k_x
                  << (args.k_x == 0 ? " (auto)" : "") << "\n"
                  << "# weight_class = " << report.weight_class << "\n";
        *out << "estimate,k_x\n"
             << format_full(report.value) << ',' << report.k_x << '\n';
        return 0;
    }

    if (args.y_path.empty()) {
        throw ParseError("functional '" + args.functional + "' needs --y");
    }
    const Sample Y = read_sample_csv(args.y_path);
    const FunctionalSpec spec = parse_functional(args.functional);
    const EstimateReport report = run_two_sample_estimator(X, Y, spec, variant, config);
    const VarianceReport var = variance_estimate(X, Y, spec, report.k_x, report.k_y);
    const ConfidenceInterval ci =
        confidence_interval(report.value, var, X.size(), Y.size(), args.q);

    std::cout << "# y = " << args.y_path << " (n = " << Y.size()
              << ", d = " << Y.dim() << ")\n"
              << "# functional = " << spec.name() << "\n"
              << "# estimator = " << estimator_name(variant) << "\n"
              << "# k_x = " << report.k_x << (args.k_x == 0 ? " (auto)" : "") << "\n"
              << "# k_y = " << report.k_y << (args.k_y == 0 ? " (auto)" : "") << "\n"
              << "# weight_class = " << report.weight_class << "\n"
              << "# q = " << format_full(args.q) << "\n";
    *out << "estimate,v1hat,v2hat,ci_lower,ci_upper,k_x,k_y\n"
         << format_full(report.value) << ',' << format_full(var.v1hat) << ','
         << format_full(var.v2hat) << ',' << format_full(ci.lower) << ','
         << format_full(ci.upper) << ',' << report.k_x << ',' << report.k_y << '\n';
    return 0;
}

struct SimulateArgs {
    std::string config_path, out_path;
    int workers = 0;
    std::uint64_t seed = 0;
    bool workers_set = false, seed_set = false;
};

int run_simulate(const SimulateArgs& args) {
    ExperimentConfig config =
        build_experiment_config(parse_key_value_file(args.config_path));
    if (args.workers_set) config.workers = args.workers;
    if (args.seed_set) config.base_seed = args.seed;

    std::cout << "# config = " << args.config_path << "\n"
              << "# model_f = " << config.model_f.name() << "\n";
    if (config.model_g) {
        std::cout << "# model_g = " << config.model_g->name() << "\n";
    }
    std::cout << "# functional = " << config.functional << "\n"
              << "# estimator = " << config.estimator << "\n"
              << "# B = " << config.B << "\n"
              << "# base_seed = " << config.base_seed << "\n"
              << "# workers = " << config.workers << "\n";
    auto k_label = [](int k) {
        return k == 0 ? std::string("auto") : std::to_string(k);
    };
    std::cout << "# k_x = " << k_label(config.k_x)
              << ", k_y = " << k_label(config.k_y)
              << ", c = " << format_full(config.c)
              << ", q = " << format_full(config.q) << "\n";

    const ExperimentResult result = run_experiment(config);
    if (!args.out_path.empty()) {
        std::ofstream file = open_out(args.out_path);
        write_result_csv(file, result);
    } else {
        write_result_csv(std::cout, result);
    }
    return 0;
}

struct WeightsArgs {
    int k = 0, d = 0;
    std::string classname = "general";
    double c = 0.25;
    double b = 0.0;
    int moments = 0;
    std::string out_path;
};

int run_weights(const WeightsArgs& args) {
    WeightVector wv;
    if (args.classname == "general") {
        wv = solve_general_weights(args.k, args.d, args.moments, args.c);
    } else if (args.classname == "kl") {
        wv = solve_kl_weights(args.k, args.d, args.c);
    } else if (args.classname == "renyi") {
        wv = solve_renyi_weights(args.k, args.d, args.b, args.c);
    } else {
        throw ParseError("unknown weight class '" + args.classname +
                         "' (known: general, kl, renyi)");
    }

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!args.out_path.empty()) {
        file = open_out(args.out_path);
        out = &file;
    }
    std::cout << "# class = " << args.classname;
    if (args.classname == "general") std::cout << ", moments = " << args.moments;
    if (args.classname == "renyi") std::cout << ", b = " << format_full(args.b);
    std::cout << "\n# k = " << wv.k << ", d = " << wv.d
              << ", c = " << format_full(wv.c)
              << ", first allowed rank = " << wv.first_allowed << "\n"
              << "# l1 norm = " << format_full(wv.l1_norm) << " (bound 1/c = "
              << format_full(1.0 / wv.c) << ")"
              << (wv.l1_exceeds_bound ? " exceeds the risk-theory bound" : "") << "\n";
    for (std::size_t i = 0; i < wv.residuals.size(); ++i) {
        std::cout << "# residual[" << i << "] = " << format_full(wv.residuals[i])
                  << "\n";
    }
    std::cout << "# residual max = " << format_full(wv.max_residual) << "\n";

    *out << "index,weight\n";
    for (int j = 1; j <= wv.k; ++j) {
        *out << j << ',' << format_full(wv.w[static_cast<std::size_t>(j - 1)]) << '\n';
    }
    return 0;
}

struct DiagnoseArgs {
    int d = 0;
    ClassParams params;
    std::size_t m = 0, n = 0;
};

int run_diagnose(const DiagnoseArgs& args) {
    const DerivedParams out = derive_params(args.d, args.params);
    const Regularity& xi = args.params.xi;
    std::cout << "# d = " << args.d << ", alpha = " << format_full(args.params.alpha)
              << ", beta = " << format_full(args.params.beta)
              << ", lambda1 = " << format_full(args.params.lambda1)
              << ", lambda2 = " << format_full(args.params.lambda2)
              << ", gamma = " << format_full(args.params.gamma) << "\n"
              << "# kappa1 = " << format_full(xi.kappa1)
              << ", kappa2 = " << format_full(xi.kappa2)
              << ", beta1_star = " << format_full(xi.beta1_star)
              << ", beta2_star = " << format_full(xi.beta2_star)
              << ", L = " << format_full(xi.L) << "\n";
    std::cout << "name,value\n"
              << "zeta," << format_full(out.zeta) << "\n"
              << "tau1," << format_full(out.tau1) << "\n"
              << "tau2," << format_full(out.tau2) << "\n"
              << "gamma_star," << format_full(out.gamma_star) << "\n"
              << "gamma1_star," << format_full(out.gamma1_star) << "\n"
              << "gamma2_star," << format_full(out.gamma2_star) << "\n"
              << "tau1_star," << format_full(out.tau1_star) << "\n"
              << "tau2_star," << format_full(out.tau2_star) << "\n"
              << "flag_zeta_below_half," << (out.zeta_ok ? 1 : 0) << "\n"
              << "flag_tau1_admits_k," << (out.tau1_ok ? 1 : 0) << "\n"
              << "flag_tau2_admits_k," << (out.tau2_ok ? 1 : 0) << "\n"
              << "flag_gamma_above_star," << (out.gamma_ok ? 1 : 0) << "\n"
              << "flag_gamma_above_strong," << (out.gamma_strong_ok ? 1 : 0) << "\n";
    if (args.m > 0 && args.n > 0) {
        const KRange r = k_range(args.d, args.params, args.m, args.n);
        std::cout << "k_x_lo," << r.k_x_lo << "\n"
                  << "k_x_hi," << r.k_x_hi << "\n"
                  << "k_y_lo," << r.k_y_lo << "\n"
                  << "k_y_hi," << r.k_y_hi << "\n"
                  << "flag_k_x_range_empty," << (r.x_empty ? 1 : 0) << "\n"
                  << "flag_k_y_range_empty," << (r.y_empty ? 1 : 0) << "\n";
        if (r.x_empty || r.y_empty) {
            std::cout << "# warning: empty admissible k range; the rate "
                         "hypotheses cannot hold at these sizes\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted nearest-neighbour functional estimation"};
    app.require_subcommand(1);

    EstimateArgs est;
    CLI::App* cmd_est = app.add_subcommand("estimate", "estimate a functional from CSV samples");
    cmd_est->add_option("--x", est.x_path, "CSV file holding the X sample")->required();
    cmd_est->add_option("--y", est.y_path, "CSV file holding the Y sample (two-sample functionals)");
    cmd_est->add_option("--functional", est.functional,
                        "kl | renyi:<kappa> | intfg | shannon | renyi-entropy:<kappa>")
        ->capture_default_str();
    cmd_est->add_option("--estimator", est.estimator,
                        "naive | weighted | debiased | debiased-weighted")
        ->capture_default_str();
    cmd_est->add_option("--k-x", est.k_x, "neighbour order within X (0 = auto)")
        ->capture_default_str();
    cmd_est->add_option("--k-y", est.k_y, "neighbour order into Y (0 = auto)")
        ->capture_default_str();
    cmd_est->add_option("--c", est.c, "weight support cutoff fraction")->capture_default_str();
    cmd_est->add_option("--q", est.q, "two-sided miscoverage level of the interval")
        ->capture_default_str();
    cmd_est->add_option("--out", est.out_path, "write the CSV body to this file");

    SimulateArgs sim;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "run a Monte Carlo experiment config");
    cmd_sim->add_option("config", sim.config_path, "key=value experiment file")->required();
    CLI::Option* sim_workers =
        cmd_sim->add_option("--workers", sim.workers, "worker threads (overrides config)");
    CLI::Option* sim_seed =
        cmd_sim->add_option("--seed", sim.seed, "base seed (overrides config)");
    cmd_sim->add_option("--out", sim.out_path, "write the CSV body to this file");

    WeightsArgs wts;
    CLI::App* cmd_wts = app.add_subcommand("weights", "solve and dump a weight vector");
    cmd_wts->add_option("--k", wts.k, "number of neighbour ranks")->required();
    cmd_wts->add_option("--d", wts.d, "data dimension")->required();
    cmd_wts->add_option("--class", wts.classname, "general | kl | renyi")->capture_default_str();
    cmd_wts->add_option("--c", wts.c, "support cutoff fraction")->capture_default_str();
    cmd_wts->add_option("--b", wts.b, "Gamma shift b (renyi class only)")->capture_default_str();
    cmd_wts->add_option("--moments", wts.moments,
                        "extra vanishing-moment order I (general class only)")
        ->capture_default_str();
    cmd_wts->add_option("--out", wts.out_path, "write the CSV body to this file");

    DiagnoseArgs dia;
    CLI::App* cmd_dia = app.add_subcommand("diagnose", "derived rate parameters and checks");
    cmd_dia->add_option("--d", dia.d, "data dimension")->required();
    cmd_dia->add_option("--alpha", dia.params.alpha, "tail exponent")->required();
    cmd_dia->add_option("--beta", dia.params.beta, "smoothness exponent")->required();
    cmd_dia->add_option("--lambda1", dia.params.lambda1, "lower moment exponent for f")
        ->required();
    cmd_dia->add_option("--lambda2", dia.params.lambda2, "lower moment exponent for g")
        ->required();
    cmd_dia->add_option("--gamma", dia.params.gamma, "density ratio exponent")->required();
    cmd_dia->add_option("--C", dia.params.C, "envelope constant")->capture_default_str();
    cmd_dia->add_option("--kappa1", dia.params.xi.kappa1, "phi growth exponent in f")
        ->capture_default_str();
    cmd_dia->add_option("--kappa2", dia.params.xi.kappa2, "phi growth exponent in g")
        ->capture_default_str();
    cmd_dia->add_option("--beta1-star", dia.params.xi.beta1_star, "smoothness cap for f")
        ->capture_default_str();
    cmd_dia->add_option("--beta2-star", dia.params.xi.beta2_star, "smoothness cap for g")
        ->capture_default_str();
    cmd_dia->add_option("--L", dia.params.xi.L, "phi Lipschitz-scale constant")
        ->capture_default_str();
    cmd_dia->add_option("--m", dia.m, "X sample size for the admissible k range");
    cmd_dia->add_option("--n", dia.n, "Y sample size for the admissible k range");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*cmd_est) return run_estimate(est);
        if (*cmd_sim) {
            sim.workers_set = sim_workers->count() > 0;
            sim.seed_set = sim_seed->count() > 0;
            return run_simulate(sim);
        }
        if (*cmd_wts) return run_weights(wts);
        if (*cmd_dia) return run_diagnose(dia);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
