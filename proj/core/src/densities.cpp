#include "nnfe/densities.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "nnfe/errors.hpp"
#include "nnfe/numeric.hpp"
#include "nnfe/rng.hpp"
#include "nnfe/special.hpp"

namespace nnfe {

namespace {

std::string fmt_g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

std::string join_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt_g(v[i]);
    }
    return out;
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// log of the SphericalBeta normalising constant
// C_{d,a,b} = Gamma(a+b+d-1) / (d V_d Gamma(a+d-1) Gamma(b)).
double log_sphbeta_constant(double a, double b, int d) {
    return log_gamma(a + b + d - 1.0) - std::log(static_cast<double>(d)) -
           std::log(unit_ball_volume(d)) - log_gamma(a + d - 1.0) - log_gamma(b);
}

}  // namespace

double DensityModel::pdf(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != d) {
        throw std::invalid_argument("DensityModel::pdf: point has dimension " +
                                    std::to_string(x.size()) + ", model has " +
                                    std::to_string(d));
    }
    switch (kind) {
        case Kind::Gaussian: {
            double log_p = 0.0;
            for (int j = 0; j < d; ++j) {
                const double z = x[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)];
                const double s2 = var[static_cast<std::size_t>(j)];
                log_p += -0.5 * z * z / s2 - 0.5 * std::log(2.0 * M_PI * s2);
            }
            return std::exp(log_p);
        }
        case Kind::SphericalBeta: {
            const double r = norm2(x);
            if (r > 1.0) return 0.0;
            const double c = std::exp(log_sphbeta_constant(a, b, d));
            return c * std::pow(r, a - 1.0) * std::pow(1.0 - r, b - 1.0);
        }
        case Kind::Uniform: {
            double p = 1.0;
            for (int j = 0; j < d; ++j) {
                const double v = x[static_cast<std::size_t>(j)];
                if (v < lo[static_cast<std::size_t>(j)] || v > hi[static_cast<std::size_t>(j)]) {
                    return 0.0;
                }
                p /= hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)];
            }
            return p;
        }
    }
    throw std::logic_error("DensityModel: unknown kind");
}

std::string DensityModel::name() const {
    switch (kind) {
        case Kind::Gaussian:
            return "gaussian:" + join_list(mean) + ":" + join_list(var);
        case Kind::SphericalBeta:
            return "sphbeta:" + fmt_g(a) + ":" + fmt_g(b) + ":" + std::to_string(d);
        case Kind::Uniform:
            return "uniform:" + join_list(lo) + ":" + join_list(hi);
    }
    return "?";
}

DensityModel gaussian_model(std::vector<double> mean, std::vector<double> var) {
    if (mean.empty() || mean.size() != var.size()) {
        throw std::invalid_argument(
            "gaussian_model: mean and variance lists must be non-empty and equal length");
    }
    for (double v : var) {
        if (!(v > 0.0)) {
            throw std::invalid_argument("gaussian_model: variances must be positive");
        }
    }
    DensityModel m;
    m.kind = DensityModel::Kind::Gaussian;
    m.d = static_cast<int>(mean.size());
    m.mean = std::move(mean);
    m.var = std::move(var);
    return m;
}

DensityModel spherical_beta_model(double a, double b, int d) {
    if (!(a >= 1.0) || !(b >= 1.0)) {
        throw std::invalid_argument("spherical_beta_model: need a >= 1 and b >= 1");
    }
    if (d < 1) {
        throw std::invalid_argument("spherical_beta_model: need d >= 1");
    }
    DensityModel m;
    m.kind = DensityModel::Kind::SphericalBeta;
    m.d = d;
    m.a = a;
    m.b = b;
    return m;
}

DensityModel uniform_model(std::vector<double> lo, std::vector<double> hi) {
    if (lo.empty() || lo.size() != hi.size()) {
        throw std::invalid_argument(
            "uniform_model: box bound lists must be non-empty and equal length");
    }
    for (std::size_t j = 0; j < lo.size(); ++j) {
        if (!(hi[j] > lo[j])) {
            throw std::invalid_argument("uniform_model: need hi > lo in every dimension");
        }
    }
    DensityModel m;
    m.kind = DensityModel::Kind::Uniform;
    m.d = static_cast<int>(lo.size());
    m.lo = std::move(lo);
    m.hi = std::move(hi);
    return m;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_real(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ParseError(context + ": '" + text + "' is not a number");
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw ParseError(context + ": '" + text + "' is not a finite number");
    }
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& context) {
    std::vector<double> out;
    for (const std::string& item : split(text, ',')) {
        out.push_back(parse_real(item, context));
    }
    return out;
}

}  // namespace

DensityModel parse_model(const std::string& text) {
    const std::vector<std::string> parts = split(text, ':');
    const std::string& kind = parts[0];
    try {
        if (kind == "gaussian") {
            if (parts.size() != 3) {
                throw ParseError("model '" + text + "': expected gaussian:<mean>:<var>");
            }
            return gaussian_model(parse_list(parts[1], "gaussian mean"),
                                  parse_list(parts[2], "gaussian var"));
        }
        if (kind == "sphbeta") {
            if (parts.size() != 3 && parts.size() != 4) {
                throw ParseError("model '" + text + "': expected sphbeta:<a>:<b>[:<d>]");
            }
            const double a = parse_real(parts[1], "sphbeta a");
            const double b = parse_real(parts[2], "sphbeta b");
            int d = 1;
            if (parts.size() == 4) {
                const double dd = parse_real(parts[3], "sphbeta d");
                d = static_cast<int>(dd);
                if (static_cast<double>(d) != dd) {
                    throw ParseError("model '" + text + "': dimension must be an integer");
                }
            }
            return spherical_beta_model(a, b, d);
        }
        if (kind == "uniform") {
            if (parts.size() != 3) {
                throw ParseError("model '" + text + "': expected uniform:<lo>:<hi>");
            }
            return uniform_model(parse_list(parts[1], "uniform lo"),
                                 parse_list(parts[2], "uniform hi"));
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError("model '" + text + "': " + e.what());
    }
    throw ParseError("unknown model kind '" + kind +
                     "' (known: gaussian, sphbeta, uniform)");
}

Sample sample_model(const DensityModel& model, std::size_t m, std::uint64_t seed) {
    if (m < 1) {
        throw std::invalid_argument("sample_model: need m >= 1");
    }
    std::mt19937_64 rng(seed);
    const std::size_t d = static_cast<std::size_t>(model.d);
    std::vector<double> data(m * d);

    switch (model.kind) {
        case DensityModel::Kind::Gaussian:
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double z = normal_quantile(uniform_open01(rng));
                    data[i * d + j] = model.mean[j] + std::sqrt(model.var[j]) * z;
                }
            }
            break;
        case DensityModel::Kind::Uniform:
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    data[i * d + j] =
                        model.lo[j] + (model.hi[j] - model.lo[j]) * uniform01(rng);
                }
            }
            break;
        case DensityModel::Kind::SphericalBeta: {
            // Radius law r^{a+d-2} (1-r)^{b-1} on (0,1), i.e. Beta(a+d-1, b),
            // drawn by inverse CDF; direction uniform on the sphere.
            const double alpha = model.a + static_cast<double>(model.d) - 1.0;
            std::vector<double> dir(d);
            for (std::size_t i = 0; i < m; ++i) {
                const double r = boost::math::ibeta_inv(alpha, model.b, uniform_open01(rng));
                if (d == 1) {
                    data[i] = uniform01(rng) < 0.5 ? -r : r;
                    continue;
                }
                double len = 0.0;
                do {
                    for (std::size_t j = 0; j < d; ++j) {
                        dir[j] = normal_quantile(uniform_open01(rng));
                    }
                    len = norm2(dir);
                } while (len == 0.0);
                for (std::size_t j = 0; j < d; ++j) {
                    data[i * d + j] = r * dir[j] / len;
                }
            }
            break;
        }
    }
    return Sample(std::move(data), m, d);
}

// ---------------------------------------------------------------------------
// Truth oracles
// ---------------------------------------------------------------------------

namespace {

// Hard cap on integrand evaluations per integral. The depth limit alone only
// bounds the recursion path, not the width of the bisection tree, so an
// integrand whose dynamic range dwarfs the absolute tolerance could otherwise
// run for weeks. Callers treat the throw as "truth unavailable".
constexpr long kQuadEvalBudget = 20'000'000;

// Adaptive Simpson with Richardson acceptance; tolerance is absolute.
double simpson_step(const std::function<double(double)>& fn, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth, long& budget) {
    if ((budget -= 2) < 0) {
        throw std::runtime_error(
            "quadrature: evaluation budget exhausted (integrand too irregular "
            "for the requested tolerance)");
    }
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fn(lm), frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double sum = left + right;
    if (depth <= 0 || std::abs(sum - whole) <= 15.0 * tol) {
        return sum + (sum - whole) / 15.0;
    }
    return simpson_step(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget) +
           simpson_step(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget);
}

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double tol, long& budget) {
    if (!(b > a)) return 0.0;
    budget -= 3;
    const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double result = simpson_step(fn, a, b, fa, fm, fb, whole, tol, 48, budget);
    if (!std::isfinite(result)) {
        throw std::runtime_error(
            "quadrature: integral failed to converge (non-integrable combination?)");
    }
    return result;
}

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double tol) {
    long budget = kQuadEvalBudget;
    return adaptive_simpson(fn, a, b, tol, budget);
}

struct Box {
    std::vector<double> lo, hi;
};

// A box that carries all but a negligible part of the model's mass.
Box support_box(const DensityModel& model) {
    Box box;
    const std::size_t d = static_cast<std::size_t>(model.d);
    box.lo.resize(d);
    box.hi.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        switch (model.kind) {
            case DensityModel::Kind::Gaussian: {
                const double s = std::sqrt(model.var[j]);
                box.lo[j] = model.mean[j] - 12.0 * s;
                box.hi[j] = model.mean[j] + 12.0 * s;
                break;
            }
            case DensityModel::Kind::SphericalBeta:
                box.lo[j] = -1.0;
                box.hi[j] = 1.0;
                break;
            case DensityModel::Kind::Uniform:
                box.lo[j] = model.lo[j];
                box.hi[j] = model.hi[j];
                break;
        }
    }
    return box;
}

Box intersect(const Box& p, const Box& q) {
    Box out = p;
    for (std::size_t j = 0; j < p.lo.size(); ++j) {
        out.lo[j] = std::max(p.lo[j], q.lo[j]);
        out.hi[j] = std::min(p.hi[j], q.hi[j]);
    }
    return out;
}

// Integrates fn over the box with adaptive Simpson, iterated over the second
// coordinate when d = 2. Empty intersections integrate to zero.
double integrate_box(const std::function<double(std::span<const double>)>& fn,
                     const Box& box, double tol) {
    const std::size_t d = box.lo.size();
    long budget = kQuadEvalBudget;
    if (d == 1) {
        return adaptive_simpson(
            [&fn](double x) { return fn(std::span<const double>(&x, 1)); }, box.lo[0],
            box.hi[0], tol, budget);
    }
    if (d == 2) {
        if (!(box.hi[0] > box.lo[0]) || !(box.hi[1] > box.lo[1])) return 0.0;
        const double inner_tol = 0.1 * tol / (box.hi[0] - box.lo[0]);
        // Inner and outer sweeps share one budget; nesting multiplies counts.
        auto outer = [&fn, &box, inner_tol, &budget](double x) {
            auto inner = [&fn, x](double y) {
                const double pt[2] = {x, y};
                return fn(std::span<const double>(pt, 2));
            };
            return adaptive_simpson(inner, box.lo[1], box.hi[1], inner_tol, budget);
        };
        return adaptive_simpson(outer, box.lo[0], box.hi[0], tol, budget);
    }
    throw std::invalid_argument("quadrature: only d <= 2 is supported (use MonteCarlo)");
}

constexpr double kQuadTol = 1e-10;

double population_variance(std::span<const double> v, double m) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = v[i] - m;
        sq[i] = c * c;
    }
    return mean(sq);
}

// Standard error of a sample variance via the fourth central moment.
double variance_se(std::span<const double> v, double m, double var) {
    std::vector<double> q(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = v[i] - m;
        q[i] = c * c * c * c;
    }
    const double m4 = mean(q);
    const double n = static_cast<double>(v.size());
    return std::sqrt(std::max(m4 - var * var, 0.0) / n);
}

bool gaussian_kl_closed_form_applies(const DensityModel& f, const DensityModel& g,
                                     const FunctionalSpec& spec) {
    return spec.kind == FunctionalSpec::Kind::KL &&
           f.kind == DensityModel::Kind::Gaussian &&
           g.kind == DensityModel::Kind::Gaussian && f.d == g.d;
}

TruthOracle gaussian_kl_closed_form(const DensityModel& f, const DensityModel& g) {
    TruthOracle out;
    out.method = TruthMethod::ClosedForm;
    double log_ratio_sq_int = 0.0;  // product of per-dimension E_g[(f/g)^2]
    for (int j = 0; j < f.d; ++j) {
        const std::size_t u = static_cast<std::size_t>(j);
        const double s1 = f.var[u], s2 = g.var[u];
        const double delta = f.mean[u] - g.mean[u];
        out.T += 0.5 * std::log(s2 / s1) + (s1 + delta * delta) / (2.0 * s2) - 0.5;

        // log(f/g) is quadratic in x; with u = x - mean_f centred Gaussian,
        // Var(alpha u^2 + beta u) = 2 alpha^2 s1^2 + beta^2 s1.
        const double alpha = 0.5 / s2 - 0.5 / s1;
        const double beta = -delta / s2;
        out.v1 += 2.0 * alpha * alpha * s1 * s1 + beta * beta * s1;

        // E_g[(f/g)^2] per dimension: Gaussian integral of f^2/g, finite
        // only when s1 < 2 s2.
        const double A = 1.0 / s1 - 0.5 / s2;
        if (!(A > 0.0)) {
            throw std::runtime_error(
                "truth: Var_g(f/g) diverges (var_f >= 2 var_g); v2 is not finite");
        }
        const double B = 2.0 * f.mean[u] / s1 - g.mean[u] / s2;
        const double C = -f.mean[u] * f.mean[u] / s1 + g.mean[u] * g.mean[u] / (2.0 * s2);
        const double integral = std::sqrt(M_PI / A) * std::exp(B * B / (4.0 * A) + C) /
                                (2.0 * M_PI * s1) * std::sqrt(2.0 * M_PI * s2);
        log_ratio_sq_int += std::log(integral);
    }
    out.v2 = std::exp(log_ratio_sq_int) - 1.0;
    // For KL, f*phi10 = 1 identically, so Var(phi + f*phi10) = Var(phi).
    out.sigma2 = out.v1;
    return out;
}

TruthOracle two_sample_quadrature(const DensityModel& mf, const DensityModel& mg,
                                  const FunctionalSpec& spec) {
    if (mf.d != mg.d) {
        throw std::invalid_argument("truth: models have different dimensions");
    }
    const Box box = intersect(support_box(mf), support_box(mg));

    auto guarded = [&mf, &mg, &spec](std::span<const double> x,
                                     const std::function<double(double, double)>& term) {
        const double u = mf.pdf(x), v = mg.pdf(x);
        if (!(u > 0.0) || !(v > 0.0)) return 0.0;
        return term(u, v);
    };

    TruthOracle out;
    out.method = TruthMethod::Quadrature;
    auto integral = [&](const std::function<double(std::span<const double>, double, double)>& f) {
        return integrate_box(
            [&](std::span<const double> x) {
                return guarded(x, [&](double u, double v) { return f(x, u, v); });
            },
            box, kQuadTol);
    };

    out.T = integral([&spec](std::span<const double> x, double u, double v) {
        return u * spec.phi(u, v, x);
    });
    const double e1 = integral([&spec](std::span<const double> x, double u, double v) {
        return u * (spec.phi(u, v, x) + u * spec.phi10(u, v, x));
    });
    const double e1sq = integral([&spec](std::span<const double> x, double u, double v) {
        const double t = spec.phi(u, v, x) + u * spec.phi10(u, v, x);
        return u * t * t;
    });
    out.v1 = e1sq - e1 * e1;
    const double e2 = integral([&spec](std::span<const double> x, double u, double v) {
        return v * u * spec.phi01(u, v, x);
    });
    const double e2sq = integral([&spec](std::span<const double> x, double u, double v) {
        const double t = u * spec.phi01(u, v, x);
        return v * t * t;
    });
    out.v2 = e2sq - e2 * e2;
    const double phisq = integral([&spec](std::span<const double> x, double u, double v) {
        const double t = spec.phi(u, v, x);
        return u * t * t;
    });
    out.sigma2 = phisq - out.T * out.T;
    out.se_T = out.se_v1 = out.se_v2 = out.se_sigma2 = kQuadTol * 10.0;
    return out;
}

TruthOracle two_sample_monte_carlo(const DensityModel& mf, const DensityModel& mg,
                                   const FunctionalSpec& spec, std::size_t draws,
                                   std::uint64_t seed) {
    if (draws < 2) {
        throw std::invalid_argument("truth: Monte Carlo needs at least 2 draws");
    }
    const Sample X = sample_model(mf, draws, derive_seed(seed, 1));
    const Sample Y = sample_model(mg, draws, derive_seed(seed, 2));

    std::vector<double> phis(draws), a_terms(draws), c_terms(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        const auto x = X.row(i);
        const double u = mf.pdf(x), v = mg.pdf(x);
        if (u > 0.0 && v > 0.0) {
            phis[i] = spec.phi(u, v, x);
            a_terms[i] = phis[i] + u * spec.phi10(u, v, x);
        } else {
            phis[i] = 0.0;
            a_terms[i] = 0.0;
        }
        const auto y = Y.row(i);
        const double uy = mf.pdf(y), vy = mg.pdf(y);
        c_terms[i] = (uy > 0.0 && vy > 0.0) ? uy * spec.phi01(uy, vy, y) : 0.0;
    }

    TruthOracle out;
    out.method = TruthMethod::MonteCarlo;
    out.mc_draws = draws;
    out.mc_seed = seed;
    const double n = static_cast<double>(draws);
    out.T = mean(phis);
    out.sigma2 = population_variance(phis, out.T);
    out.se_T = std::sqrt(out.sigma2 / n);
    out.se_sigma2 = variance_se(phis, out.T, out.sigma2);
    const double a_mean = mean(a_terms);
    out.v1 = population_variance(a_terms, a_mean);
    out.se_v1 = variance_se(a_terms, a_mean, out.v1);
    const double c_mean = mean(c_terms);
    out.v2 = population_variance(c_terms, c_mean);
    out.se_v2 = variance_se(c_terms, c_mean, out.v2);
    return out;
}

}  // namespace

TruthOracle truth(const DensityModel& model_f, const DensityModel& model_g,
                  const FunctionalSpec& spec, TruthMethod method, std::size_t mc_draws,
                  std::uint64_t mc_seed) {
    switch (method) {
        case TruthMethod::ClosedForm:
            if (!gaussian_kl_closed_form_applies(model_f, model_g, spec)) {
                throw std::invalid_argument(
                    "truth: no closed form registered for this model/functional "
                    "combination (registered: Gaussian/Gaussian KL)");
            }
            return gaussian_kl_closed_form(model_f, model_g);
        case TruthMethod::Quadrature:
            return two_sample_quadrature(model_f, model_g, spec);
        case TruthMethod::MonteCarlo:
            return two_sample_monte_carlo(model_f, model_g, spec, mc_draws, mc_seed);
        case TruthMethod::Auto:
            if (gaussian_kl_closed_form_applies(model_f, model_g, spec)) {
                return gaussian_kl_closed_form(model_f, model_g);
            }
            if (model_f.d <= 2) {
                return two_sample_quadrature(model_f, model_g, spec);
            }
            return two_sample_monte_carlo(model_f, model_g, spec, mc_draws, mc_seed);
    }
    throw std::logic_error("truth: unknown method");
}

namespace {

bool one_sample_closed_form_applies(const DensityModel& f) {
    return f.kind == DensityModel::Kind::Uniform ||
           f.kind == DensityModel::Kind::Gaussian;
}

TruthOracle one_sample_closed_form(const DensityModel& f, const OneSampleSpec& spec) {
    TruthOracle out;
    out.method = TruthMethod::ClosedForm;
    if (f.kind == DensityModel::Kind::Uniform) {
        double log_p = 0.0;  // constant density value, log scale
        for (std::size_t j = 0; j < f.lo.size(); ++j) {
            log_p -= std::log(f.hi[j] - f.lo[j]);
        }
        if (spec.kind == OneSampleSpec::Kind::Shannon) {
            out.T = -log_p;
        } else {
            out.T = std::exp((spec.kappa - 1.0) * log_p);
        }
        out.sigma2 = 0.0;  // psi(f(X)) is constant on the support
        return out;
    }
    // Gaussian, diagonal covariance.
    if (spec.kind == OneSampleSpec::Kind::Shannon) {
        // H = sum_j (1/2) log(2 pi e s_j^2); -log f = sum z_j^2/2 + const,
        // so Var = sum Var(z^2)/4 = d/2.
        for (int j = 0; j < f.d; ++j) {
            out.T += 0.5 * std::log(2.0 * M_PI * M_E * f.var[static_cast<std::size_t>(j)]);
        }
        out.sigma2 = 0.5 * static_cast<double>(f.d);
        return out;
    }
    // Renyi entropy: integral of f^kappa = prod_j (2 pi s_j^2)^{(1-k)/2} k^{-1/2}.
    const double kappa = spec.kappa;
    double log_T = 0.0;
    for (int j = 0; j < f.d; ++j) {
        log_T += 0.5 * (1.0 - kappa) * std::log(2.0 * M_PI * f.var[static_cast<std::size_t>(j)]) -
                 0.5 * std::log(kappa);
    }
    out.T = std::exp(log_T);
    // Second moment needs the integral of f^{2 kappa - 1}.
    if (!(2.0 * kappa - 1.0 > 0.0)) {
        throw std::runtime_error(
            "truth: Var_f(f^{kappa-1}) diverges for a Gaussian when kappa <= 1/2");
    }
    double log_m2 = 0.0;
    for (int j = 0; j < f.d; ++j) {
        log_m2 += (1.0 - kappa) * std::log(2.0 * M_PI * f.var[static_cast<std::size_t>(j)]) -
                  0.5 * std::log(2.0 * kappa - 1.0);
    }
    out.sigma2 = std::exp(log_m2) - out.T * out.T;
    return out;
}

TruthOracle one_sample_quadrature(const DensityModel& f, const OneSampleSpec& spec) {
    TruthOracle out;
    out.method = TruthMethod::Quadrature;

    auto accumulate = [&out, &spec](const std::function<double(const std::function<double(double)>&)>& integrate) {
        // integrate() maps a scalar function of the density value into its
        // integral against the volume element; used twice below.
        out.T = integrate([&spec](double y) { return y * spec.psi(y); });
        const double second = integrate([&spec](double y) {
            const double t = spec.psi(y);
            return y * t * t;
        });
        out.sigma2 = second - out.T * out.T;
    };

    if (f.kind == DensityModel::Kind::SphericalBeta) {
        // Radial reduction: integral over the ball of h(f(x)) dx equals
        // d V_d int_0^1 r^{d-1} h(f(r)) dr for radial f.
        const double c = std::exp(log_sphbeta_constant(f.a, f.b, f.d));
        const double shell = static_cast<double>(f.d) * unit_ball_volume(f.d);
        const double a = f.a, b = f.b;
        const int d = f.d;
        accumulate([c, shell, a, b, d](const std::function<double(double)>& h) {
            return adaptive_simpson(
                [c, shell, a, b, d, &h](double r) {
                    const double y = c * std::pow(r, a - 1.0) * std::pow(1.0 - r, b - 1.0);
                    if (!(y > 0.0)) return 0.0;
                    return shell * std::pow(r, static_cast<double>(d - 1)) * h(y);
                },
                0.0, 1.0, kQuadTol);
        });
    } else {
        const Box box = support_box(f);
        accumulate([&f, &box](const std::function<double(double)>& h) {
            return integrate_box(
                [&f, &h](std::span<const double> x) {
                    const double y = f.pdf(x);
                    if (!(y > 0.0)) return 0.0;
                    return h(y);
                },
                box, kQuadTol);
        });
    }
    out.se_T = out.se_sigma2 = kQuadTol * 10.0;
    return out;
}

TruthOracle one_sample_monte_carlo(const DensityModel& f, const OneSampleSpec& spec,
                                   std::size_t draws, std::uint64_t seed) {
    if (draws < 2) {
        throw std::invalid_argument("truth: Monte Carlo needs at least 2 draws");
    }
    const Sample X = sample_model(f, draws, derive_seed(seed, 1));
    std::vector<double> terms(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        const double y = f.pdf(X.row(i));
        terms[i] = y > 0.0 ? spec.psi(y) : 0.0;
    }
    TruthOracle out;
    out.method = TruthMethod::MonteCarlo;
    out.mc_draws = draws;
    out.mc_seed = seed;
    out.T = mean(terms);
    out.sigma2 = population_variance(terms, out.T);
    out.se_T = std::sqrt(out.sigma2 / static_cast<double>(draws));
    out.se_sigma2 = variance_se(terms, out.T, out.sigma2);
    return out;
}

}  // namespace

TruthOracle truth_one_sample(const DensityModel& model_f, const OneSampleSpec& spec,
                             TruthMethod method, std::size_t mc_draws,
                             std::uint64_t mc_seed) {
    switch (method) {
        case TruthMethod::ClosedForm:
            if (!one_sample_closed_form_applies(model_f)) {
                throw std::invalid_argument(
                    "truth: no one-sample closed form registered for this model "
                    "(registered: Uniform, Gaussian)");
            }
            return one_sample_closed_form(model_f, spec);
        case TruthMethod::Quadrature:
            return one_sample_quadrature(model_f, spec);
        case TruthMethod::MonteCarlo:
            return one_sample_monte_carlo(model_f, spec, mc_draws, mc_seed);
        case TruthMethod::Auto:
            if (one_sample_closed_form_applies(model_f)) {
                return one_sample_closed_form(model_f, spec);
            }
            if (model_f.kind == DensityModel::Kind::SphericalBeta || model_f.d <= 2) {
                return one_sample_quadrature(model_f, spec);
            }
            return one_sample_monte_carlo(model_f, spec, mc_draws, mc_seed);
    }
    throw std::logic_error("truth_one_sample: unknown method");
}

}  // namespace nnfe
