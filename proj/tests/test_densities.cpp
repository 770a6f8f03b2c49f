#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "nnfe/densities.hpp"
#include "nnfe/errors.hpp"
#include "nnfe/functionals.hpp"

using namespace nnfe;

namespace {

// Composite Simpson on [lo, hi], independent of the library's quadrature.
double simpson(const std::function<double(double)>& f, double lo, double hi,
               int intervals) {
    const double h = (hi - lo) / intervals;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) {
        acc += f(lo + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

double ball_volume(int d) {
    return std::pow(std::acos(-1.0), 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// pdf along the first axis; spherical models only depend on the radius.
double radial_pdf(const DensityModel& model, double r) {
    std::vector<double> x(static_cast<std::size_t>(model.d), 0.0);
    x[0] = r;
    return model.pdf(x);
}

}  // namespace

TEST_CASE("standard normal density at the origin") {
    const DensityModel f = gaussian_model({0.0}, {1.0});
    CHECK(f.pdf(std::vector<double>{0.0}) ==
          doctest::Approx(0.398942280401432678).epsilon(1e-13));
    // Two independent coordinates multiply.
    const DensityModel f2 = gaussian_model({0.0, 0.0}, {1.0, 1.0});
    CHECK(f2.pdf(std::vector<double>{0.0, 0.0}) ==
          doctest::Approx(0.398942280401432678 * 0.398942280401432678)
              .epsilon(1e-13));
    CHECK_THROWS_AS(f.pdf(std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("flat spherical beta in one dimension is uniform on [-1, 1]") {
    const DensityModel f = spherical_beta_model(1.0, 1.0, 1);
    CHECK(f.pdf(std::vector<double>{0.3}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.pdf(std::vector<double>{-0.9}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.pdf(std::vector<double>{1.2}) == 0.0);
    CHECK(f.pdf(std::vector<double>{-1.2}) == 0.0);
}

TEST_CASE("spherical beta integrates to one over the ball") {
    // The density is radial, so integrate pdf(r e_1) against the surface
    // measure d V_d r^{d-1} with a test-local Simpson rule.
    for (int a = 1; a <= 3; ++a) {
        for (int b = 1; b <= 3; ++b) {
            for (int d = 1; d <= 3; ++d) {
                const DensityModel f = spherical_beta_model(a, b, d);
                const double mass = simpson(
                    [&](double r) {
                        return radial_pdf(f, r) * d * ball_volume(d) *
                               std::pow(r, d - 1);
                    },
                    0.0, 1.0, 4000);
                CAPTURE(a);
                CAPTURE(b);
                CAPTURE(d);
                CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("uniform box density and support") {
    const DensityModel f = uniform_model({0.0, -1.0}, {3.0, 1.0});
    CHECK(f.pdf(std::vector<double>{1.0, 0.0}) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(f.pdf(std::vector<double>{3.5, 0.0}) == 0.0);
    CHECK(f.pdf(std::vector<double>{1.0, -1.5}) == 0.0);
}

TEST_CASE("flat spherical beta draws pass a uniform KS check") {
    const DensityModel f = spherical_beta_model(1.0, 1.0, 1);
    const Sample s = sample_model(f, 10000, 91);
    std::vector<double> z(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) z[i] = s.row(i)[0];
    std::sort(z.begin(), z.end());
    double dks = 0.0;
    const double n = static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        REQUIRE(std::abs(z[i]) <= 1.0);
        const double cdf = 0.5 * (z[i] + 1.0);
        dks = std::max(dks, std::max((i + 1.0) / n - cdf, cdf - i / n));
    }
    CHECK(dks <= 0.02);
}

TEST_CASE("gaussian draws match their first two moments") {
    const DensityModel f = gaussian_model({-1.0, 2.0}, {1.0, 4.0});
    const std::size_t m = 20000;
    const Sample s = sample_model(f, m, 92);
    for (std::size_t j = 0; j < 2; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += s.row(i)[j];
        const double mu = acc / static_cast<double>(m);
        double sq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double c = s.row(i)[j] - mu;
            sq += c * c;
        }
        const double var = sq / static_cast<double>(m);
        const double sd = std::sqrt(f.var[j]);
        CHECK(std::abs(mu - f.mean[j]) <= 4.0 * sd / std::sqrt(static_cast<double>(m)));
        CHECK(std::abs(var - f.var[j]) <=
              5.0 * f.var[j] * std::sqrt(2.0 / static_cast<double>(m)));
    }
}

TEST_CASE("sampling is seed-deterministic") {
    const DensityModel f = spherical_beta_model(2.0, 3.0, 3);
    const Sample a = sample_model(f, 500, 7);
    const Sample b = sample_model(f, 500, 7);
    const Sample c = sample_model(f, 500, 8);
    REQUIRE(a.size() == b.size());
    CHECK(a.data() == b.data());
    CHECK(a.data() != c.data());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto row = a.row(i);
        double r2 = 0.0;
        for (const double v : row) r2 += v * v;
        REQUIRE(r2 <= 1.0 + 1e-12);
    }
    CHECK_THROWS_AS(sample_model(f, 0, 1), std::invalid_argument);
}

TEST_CASE("gaussian KL truth has the textbook closed form") {
    const DensityModel f = gaussian_model({0.0}, {1.0});
    const DensityModel g = gaussian_model({1.0}, {1.0});
    const TruthOracle t = truth(f, g, kl_functional());
    CHECK(t.method == TruthMethod::ClosedForm);
    CHECK(t.T == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t.v1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.v2 == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(t.sigma2 == t.v1);
    CHECK(t.se_T == 0.0);
}

TEST_CASE("closed form, quadrature and Monte Carlo truths agree") {
    const DensityModel f = gaussian_model({0.0}, {1.0});
    const DensityModel g = gaussian_model({1.0}, {1.0});
    const TruthOracle quad = truth(f, g, kl_functional(), TruthMethod::Quadrature);
    CHECK(quad.method == TruthMethod::Quadrature);
    CHECK(quad.T == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(quad.v1 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(quad.v2 == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-6));

    const TruthOracle mc =
        truth(f, g, kl_functional(), TruthMethod::MonteCarlo, 500000, 777);
    CHECK(mc.method == TruthMethod::MonteCarlo);
    REQUIRE(mc.se_T > 0.0);
    CHECK(mc.se_T < 0.01);
    CHECK(std::abs(mc.T - 0.5) <= 4.0 * mc.se_T);
    CHECK(std::abs(mc.v1 - 1.0) <= 5.0 * mc.se_v1 + 1e-3);
    CHECK(std::abs(mc.v2 - (std::exp(1.0) - 1.0)) <= 6.0 * mc.se_v2 + 2e-2);
}

TEST_CASE("KL truth reports the divergent second moment") {
    // E_g[(f/g)^2] is infinite once var_f >= 2 var_g.
    const DensityModel f = gaussian_model({0.0}, {2.0});
    const DensityModel g = gaussian_model({0.0}, {1.0});
    CHECK_THROWS_AS(truth(f, g, kl_functional()), std::runtime_error);
    CHECK_THROWS_AS(truth(gaussian_model({0.0}, {1.0}),
                          gaussian_model({0.0, 0.0}, {1.0, 1.0}), kl_functional()),
                    std::invalid_argument);
}

TEST_CASE("one-sample truths for the uniform box") {
    const DensityModel f = uniform_model({0.0, -1.0}, {3.0, 1.0});
    const TruthOracle shannon = truth_one_sample(f, shannon_spec());
    CHECK(shannon.method == TruthMethod::ClosedForm);
    CHECK(shannon.T == doctest::Approx(std::log(6.0)).epsilon(1e-14));
    CHECK(shannon.sigma2 == 0.0);

    // psi(f) = f^{kappa-1} is constant p^{kappa-1} on the box.
    const TruthOracle renyi = truth_one_sample(f, renyi_entropy_spec(0.6));
    CHECK(renyi.T == doctest::Approx(std::exp(0.4 * std::log(6.0))).epsilon(1e-13));
    CHECK(renyi.sigma2 == 0.0);
}

TEST_CASE("one-sample truths for the gaussian") {
    const DensityModel f = gaussian_model({0.0, 1.0}, {1.0, 4.0});
    const TruthOracle shannon = truth_one_sample(f, shannon_spec());
    const double expected =
        0.5 * std::log(2.0 * std::acos(-1.0) * std::exp(1.0)) +
        0.5 * std::log(2.0 * std::acos(-1.0) * std::exp(1.0) * 4.0);
    CHECK(shannon.T == doctest::Approx(expected).epsilon(1e-13));
    CHECK(shannon.sigma2 == doctest::Approx(1.0).epsilon(1e-14));

    // Renyi integral checked against a test-local Simpson rule on f^kappa.
    const DensityModel f1 = gaussian_model({0.0}, {1.0});
    const TruthOracle renyi = truth_one_sample(f1, renyi_entropy_spec(0.75));
    const double int_fk = simpson(
        [](double x) {
            const double pdf =
                std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0));
            return std::pow(pdf, 0.75);
        },
        -40.0, 40.0, 80000);
    const double int_f2k = simpson(
        [](double x) {
            const double pdf =
                std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0));
            return std::pow(pdf, 0.5);
        },
        -40.0, 40.0, 80000);
    CHECK(renyi.T == doctest::Approx(int_fk).epsilon(1e-10));
    CHECK(renyi.sigma2 ==
          doctest::Approx(int_f2k - int_fk * int_fk).epsilon(1e-9));

    // At kappa = 1/2 the second moment integral diverges.
    CHECK_THROWS_AS(truth_one_sample(f1, renyi_entropy_spec(0.5)),
                    std::runtime_error);
}

TEST_CASE("spherical beta Renyi entropy truth matches frozen quadrature") {
    const DensityModel f = spherical_beta_model(2.0, 3.0, 1);
    const TruthOracle t =
        truth_one_sample(f, renyi_entropy_spec(0.75), TruthMethod::Quadrature);
    CHECK(t.T == doctest::Approx(1.13064877425868337181).epsilon(1e-8));
    CHECK(t.sigma2 == doctest::Approx(0.0280278787516985019).epsilon(1e-6));
}

TEST_CASE("model strings parse and round-trip through name()") {
    const DensityModel f = parse_model("gaussian:0,1:1,4");
    CHECK(f.d == 2);
    CHECK(f.mean == std::vector<double>{0.0, 1.0});
    CHECK(f.var == std::vector<double>{1.0, 4.0});

    const DensityModel s = parse_model("sphbeta:2:3:2");
    CHECK(s.d == 2);
    CHECK(s.a == 2.0);
    CHECK(s.b == 3.0);
    // Default dimension is 1 when the tail is omitted.
    CHECK(parse_model("sphbeta:2:3").d == 1);

    const DensityModel u = parse_model("uniform:0,-1:3,1");
    CHECK(u.lo == std::vector<double>{0.0, -1.0});
    CHECK(u.hi == std::vector<double>{3.0, 1.0});

    for (const DensityModel& model : {f, s, u}) {
        const DensityModel again = parse_model(model.name());
        std::vector<double> x(static_cast<std::size_t>(model.d), 0.25);
        CHECK(again.pdf(x) == model.pdf(x));
    }
}

TEST_CASE("model parsing rejects malformed strings") {
    try {
        parse_model("cauchy:0:1");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("unknown model kind 'cauchy'") !=
              std::string::npos);
    }
    CHECK_THROWS_AS(parse_model("gaussian:0"), ParseError);
    CHECK_THROWS_AS(parse_model("gaussian:a:1"), ParseError);
    CHECK_THROWS_AS(parse_model("gaussian:0:-1"), ParseError);
    CHECK_THROWS_AS(parse_model("sphbeta:2:3:1.5"), ParseError);
    CHECK_THROWS_AS(parse_model("sphbeta:0.5:1:1"), ParseError);
    CHECK_THROWS_AS(parse_model("uniform:1:0"), ParseError);
    CHECK_THROWS_AS(parse_model(""), ParseError);
}

TEST_CASE("model constructors validate their parameters") {
    CHECK_THROWS_AS(gaussian_model({0.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_model({0.0, 1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_model({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(spherical_beta_model(0.9, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(spherical_beta_model(1.0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(spherical_beta_model(1.0, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(uniform_model({0.0}, {0.0}), std::invalid_argument);
}
