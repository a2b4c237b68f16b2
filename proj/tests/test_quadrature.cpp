#include "elca/quadrature.hpp"

#include "elca/dist.hpp"
#include "elca/errors.hpp"
#include "elca/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace elca;

TEST_CASE("Gauss-Hermite integrates normal moments exactly") {
    const GaussHermiteRule rule(64);
    // E[X^k] for X~N(0,sigma^2): 0, sigma^2, 0, 3 sigma^4
    for (double sigma : {0.5, 1.0, 2.0}) {
        CHECK(normal_expectation(rule, [](double x) { return x; }, sigma) ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK(normal_expectation(rule, [](double x) { return x * x; }, sigma) ==
              doctest::Approx(sigma * sigma).epsilon(1e-12));
        CHECK(normal_expectation(rule, [](double x) { return x * x * x * x; }, sigma) ==
              doctest::Approx(3.0 * std::pow(sigma, 4)).epsilon(1e-12));
    }
}

TEST_CASE("Gauss-Hermite reproduces the lognormal mean") {
    const GaussHermiteRule rule(64);
    // E[e^X] = e^{sigma^2/2}
    for (double sigma : {0.5, 1.0, 1.5}) {
        const double got = normal_expectation(rule, [](double x) { return std::exp(x); }, sigma);
        CHECK(got == doctest::Approx(std::exp(0.5 * sigma * sigma)).epsilon(1e-12));
    }
}

TEST_CASE("tensor rule factorizes for separable integrands") {
    const GaussHermiteRule rule(48);
    const double got = normal_expectation2(
        rule, [](double a, double b) { return a * a * b * b; }, 1.0, 2.0);
    CHECK(got == doctest::Approx(1.0 * 4.0).epsilon(1e-10));
}

namespace {

Scenario scenario1(double sigma) {
    Scenario s;
    s.id = ScenarioKind::linear_x;
    s.sigma = {sigma};
    s.intercepts = {0.3, 1.0};
    s.slopes = {Eigen::Vector2d(1.0, 1.5)};
    s.quadratic = {false};
    return s;
}

} // namespace

TEST_CASE("true_beta matches the quadrature reference values") {
    const Eigen::Vector2d b05 = true_beta(scenario1(0.5));
    CHECK(b05[0] == doctest::Approx(0.2833436935622715).epsilon(1e-8));
    CHECK(b05[1] == doctest::Approx(0.6096592095387454).epsilon(1e-8));
    const Eigen::Vector2d b1 = true_beta(scenario1(1.0));
    CHECK(b1[0] == doctest::Approx(0.24809192680593045).epsilon(1e-8));
    CHECK(b1[1] == doctest::Approx(0.4634373440260811).epsilon(1e-8));
    // the sd=2 integrand needs the internal node-doubling step; the frozen
    // value is the stabilized one
    const Eigen::Vector2d b2 = true_beta(scenario1(2.0));
    CHECK(b2[0] == doctest::Approx(0.181802571717466).epsilon(1e-7));
    CHECK(b2[1] == doctest::Approx(0.279180636069454).epsilon(1e-7));
}

TEST_CASE("true_beta with zero slopes reduces to the intercept contrast") {
    Scenario s = scenario1(1.7);
    s.slopes = {Eigen::Vector2d(0.0, 0.0)};
    const Eigen::Vector2d b = true_beta(s);
    CHECK(b[0] == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(b[1] == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("true_beta agrees with a large Monte Carlo oracle") {
    // independent oracle: raw averaging with the standard library RNG
    const Scenario s = scenario1(2.0);
    std::mt19937_64 gen(991);
    std::normal_distribution<double> norm(0.0, 2.0);
    const int big = 2'000'000;
    double sum0 = 0.0, sum1 = 0.0;
    for (int i = 0; i < big; ++i) {
        const double x = norm(gen);
        sum0 += logistic(0.3 + x);
        sum1 += logistic(1.0 + 1.5 * x);
    }
    const double p0 = sum0 / big, p1 = sum1 / big;
    const double b1 = std::log(p0 / (1 - p0));
    const double b2 = std::log(p1 / (1 - p1)) - b1;
    // MC standard error of each logit is about 2e-3/sqrt(n-ish); allow 3 SE
    const Eigen::Vector2d b = true_beta(s);
    CHECK(std::fabs(b[0] - b1) < 3.0 * 1.5e-3);
    CHECK(std::fabs(b[1] - b2) < 3.0 * 2.1e-3);
}

TEST_CASE("two-covariate truth matches the reference") {
    Scenario s;
    s.id = ScenarioKind::two_covariates;
    s.sigma = {1.0, 2.0};
    s.intercepts = {0.3, 1.0};
    s.slopes = {Eigen::Vector2d(1.0, 1.5), Eigen::Vector2d(2.0, 1.5)};
    s.quadratic = {false, false};
    const Eigen::Vector2d b = true_beta(s);
    CHECK(b[0] == doctest::Approx(0.1066743923080388).epsilon(2e-4));
    CHECK(b[1] == doctest::Approx(0.31587518377654733).epsilon(2e-4));
}
