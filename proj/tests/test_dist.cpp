#include "elca/dist.hpp"
#include "elca/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace elca;

TEST_CASE("chi2_cdf matches the df=2 closed form 1 - exp(-x/2)") {
    for (double x = 0.05; x < 40.0; x += 0.173) {
        CHECK(std::fabs(chi2_cdf(x, 2) - (1.0 - std::exp(-0.5 * x))) < 1e-12);
    }
}

TEST_CASE("chi2_cdf matches the df=1 form erf(sqrt(x/2))") {
    for (double x = 0.01; x < 30.0; x += 0.217) {
        CHECK(std::fabs(chi2_cdf(x, 1) - std::erf(std::sqrt(0.5 * x))) < 1e-12);
    }
}

TEST_CASE("chi2_cdf matches the df=4 closed form") {
    for (double x = 0.1; x < 50.0; x += 0.31) {
        const double expect = 1.0 - std::exp(-0.5 * x) * (1.0 + 0.5 * x);
        CHECK(std::fabs(chi2_cdf(x, 4) - expect) < 1e-12);
    }
}

TEST_CASE("standard critical values") {
    CHECK(chi2_cdf(3.841459, 1) == doctest::Approx(0.95).epsilon(1e-6));
    CHECK(chi2_cdf(5.991465, 2) == doctest::Approx(0.95).epsilon(1e-6));
}

TEST_CASE("chi2_quantile inverts chi2_cdf") {
    for (int df : {1, 2, 3, 5, 10}) {
        for (double p : {0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999}) {
            const double x = chi2_quantile(p, df);
            CHECK(std::fabs(chi2_cdf(x, df) - p) < 1e-9);
        }
    }
    CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-9));
    CHECK(chi2_quantile(0.95, 2) == doctest::Approx(5.991464547107979).epsilon(1e-9));
}

TEST_CASE("noncentral chi-square degenerates to the central CDF at ncp=0") {
    for (double x : {0.3, 1.0, 3.84, 9.21, 25.0}) {
        for (int df : {1, 2, 7}) {
            CHECK(std::fabs(noncentral_chi2_cdf(x, df, 0.0) - chi2_cdf(x, df)) == 0.0);
        }
    }
}

TEST_CASE("noncentral chi-square df=1 equals the shifted-normal form") {
    // X = (Z + delta)^2: P(X <= x) = Phi(sqrt(x)-delta) - Phi(-sqrt(x)-delta)
    for (double delta : {0.5, 1.0, 3.0}) {
        for (double x : {0.5, 2.0, 3.841458820694124, 10.0}) {
            const double s = std::sqrt(x);
            const double expect = normal_cdf(s - delta) - normal_cdf(-s - delta);
            CHECK(std::fabs(noncentral_chi2_cdf(x, 1, delta * delta) - expect) < 1e-11);
        }
    }
}

TEST_CASE("normal_quantile hits standard values and inverts the CDF") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    for (double p : {1e-6, 0.025, 0.31, 0.5, 0.77, 0.975, 1.0 - 1e-6}) {
        CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
    }
}

TEST_CASE("logistic basics") {
    CHECK(logistic(0.0) == doctest::Approx(0.5));
    CHECK(logistic(700.0) == doctest::Approx(1.0));
    CHECK(logistic(-700.0) == doctest::Approx(0.0));
    CHECK(logistic_deriv(0.0) == doctest::Approx(0.25));
    // symmetry phi(-u) = 1 - phi(u)
    for (double u = -8.0; u < 8.0; u += 0.37)
        CHECK(std::fabs(logistic(-u) - (1.0 - logistic(u))) < 1e-15);
}

TEST_CASE("domain violations throw") {
    CHECK_THROWS_AS(chi2_cdf(1.0, 0), InputError);
    CHECK_THROWS_AS(chi2_quantile(1.5, 2), InputError);
    CHECK_THROWS_AS(normal_quantile(0.0), InputError);
    CHECK_THROWS_AS(noncentral_chi2_cdf(1.0, 2, -1.0), InputError);
}
