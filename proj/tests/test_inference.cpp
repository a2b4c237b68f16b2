#include "elca/inference.hpp"

#include "elca/dist.hpp"
#include "elca/errors.hpp"
#include "elca/rng.hpp"
#include "elca/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace elca;

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

ConstraintSpec five_fourier() {
    ConstraintSpec spec;
    spec.link = Link::logit;
    spec.aux_terms = {parse_aux_term("const@1"), parse_aux_term("fsin1@1:x0"),
                      parse_aux_term("fcos1@1:x0")};
    return spec;
}

// Continuous-outcome dataset for the identity link.
TrialDataset gaussian_data(std::uint64_t seed, int n = 80) {
    CounterRng rng(seed);
    Eigen::VectorXd y(n);
    Eigen::VectorXi z(n);
    Eigen::MatrixXd x(n, 1);
    for (int i = 0; i < n; ++i) {
        z[i] = rng.bernoulli(0.5) ? 1 : 0;
        x(i, 0) = rng.normal();
        y[i] = 0.5 + 0.8 * z[i] + 0.6 * x(i, 0) + rng.normal();
    }
    return TrialDataset(y, z, x, Eigen::Vector2d(0.5, 0.5));
}

} // namespace

TEST_CASE("identity marginal fit equals arm means with the classical sandwich") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        const TrialDataset data = gaussian_data(seed);
        ConstraintSpec spec; // identity, just-identified
        const MeleResult fit = fit_mele(data, spec);
        REQUIRE(fit.converged);
        const double m0 = data.arm_mean(0), m1 = data.arm_mean(1);
        CHECK(std::fabs(fit.beta_hat[0] - m0) < 1e-8);
        CHECK(std::fabs(fit.beta_hat[1] - (m1 - m0)) < 1e-8);

        // classical heteroscedastic two-sample sandwich
        double n0 = 0, n1 = 0, a0 = 0, a1 = 0;
        for (int i = 0; i < data.n(); ++i) {
            if (data.arms()[i] == 0) {
                n0 += 1;
                a0 += std::pow(data.outcomes()[i] - m0, 2);
            } else {
                n1 += 1;
                a1 += std::pow(data.outcomes()[i] - m1, 2);
            }
        }
        const double v0 = a0 / (n0 * n0), v1 = a1 / (n1 * n1);
        CHECK(std::fabs(fit.vcov(0, 0) - v0) < 1e-6);
        CHECK(std::fabs(fit.vcov(1, 1) - (v0 + v1)) < 1e-6);
        CHECK(std::fabs(fit.vcov(0, 1) + v0) < 1e-6);
        CHECK(std::fabs(fit.vcov(0, 1) - fit.vcov(1, 0)) < 1e-10);
    }
}

TEST_CASE("logit marginal fit equals arm log-odds") {
    const TrialDataset data = generate(scenario1(1.0), 404);
    ConstraintSpec spec;
    spec.link = Link::logit;
    const MeleResult fit = fit_mele(data, spec);
    REQUIRE(fit.converged);
    const double p0 = data.arm_mean(0), p1 = data.arm_mean(1);
    const double b1 = std::log(p0 / (1 - p0));
    const double b2 = std::log(p1 / (1 - p1)) - b1;
    CHECK(std::fabs(fit.beta_hat[0] - b1) < 1e-8);
    CHECK(std::fabs(fit.beta_hat[1] - b2) < 1e-8);
    CHECK(fit.loglik_at_opt == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(fit.inner_diag.lambda.norm() < 1e-6);
}

TEST_CASE("M-estimator equivalence holds across random just-identified fits") {
    for (int trial = 0; trial < 20; ++trial) {
        const TrialDataset data = generate(scenario1(1.0), 7000 + trial);
        ConstraintSpec spec;
        spec.link = Link::logit;
        const MeleResult fit = fit_mele(data, spec);
        REQUIRE(fit.converged);
        const double p0 = data.arm_mean(0), p1 = data.arm_mean(1);
        const double b1 = std::log(p0 / (1 - p0));
        const double b2 = std::log(p1 / (1 - p1)) - b1;
        CHECK(std::fabs(fit.beta_hat[0] - b1) < 1e-8);
        CHECK(std::fabs(fit.beta_hat[1] - b2) < 1e-8);
    }
}

TEST_CASE("overidentified fit converges with a small gradient") {
    const TrialDataset data = generate(scenario1(2.0), 2718);
    const MeleResult fit = fit_mele(data, five_fourier());
    REQUIRE(fit.converged);
    ProfileEvaluator eval(data, five_fourier());
    const ELSolution sol = eval.evaluate(fit.beta_hat);
    const Eigen::VectorXd grad = eval.gradient(fit.beta_hat, sol);
    CHECK(grad.norm() <= 1e-6 * (1.0 + std::fabs(fit.loglik_at_opt)));
    CHECK(fit.vcov(0, 0) > 0.0);
    CHECK(fit.vcov(1, 1) > 0.0);
    CHECK(std::fabs(fit.vcov(0, 1) - fit.vcov(1, 0)) < 1e-10);
}

TEST_CASE("wald_interval arithmetic") {
    MeleResult fit;
    fit.beta_hat = Eigen::Vector2d(1.0, 0.0);
    fit.vcov = Eigen::Matrix2d::Zero();
    fit.vcov(0, 0) = 0.04;
    fit.vcov(1, 1) = 0.09;
    fit.converged = true;
    const auto [lo, hi] = wald_interval(fit, 0, 0.95);
    CHECK(lo == doctest::Approx(1.0 - 1.959964 * 0.2).epsilon(1e-6));
    CHECK(hi == doctest::Approx(1.0 + 1.959964 * 0.2).epsilon(1e-6));

    const auto [lo50, hi50] = wald_interval(fit, 0, 0.5);
    const double ratio = (hi50 - lo50) / (hi - lo);
    CHECK(ratio == doctest::Approx(normal_quantile(0.75) / normal_quantile(0.975)).epsilon(1e-10));

    fit.converged = false;
    CHECK_THROWS_AS(wald_interval(fit, 0, 0.95), ContractError);
}

TEST_CASE("full-vector LR self-test gives statistic 0 and p 1") {
    const TrialDataset data = generate(scenario1(1.0), 31415);
    const ConstraintSpec spec = five_fourier();
    const MeleResult fit = fit_mele(data, spec);
    REQUIRE(fit.converged);
    const TestResult t = lr_test_full(data, spec, fit.beta_hat, fit);
    CHECK(t.statistic == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(t.p_value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.df == 2);
    // p = 1 - chi2_cdf(stat, df) to machine precision
    CHECK(std::fabs(t.p_value - (1.0 - chi2_cdf(t.statistic, t.df))) < 1e-12);
}

TEST_CASE("profile restriction at the unrestricted optimum is inactive") {
    const TrialDataset data = generate(scenario1(1.0), 55);
    const ConstraintSpec spec = five_fourier();
    const MeleResult fit = fit_mele(data, spec);
    REQUIRE(fit.converged);
    Eigen::VectorXd v(1);
    v[0] = fit.beta_hat[1];
    const TestResult t = lr_test_profile(data, spec, {1}, v, fit);
    CHECK(t.statistic == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(t.df == 1);
}

TEST_CASE("profile LR moves away from the optimum") {
    const TrialDataset data = generate(scenario1(1.0), 888);
    const ConstraintSpec spec = five_fourier();
    const MeleResult fit = fit_mele(data, spec);
    REQUIRE(fit.converged);
    Eigen::VectorXd v(1);
    v[0] = fit.beta_hat[1] + 1.0;
    const TestResult t = lr_test_profile(data, spec, {1}, v, fit);
    CHECK(t.statistic > 0.5);
    CHECK(t.p_value < 1.0);
    CHECK(std::fabs(t.p_value - (1.0 - chi2_cdf(t.statistic, 1))) < 1e-12);
}

TEST_CASE("LR statistic agrees locally with the Wald quadratic form") {
    const TrialDataset data = generate(scenario1(1.0), 10101);
    ConstraintSpec spec;
    spec.link = Link::logit;
    const MeleResult fit = fit_mele(data, spec);
    REQUIRE(fit.converged);
    CounterRng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::Vector2d beta0 = fit.beta_hat;
        beta0[0] += 0.05 * rng.normal();
        beta0[1] += 0.05 * rng.normal();
        const TestResult t = lr_test_full(data, spec, beta0, fit);
        const Eigen::Vector2d d = fit.beta_hat - beta0;
        const double wald = d.dot(fit.vcov.llt().solve(d));
        if (wald < 1.0 && wald > 1e-4) {
            CHECK(std::fabs(t.statistic - wald) <= 0.15 * wald);
        }
    }
}

TEST_CASE("hull-violating null is flagged, never silent") {
    const TrialDataset data = gaussian_data(77);
    ConstraintSpec spec; // identity link
    const MeleResult fit = fit_mele(data, spec);
    REQUIRE(fit.converged);
    // beta0 far above every outcome: residuals all negative, 0 leaves the hull
    Eigen::Vector2d beta0(data.outcomes().maxCoeff() + 10.0, 0.0);
    const TestResult t = lr_test_full(data, spec, beta0, fit);
    CHECK(t.null_infeasible);
    CHECK(t.p_value == 0.0);
}

TEST_CASE("argmin is invariant to rescaling an auxiliary column") {
    CounterRng rng(9090);
    for (int trial = 0; trial < 6; ++trial) {
        const TrialDataset data = generate(scenario1(2.0), 600 + trial);
        ConstraintSpec spec = five_fourier();
        spec.standardize = false;
        const Eigen::MatrixXd aux = auxiliary_equations(data, spec);
        ProfileEvaluator base(data, Link::logit, aux);
        Eigen::MatrixXd scaled = aux;
        const double c = std::exp(2.0 * rng.normal());
        scaled.col(1) *= c;
        ProfileEvaluator mixed(data, Link::logit, scaled);
        const MeleResult fit_a = fit_mele(base);
        const MeleResult fit_b = fit_mele(mixed);
        REQUIRE(fit_a.converged);
        REQUIRE(fit_b.converged);
        CHECK((fit_a.beta_hat - fit_b.beta_hat).norm() < 1e-8);
        // full-vector LR statistic unchanged too
        const Eigen::Vector2d truth = true_beta(scenario1(2.0));
        ProfileEvaluator base2(data, Link::logit, aux);
        ProfileEvaluator mixed2(data, Link::logit, scaled);
        const double la = 2.0 * base2.evaluate(truth).loglik - 2.0 * fit_a.loglik_at_opt;
        const double lb = 2.0 * mixed2.evaluate(truth).loglik - 2.0 * fit_b.loglik_at_opt;
        CHECK(std::fabs(la - lb) < 1e-8);
    }
}

TEST_CASE("variance never degrades much when constraints are added (median over datasets)") {
    ConstraintSpec marginal;
    marginal.link = Link::logit;
    ConstraintSpec plus_const;
    plus_const.link = Link::logit;
    plus_const.aux_terms = {parse_aux_term("const@1")};
    const ConstraintSpec plus_fourier = five_fourier();

    std::vector<double> v0, v1, v2;
    for (int rep = 0; rep < 40; ++rep) {
        const TrialDataset data = generate(scenario1(2.0), 90000 + rep);
        try {
            const MeleResult f0 = fit_mele(data, marginal);
            const MeleResult f1 = fit_mele(data, plus_const);
            const MeleResult f2 = fit_mele(data, plus_fourier);
            if (!(f0.converged && f1.converged && f2.converged)) continue;
            v0.push_back(f0.vcov(1, 1));
            v1.push_back(f1.vcov(1, 1));
            v2.push_back(f2.vcov(1, 1));
        } catch (const NumericError&) {
            continue;
        }
    }
    REQUIRE(v0.size() >= 35);
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    CHECK(median(v1) <= median(v0) + 1e-6);
    CHECK(median(v2) <= median(v1) + 1e-6);
}

TEST_CASE("power_analytic reference points") {
    Eigen::MatrixXd A(1, 1);
    A << 1.0;
    Eigen::VectorXd h(1);

    h << 0.0;
    CHECK(power_analytic(A, h, 0.05) == doctest::Approx(0.05).epsilon(1e-12));

    h << 3.0;
    double ncp = 0.0;
    const double p = power_analytic(A, h, 0.05, std::nullopt, &ncp);
    CHECK(ncp == doctest::Approx(9.0));
    CHECK(p == doctest::Approx(0.8508387683270562).epsilon(1e-7));
    // cross-check against the two-sided normal power formula
    const double z = normal_quantile(0.975);
    CHECK(p == doctest::Approx(normal_cdf(3.0 - z) + normal_cdf(-3.0 - z)).epsilon(1e-9));

    // block-diagonal A: subset power reduces to the tested block alone
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
    B(0, 0) = 2.0;
    B(1, 1) = 5.0;
    Eigen::VectorXd h2(2);
    h2 << 1.5, 0.0;
    const double sub = power_analytic(B, h2, 0.05, std::vector<int>{0});
    Eigen::MatrixXd B11(1, 1);
    B11 << 2.0;
    Eigen::VectorXd h1(1);
    h1 << 1.5;
    CHECK(sub == doctest::Approx(power_analytic(B11, h1, 0.05)).epsilon(1e-12));

    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0; // indefinite
    CHECK_THROWS(power_analytic(bad, h2, 0.05));
}

TEST_CASE("infeasible start exhausts its perturbations") {
    // an all-positive custom auxiliary column violates the hull at every beta
    const TrialDataset data = gaussian_data(3);
    Eigen::MatrixXd aux = Eigen::MatrixXd::Ones(data.n(), 1);
    ProfileEvaluator eval(data, Link::identity, aux);
    CHECK_THROWS_AS(fit_mele(eval), NumericError);
}

TEST_CASE("a fully separated arm fails with a separation diagnosis") {
    // arm 1 has only events: its score column is nonnegative at every beta,
    // so zero leaves the hull and no MELE exists
    Eigen::VectorXd y(12);
    Eigen::VectorXi z(12);
    Eigen::MatrixXd x(12, 0);
    for (int i = 0; i < 12; ++i) {
        z[i] = (i % 2);
        y[i] = (z[i] == 1) ? 1.0 : (i % 4 == 0 ? 1.0 : 0.0);
    }
    const TrialDataset data(y, z, x, Eigen::Vector2d(0.5, 0.5));
    ConstraintSpec spec;
    spec.link = Link::logit;
    try {
        fit_mele(data, spec);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("separat") != std::string::npos);
    }
}
