#include "elca/dataset.hpp"

#include "elca/errors.hpp"
#include "elca/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace elca;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("minimal 4-row file loads") {
    const auto path = write_temp("elca_min.csv",
                                 "y,z,x\n"
                                 "1,0,0.3\n"
                                 "0,1,-1.2\n"
                                 "1,1,0.0\n"
                                 "0,0,2.5\n");
    CsvSchema schema;
    schema.outcome = "y";
    schema.arm = "z";
    schema.covariates = {"x"};
    schema.pi = {0.5, 0.5};
    const TrialDataset data = load_csv(path, schema);
    CHECK(data.n() == 4);
    CHECK(data.num_arms() == 2);
    CHECK(data.num_covariates() == 1);
    CHECK(data.outcomes()[0] == 1.0);
    CHECK(data.arms()[1] == 1);
    CHECK(data.covariates()(3, 0) == 2.5);
    CHECK(data.outcome_is_binary());
}

TEST_CASE("arm labels 1..4 remap to 0..3") {
    const auto path = write_temp("elca_gusto.csv",
                                 "death,treat,age\n"
                                 "0,1,55\n0,2,61\n1,3,70\n0,4,48\n1,1,80\n0,2,66\n"
                                 "0,3,59\n1,4,72\n0,1,50\n0,2,63\n");
    CsvSchema schema;
    schema.outcome = "death";
    schema.arm = "treat";
    schema.covariates = {"age"};
    schema.arm_labels = {"1", "2", "3", "4"};
    schema.pi = {0.25, 0.25, 0.25, 0.25};
    const TrialDataset data = load_csv(path, schema);
    CHECK(data.num_arms() == 4);
    CHECK(data.arms()[0] == 0);
    CHECK(data.arms()[3] == 3);
}

TEST_CASE("out-of-range arm label names the row") {
    const auto path = write_temp("elca_bad_arm.csv",
                                 "y,z\n0,0\n1,1\n0,2\n1,3\n0,5\n1,0\n");
    CsvSchema schema;
    schema.outcome = "y";
    schema.arm = "z";
    schema.pi = {0.25, 0.25, 0.25, 0.25};
    try {
        load_csv(path, schema);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("5") != std::string::npos);
    }
}

TEST_CASE("schema and parse errors") {
    const auto path = write_temp("elca_err.csv", "y,z\n1,0\noops,1\n0,1\n1,0\n");
    CsvSchema schema;
    schema.outcome = "y";
    schema.arm = "z";
    schema.pi = {0.5, 0.5};
    CHECK_THROWS_AS(load_csv(path, schema), InputError); // non-numeric cell

    CsvSchema missing = schema;
    missing.outcome = "nope";
    CHECK_THROWS_AS(load_csv(path, missing), SpecError);

    CsvSchema nopi = schema;
    nopi.pi.clear();
    CHECK_THROWS_AS(load_csv(path, nopi), SpecError);
}

TEST_CASE("missing values are rejected with the row index") {
    const auto path = write_temp("elca_missing.csv",
                                 "y,z,x\n1,0,0.4\n0,1,\n1,0,0.2\n0,1,0.9\n");
    CsvSchema schema;
    schema.outcome = "y";
    schema.arm = "z";
    schema.covariates = {"x"};
    schema.pi = {0.5, 0.5};
    try {
        load_csv(path, schema);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("pi from data uses arm frequencies") {
    const auto path = write_temp("elca_fd.csv", "y,z\n1,0\n0,1\n1,1\n0,1\n1,0\n0,1\n1,1\n0,0\n");
    CsvSchema schema;
    schema.outcome = "y";
    schema.arm = "z";
    schema.pi_from_data = true;
    const TrialDataset data = load_csv(path, schema);
    CHECK(data.allocation()[0] == doctest::Approx(3.0 / 8.0));
    CHECK(data.allocation()[1] == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("dataset invariants are enforced") {
    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    Eigen::VectorXi z(4);
    z << 0, 1, 0, 1;
    Eigen::MatrixXd x(4, 0);
    CHECK_THROWS_AS(TrialDataset(y, z, x, Eigen::Vector2d(0.6, 0.6)), InputError);
    CHECK_THROWS_AS(TrialDataset(y, z, x, Eigen::Vector2d(1.0, 0.0)), InputError);
    Eigen::VectorXi zbad = z;
    zbad[2] = 7;
    CHECK_THROWS_AS(TrialDataset(y, zbad, x, Eigen::Vector2d(0.5, 0.5)), InputError);
    // n >= K+2
    Eigen::VectorXd y2(2);
    y2 << 1, 0;
    Eigen::VectorXi z2(2);
    z2 << 0, 1;
    Eigen::MatrixXd x2(2, 0);
    CHECK_THROWS_AS(TrialDataset(y2, z2, x2, Eigen::Vector2d(0.5, 0.5)), InputError);
}

TEST_CASE("empirical CDF counts exactly") {
    EmpiricalCdf F({3.0, 1.0, 2.0});
    CHECK(F(2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(F(0.5) == 0.0);
    CHECK(F(3.0) == 1.0);
    CHECK(F(10.0) == 1.0);
    EmpiricalCdf G({1.0, 1.0, 2.0});
    CHECK(G(1.0) == doctest::Approx(2.0 / 3.0)); // ties share the upper rank
}

TEST_CASE("n * F_n(x_i) equals the max-rank of x_i") {
    CounterRng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform() * 40);
        std::vector<double> v(n);
        for (auto& x : v) x = std::floor(rng.uniform() * 10); // force ties
        EmpiricalCdf F(v);
        for (int i = 0; i < n; ++i) {
            int rank = 0;
            for (int j = 0; j < n; ++j) rank += (v[j] <= v[i]) ? 1 : 0;
            CHECK(F(v[i]) * n == doctest::Approx(rank).epsilon(1e-12));
        }
    }
}

TEST_CASE("empirical_cdf checks the column index") {
    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    Eigen::VectorXi z(4);
    z << 0, 1, 0, 1;
    Eigen::MatrixXd x(4, 1);
    x << 0.1, 0.2, 0.3, 0.4;
    const TrialDataset data(y, z, x, Eigen::Vector2d(0.5, 0.5));
    CHECK_NOTHROW(empirical_cdf(data, 0));
    CHECK_THROWS_AS(empirical_cdf(data, 1), InputError);
    CHECK_THROWS_AS(empirical_cdf(data, -1), InputError);
}

TEST_CASE("load -> save -> load round-trips") {
    CounterRng rng(123);
    std::string body = "y,z,x0,x1\n";
    for (int i = 0; i < 25; ++i) {
        body += std::to_string(rng.uniform()) + "," + std::to_string(i % 3) + "," +
                std::to_string(rng.normal()) + "," + std::to_string(rng.normal()) + "\n";
    }
    const auto path = write_temp("elca_rt.csv", body);
    CsvSchema schema;
    schema.outcome = "y";
    schema.arm = "z";
    schema.covariates = {"x0", "x1"};
    schema.pi = {0.4, 0.3, 0.3};
    const TrialDataset a = load_csv(path, schema);
    const auto path2 = (std::filesystem::temp_directory_path() / "elca_rt2.csv").string();
    save_csv(a, path2, schema);
    const TrialDataset b = load_csv(path2, schema);
    REQUIRE(a.n() == b.n());
    for (int i = 0; i < a.n(); ++i) {
        CHECK(a.outcomes()[i] == b.outcomes()[i]);
        CHECK(a.arms()[i] == b.arms()[i]);
        for (int j = 0; j < a.num_covariates(); ++j)
            CHECK(a.covariates()(i, j) == b.covariates()(i, j));
    }
    CHECK(a.allocation() == b.allocation());
}
