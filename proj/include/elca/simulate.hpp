#pragma once

#include "elca/constraints.hpp"
#include "elca/dataset.hpp"
#include "elca/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace elca {

enum class ScenarioKind { linear_x, quadratic_x, two_covariates };

// Two-arm benchmark scenario: X_c ~ N(0, sigma_c^2) independent,
// Z ~ Bernoulli(pi_1), and Y | Z=g, X ~ Bernoulli(phi(intercept_g +
// sum_c slope_{c,g} T_c(X_c))) with T_c identity or square.
struct Scenario {
    ScenarioKind id = ScenarioKind::linear_x;
    std::vector<double> sigma;                    // per covariate
    Eigen::Vector2d intercepts{0.0, 0.0};         // arm 0, arm 1
    std::vector<Eigen::Vector2d> slopes;          // per covariate (arm 0, arm 1)
    std::vector<bool> quadratic;                  // per covariate
    int n = 200;
    Eigen::Vector2d pi{0.5, 0.5};

    void validate() const;
    int num_covariates() const { return static_cast<int>(sigma.size()); }
};

/// Draws one dataset; the stream is fully determined by the seed.
TrialDataset generate(const Scenario& scenario, std::uint64_t rng_seed);
TrialDataset generate(const Scenario& scenario, CounterRng& rng);

/// Marginal (logit-scale) parameters implied by the scenario, by
/// Gauss-Hermite quadrature. Starts at 64 nodes per dimension and doubles
/// until successive rules agree to 1e-6 (NumericError past 512 nodes).
Eigen::Vector2d true_beta(const Scenario& scenario);

struct MethodSpec {
    std::string label;
    ConstraintSpec spec;
};

struct SimulationOptions {
    int reps = 1000;
    std::uint64_t seed = 1;
    double level = 0.95; // confidence level; tests run at 1-level
    int workers = 1;
};

struct SimulationReport {
    struct EstimateRow {
        std::string method;
        int param = 0; // 0-based index into beta
        double true_value = 0.0;
        double mc_bias = 0.0;
        double mean_sandwich_se = 0.0; // mean over replications
        double mc_std = 0.0;
        double cov_prob = 0.0; // Wald interval coverage
        double avg_ci_length = 0.0;
    };
    struct TestRow {
        std::string method;
        double beta10 = 0.0;
        double beta20 = 0.0;
        double cov_prob = 0.0; // profile LR test of beta2 = beta20
        double power = 0.0;    // profile LR test of beta2 = 0
    };

    std::string scenario_label;
    bool power_mode = false;
    std::uint64_t seed = 0;
    int reps = 0;
    int failures = 0; // excluded pairwise across methods
    double level = 0.95;
    std::vector<EstimateRow> estimate_rows;
    std::vector<TestRow> test_rows;

    std::string to_text() const;
    std::string to_csv() const;
    std::string to_json_string() const; // machine-readable summary
};

/// Runs the Monte Carlo experiment. Replications are keyed by index so any
/// worker count yields a bit-identical report; replications where any
/// method fails are dropped for all methods (pairwise) and counted.
SimulationReport run_experiment(const Scenario& scenario,
                                const std::vector<MethodSpec>& methods,
                                const SimulationOptions& opts);

struct SimPreset {
    std::string name;
    std::string description;
    Scenario scenario;
    std::vector<MethodSpec> methods;
    bool power_mode = false;
};

/// Built-in benchmark presets (table1-sd05 ... table6-c).
const std::vector<SimPreset>& simulation_presets();
std::optional<SimPreset> find_preset(const std::string& name);

} // namespace elca
