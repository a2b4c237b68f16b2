#pragma once

#include "elca/constraints.hpp"
#include "elca/dataset.hpp"
#include "elca/el_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace elca {

struct MeleResult {
    Eigen::VectorXd beta_hat;
    Eigen::MatrixXd vcov;      // per-sample scale: (1/n) (D^T S^-1 D)^-1
    double loglik_at_opt = 0.0;
    ELSolution inner_diag;     // inner solution at beta_hat
    int outer_iterations = 0;
    bool converged = false;
    bool separation_warning = false; // logit optimum riding the init clip bound
};

/// Maximum empirical likelihood estimate: safeguarded quasi-Newton descent
/// of l_E(beta) with the envelope gradient, backtracking line search and a
/// coordinate golden-section fallback. Default init comes from closed-form
/// marginal fits (arm means / clipped arm log-odds). `fallback_seed` keys
/// the random perturbations tried when the init is infeasible.
MeleResult fit_mele(const TrialDataset& data, const ConstraintSpec& spec,
                    const std::optional<Eigen::VectorXd>& init = std::nullopt,
                    std::uint64_t fallback_seed = 0x51D5EED);

/// Same optimizer on a prebuilt evaluator (custom auxiliary columns).
MeleResult fit_mele(ProfileEvaluator& eval,
                    const std::optional<Eigen::VectorXd>& init = std::nullopt,
                    std::uint64_t fallback_seed = 0x51D5EED);

// Outcome of optimizing the profile objective with some components pinned.
struct RestrictedFit {
    Eigen::VectorXd beta;
    double loglik = 0.0;
    bool converged = false;
    bool feasible = true;
};

/// Minimizes l_E over the non-fixed components, starting from init_full
/// (fixed entries of init_full are ignored; fixed_values win).
RestrictedFit minimize_restricted(ProfileEvaluator& eval, const std::vector<int>& fixed_indices,
                                  const Eigen::VectorXd& fixed_values,
                                  const Eigen::VectorXd& init_full);

enum class TestKind { full_vector, profile_subset };

struct TestResult {
    double statistic = 0.0;
    int df = 1;
    double p_value = 1.0;
    TestKind kind = TestKind::full_vector;
    std::optional<double> noncentrality_used; // analytic power only
    bool null_infeasible = false; // beta0 incompatible with the data hull
};

/// Likelihood-ratio test of H0: beta = beta0; statistic
/// 2 l_E(beta0) - 2 l_E(beta_hat) against chi^2_q.
TestResult lr_test_full(const TrialDataset& data, const ConstraintSpec& spec,
                        const Eigen::VectorXd& beta0);
TestResult lr_test_full(const TrialDataset& data, const ConstraintSpec& spec,
                        const Eigen::VectorXd& beta0, const MeleResult& fit);

/// Profile LR test fixing the listed components; df = #fixed, remaining
/// components re-optimized.
TestResult lr_test_profile(const TrialDataset& data, const ConstraintSpec& spec,
                           const std::vector<int>& fixed_indices,
                           const Eigen::VectorXd& fixed_values);
TestResult lr_test_profile(const TrialDataset& data, const ConstraintSpec& spec,
                           const std::vector<int>& fixed_indices,
                           const Eigen::VectorXd& fixed_values, const MeleResult& fit);

/// Wald interval beta_hat[i] +- z_{(1+level)/2} sqrt(vcov[i,i]).
std::pair<double, double> wald_interval(const MeleResult& fit, int index, double level);

/// Noncentral chi-square power under a contiguous shift h with information
/// matrix A: full-vector noncentrality h^T A h, or the Schur complement of
/// the tested block when `tested` selects a proper subset of indices.
double power_analytic(const Eigen::MatrixXd& A, const Eigen::VectorXd& h, double level,
                      const std::optional<std::vector<int>>& tested = std::nullopt,
                      double* noncentrality_out = nullptr);

} // namespace elca
