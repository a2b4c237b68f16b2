#pragma once

#include "elca/constraints.hpp"
#include "elca/dataset.hpp"

#include <Eigen/Dense>

#include <optional>

namespace elca {

struct LogStarValue {
    double value;
    double d1;
    double d2;
};

/// Owen's modified logarithm: log z for z >= eps, and the C^2 quadratic
/// extension log(eps) - 1.5 + 2z/eps - z^2/(2 eps^2) below. Total function.
LogStarValue log_star(double z, double eps);

struct ELSolution {
    Eigen::VectorXd lambda;
    Eigen::VectorXd weights;       // p_i = 1 / (n (1 + lambda^T g_i))
    double loglik = 0.0;           // sum log(1 + lambda^T g_i) >= 0
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
    bool feasible = true;          // zero inside the convex hull, as diagnosed
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 100;
};

/// Inner dual solve: damped Newton ascent of R(lambda) =
/// sum_i log_star(1 + lambda^T g_i, 1/n), with backtracking halving until R
/// does not decrease. Divergence (hull violation) is flagged when the Newton
/// system is singular or ||lambda|| exceeds 1e3 sqrt(r) n.
ELSolution solve_lambda(const Eigen::MatrixXd& g, const SolveOptions& opts = {},
                        const Eigen::VectorXd* warm_start = nullptr);

// Profile objective l_E(beta) for a fixed dataset and constraint recipe.
// Auxiliary columns are assembled once (they do not depend on beta) and the
// previous multiplier warm-starts each inner solve. One evaluator per fit;
// instances are not meant to be shared across threads.
class ProfileEvaluator {
public:
    ProfileEvaluator(const TrialDataset& data, const ConstraintSpec& spec);

    /// Custom auxiliary columns, bypassing the recipe (used to probe linear
    /// transformations of the constraint set).
    ProfileEvaluator(const TrialDataset& data, Link link, Eigen::MatrixXd aux_columns);

    ELSolution evaluate(const Eigen::VectorXd& beta);

    /// Envelope gradient d l_E / d beta at a converged, feasible solution:
    ///   sum_i lambda^T (dg_i/dbeta) / (1 + lambda^T g_i).
    Eigen::VectorXd gradient(const Eigen::VectorXd& beta, const ELSolution& solution) const;

    EstimatingFunctionSet assemble_at(const Eigen::VectorXd& beta) const;

    const TrialDataset& data() const { return data_; }
    Link link() const { return link_; }
    int q() const { return q_; }
    int r() const { return q_ + static_cast<int>(aux_.cols()); }
    bool growth_warning() const { return growth_warning_; }
    const SolveOptions& options() const { return opts_; }

private:
    const TrialDataset& data_;
    Link link_;
    Eigen::MatrixXd aux_;  // n x (r-q), standardized per the spec
    int q_;
    bool growth_warning_ = false;
    SolveOptions opts_{};
    std::optional<Eigen::VectorXd> warm_lambda_;
};

/// One-shot profile likelihood at beta (assemble + inner solve).
ELSolution profile_loglik(const TrialDataset& data, const ConstraintSpec& spec,
                          const Eigen::VectorXd& beta);

/// Envelope gradient for a solution previously obtained at beta.
/// Throws ContractError unless the solution converged and is feasible.
Eigen::VectorXd profile_gradient(const TrialDataset& data, const ConstraintSpec& spec,
                                 const Eigen::VectorXd& beta, const ELSolution& solution);

} // namespace elca
