#pragma once

#include "elca/dataset.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace elca {

enum class Link { identity, logit };

// Basis applied inside one auxiliary constraint column. All except
// raw_power act on u = F_n(x), the pooled-sample empirical CDF transform:
//   constant      1
//   fourier_sin   sqrt(2) sin(2 pi j u)
//   fourier_cos   sqrt(2) cos(2 pi j u)
//   legendre      P_j(2u - 1)
//   power         (2u - 1)^j
//   raw_power     x^j
enum class Basis { constant, fourier_sin, fourier_cos, legendre, power, raw_power };

struct AuxTerm {
    int arm = 1;       // indicator contrast 1_{Z=arm} - pi_arm, arm in 1..K
    Basis basis = Basis::constant;
    int index = 1;     // j; ignored for constant
    int covariate = 0; // ignored for constant

    bool operator==(const AuxTerm&) const = default;
};

/// Parses the descriptor grammar `<basis><index>@<arm>[:<covariate>]`
/// with bases {const, fsin, fcos, leg, pow, xpow}; `const` takes no index.
/// Covariates are written `x0`, `x1`, ... (the leading `x` is optional).
AuxTerm parse_aux_term(const std::string& descriptor);

std::string format_aux_term(const AuxTerm& term);

struct ConstraintSpec {
    Link link = Link::identity;
    std::vector<AuxTerm> aux_terms;
    bool standardize = true;

    /// Total constraint count r = (K+1) + |aux_terms|.
    int num_constraints(const TrialDataset& data) const;

    /// True when r^3 >= n; asymptotics are no longer trustworthy but the
    /// spec is still usable.
    bool growth_warning(const TrialDataset& data) const;

    /// Throws SpecError on duplicate terms, bad indices, r > n-1, a logit
    /// link on a non-binary outcome, or covariate bases without covariates.
    void validate(const TrialDataset& data) const;
};

/// Score rows of the marginal model, one q-vector per subject:
///   d_i (y_i - mu_i),  d_i = (1, 1_{z=1}, ..., 1_{z=K}),
/// mu_i the linear (identity) or logistic (logit) mean at beta.
Eigen::MatrixXd marginal_equations(const TrialDataset& data, Link link,
                                   const Eigen::VectorXd& beta);

/// Auxiliary columns (1_{z=arm} - pi_arm) h(x), unstandardized, in
/// spec order. Columns do not depend on beta.
Eigen::MatrixXd auxiliary_equations(const TrialDataset& data, const ConstraintSpec& spec);

// Constraint matrix g = [marginal | auxiliary] evaluated at one beta,
// along with everything needed for derivatives w.r.t. beta. Auxiliary
// columns are scaled to unit root-mean-square when spec.standardize is on;
// scales are kept so multipliers can be mapped back.
class EstimatingFunctionSet {
public:
    EstimatingFunctionSet(const TrialDataset& data, const ConstraintSpec& spec,
                          const Eigen::VectorXd& beta);

    /// Custom auxiliary block (already evaluated, possibly transformed);
    /// no standardization is applied.
    EstimatingFunctionSet(const TrialDataset& data, Link link,
                          Eigen::MatrixXd aux_columns, const Eigen::VectorXd& beta);

    const Eigen::MatrixXd& g() const { return g_; }
    int r() const { return static_cast<int>(g_.cols()); }
    int q() const { return q_; }

    /// Per-subject derivative dg_i / dbeta^T (r x q; only the first q rows
    /// are nonzero).
    Eigen::MatrixXd dg_dbeta(int i) const;

    /// Mean Jacobian D-hat = (1/n) sum_i dg_i/dbeta^T (r x q).
    Eigen::MatrixXd jacobian_mean() const;

    const Eigen::VectorXd& aux_scales() const { return aux_scales_; }
    bool growth_warning() const { return growth_warning_; }

    // Internals used by the likelihood engine: design rows and the link
    // derivative weight at each subject.
    const Eigen::MatrixXd& design() const { return design_; }
    const Eigen::VectorXd& link_weights() const { return link_w_; }

private:
    void fill_marginal(const TrialDataset& data, Link link, const Eigen::VectorXd& beta);

    Eigen::MatrixXd g_;
    Eigen::MatrixXd design_; // n x q indicator design rows
    Eigen::VectorXd link_w_; // n; 1 for identity, phi'(eta_i) for logit
    Eigen::VectorXd aux_scales_;
    int q_ = 0;
    bool growth_warning_ = false;
};

EstimatingFunctionSet assemble(const TrialDataset& data, const ConstraintSpec& spec,
                               const Eigen::VectorXd& beta);

} // namespace elca
