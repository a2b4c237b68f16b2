#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace elca {

// One randomized trial sample: outcomes, arm labels 0..K, an optional
// covariate matrix and the (known) allocation probabilities.
// Immutable after construction; safe to share across threads.
class TrialDataset {
public:
    TrialDataset(Eigen::VectorXd y, Eigen::VectorXi z, Eigen::MatrixXd x,
                 Eigen::VectorXd pi);

    const Eigen::VectorXd& outcomes() const { return y_; }
    const Eigen::VectorXi& arms() const { return z_; }
    const Eigen::MatrixXd& covariates() const { return x_; }
    const Eigen::VectorXd& allocation() const { return pi_; }

    int n() const { return static_cast<int>(y_.size()); }
    int num_arms() const { return static_cast<int>(pi_.size()); } // K+1
    int num_covariates() const { return static_cast<int>(x_.cols()); }

    /// True when every outcome is exactly 0 or 1.
    bool outcome_is_binary() const;

    /// Per-arm outcome mean. Throws NumericError on an empty arm.
    double arm_mean(int arm) const;

private:
    Eigen::VectorXd y_;
    Eigen::VectorXi z_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd pi_;
};

// Right-continuous empirical CDF of one covariate column,
// F(t) = #{i : x_i <= t} / n.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> values);

    double operator()(double t) const;
    int size() const { return static_cast<int>(sorted_.size()); }

private:
    std::vector<double> sorted_;
};

EmpiricalCdf empirical_cdf(const TrialDataset& data, int col);

// Column roles for CSV loading. Arm labels may be remapped: when
// `arm_labels` is set, its i-th entry is the raw label coded as arm i.
struct CsvSchema {
    std::string outcome;
    std::string arm;
    std::vector<std::string> covariates;
    std::vector<std::string> arm_labels; // optional
    std::vector<double> pi;              // explicit allocation, or
    bool pi_from_data = false;           // estimate pi_k = n_k / n
};

TrialDataset load_csv(const std::string& path, const CsvSchema& schema);

/// Writes header + rows at full precision; inverse of load_csv up to
/// float round-trip.
void save_csv(const TrialDataset& data, const std::string& path,
              const CsvSchema& schema);

} // namespace elca
