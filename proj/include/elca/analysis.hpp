#pragma once

#include "elca/constraints.hpp"
#include "elca/dataset.hpp"
#include "elca/inference.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace elca {

enum class OutputFormat { text, json, csv };

// Everything one analysis run needs; built from CLI flags or a config file.
struct AnalysisConfig {
    std::string input;
    CsvSchema schema;
    Link link = Link::identity;
    std::vector<std::string> aux;  // adjusted-method term descriptors
    bool standardize = true;
    double level = 0.95;
    std::vector<int> test_components; // 1-based beta indices; default 2..K+1
    OutputFormat format = OutputFormat::text;
    std::string json_path; // optional sidecar
    std::uint64_t seed = 0;

    ConstraintSpec adjusted_spec() const;
};

struct FitSummary {
    std::string label;
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    std::vector<std::pair<double, double>> ci;
    double loglik = 0.0;
    bool converged = false;
    bool feasible = true;
    int outer_iterations = 0;
    int inner_iterations = 0;
    bool separation_warning = false;
    bool growth_warning = false;
    TestResult lr; // profile test: tested components = 0
};

struct AnalysisReport {
    int n = 0;
    int arms = 0;
    Link link = Link::identity;
    double level = 0.95;
    std::vector<int> test_components;
    FitSummary marginal;
    std::optional<FitSummary> adjusted;

    std::string to_text() const;
    std::string to_csv() const;
    std::string to_json_string() const;
};

/// Loads the data, fits the marginal spec and (when aux terms are given)
/// the adjusted spec, and runs the no-treatment-difference profile LR test
/// on each.
AnalysisReport run_analysis(const AnalysisConfig& config);

} // namespace elca
