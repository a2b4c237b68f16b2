#pragma once

#include <functional>
#include <vector>

namespace elca {

// Gauss-Hermite rule for the weight e^{-t^2} (physicists' convention).
// Nodes found by Newton iteration on the Hermite recurrence.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermiteRule(int n);
};

/// E[f(X)] for X ~ N(0, sigma^2) under the given rule.
double normal_expectation(const GaussHermiteRule& rule,
                          const std::function<double(double)>& f, double sigma);

/// E[f(X1, X2)] for independent X1 ~ N(0, s1^2), X2 ~ N(0, s2^2)
/// (tensor-product rule).
double normal_expectation2(const GaussHermiteRule& rule,
                           const std::function<double(double, double)>& f,
                           double s1, double s2);

} // namespace elca
