#include "elca/quadrature.hpp"

#include "elca/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace elca {

GaussHermiteRule::GaussHermiteRule(int n) : nodes(n), weights(n) {
    if (n < 1) throw InputError("GaussHermiteRule: need at least one node");
    // Golub-Welsch: eigendecompose the Jacobi matrix of the Hermite
    // recurrence (off-diagonal sqrt(j/2)); nodes are the eigenvalues and
    // weights are sqrt(pi) times the squared first eigenvector components.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int j = 1; j < n; ++j) {
        const double b = std::sqrt(0.5 * j);
        jacobi(j, j - 1) = b;
        jacobi(j - 1, j) = b;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success)
        throw NumericError("GaussHermiteRule: Jacobi eigendecomposition failed");
    const double mu0 = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        weights[i] = mu0 * v0 * v0;
    }
}

double normal_expectation(const GaussHermiteRule& rule,
                          const std::function<double(double)>& f, double sigma) {
    const double scale = std::sqrt(2.0) * sigma;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(scale * rule.nodes[i]);
    }
    return sum / std::sqrt(M_PI);
}

double normal_expectation2(const GaussHermiteRule& rule,
                           const std::function<double(double, double)>& f,
                           double s1, double s2) {
    const double c1 = std::sqrt(2.0) * s1;
    const double c2 = std::sqrt(2.0) * s2;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            inner += rule.weights[j] * f(c1 * rule.nodes[i], c2 * rule.nodes[j]);
        }
        sum += rule.weights[i] * inner;
    }
    return sum / M_PI;
}

} // namespace elca
