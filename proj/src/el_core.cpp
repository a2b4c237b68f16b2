#include "elca/el_core.hpp"

#include "elca/dist.hpp"
#include "elca/errors.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace elca {

LogStarValue log_star(double z, double eps) {
    if (z >= eps) {
        return {std::log(z), 1.0 / z, -1.0 / (z * z)};
    }
    const double ie = 1.0 / eps;
    return {std::log(eps) - 1.5 + 2.0 * z * ie - 0.5 * z * z * ie * ie,
            2.0 * ie - z * ie * ie, -ie * ie};
}

namespace {

double objective(const Eigen::MatrixXd& g, const Eigen::VectorXd& lambda, double eps) {
    double sum = 0.0;
    const Eigen::VectorXd zv = (g * lambda).array() + 1.0;
    for (int i = 0; i < zv.size(); ++i) sum += log_star(zv[i], eps).value;
    return sum;
}

} // namespace

ELSolution solve_lambda(const Eigen::MatrixXd& g, const SolveOptions& opts,
                        const Eigen::VectorXd* warm_start) {
    const int n = static_cast<int>(g.rows());
    const int r = static_cast<int>(g.cols());
    if (n == 0 || r == 0) throw InputError("solve_lambda: empty constraint matrix");
    if (r >= n) throw InputError("solve_lambda: need r < n");
    if (!g.allFinite()) throw InputError("solve_lambda: NaN or Inf in constraints");

    const double eps = 1.0 / n;
    const double cap = 1e3 * std::sqrt(static_cast<double>(r)) * n;

    double max_row_norm = 0.0;
    for (int i = 0; i < n; ++i) max_row_norm = std::max(max_row_norm, g.row(i).norm());
    // scaled bound matching the weight identity ||sum p_i g_i|| <= 1e-8 (1+G):
    // the dual gradient is n times that weighted constraint sum
    const double plateau_tol = 0.5e-8 * n * (1.0 + max_row_norm);

    ELSolution sol;
    sol.lambda = Eigen::VectorXd::Zero(r);
    // A warm start below R(0)=0 would forfeit the loglik>=0 guarantee.
    if (warm_start != nullptr && warm_start->size() == r && warm_start->allFinite() &&
        objective(g, *warm_start, eps) >= 0.0) {
        sol.lambda = *warm_start;
    }

    double R = objective(g, sol.lambda, eps);
    Eigen::VectorXd grad(r);
    Eigen::MatrixXd hess(r, r);
    int plateau_steps = 0;

    for (int it = 0; it < opts.max_iter; ++it) {
        sol.iterations = it;
        const Eigen::VectorXd zv = (g * sol.lambda).array() + 1.0;
        grad.setZero();
        hess.setZero();
        for (int i = 0; i < n; ++i) {
            const LogStarValue ls = log_star(zv[i], eps);
            grad.noalias() += ls.d1 * g.row(i).transpose();
            hess.noalias() += ls.d2 * g.row(i).transpose() * g.row(i);
        }
        sol.grad_norm = grad.norm();
        if (sol.grad_norm <= opts.tol) {
            sol.converged = true;
            break;
        }

        // Newton step on the concave dual: solve (-H) d = grad, -H SPD
        Eigen::LLT<Eigen::MatrixXd> llt(-hess);
        Eigen::VectorXd dir;
        if (llt.info() == Eigen::Success) {
            dir = llt.solve(grad);
        } else {
            Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
            dir = ldlt.solve(grad);
            if (ldlt.info() != Eigen::Success || !dir.allFinite()) {
                sol.feasible = false; // unbounded / degenerate Newton direction
                break;
            }
        }

        double t = 1.0;
        double R_new = objective(g, sol.lambda + t * dir, eps);
        while (R_new < R && t > 1e-14) {
            t *= 0.5;
            R_new = objective(g, sol.lambda + t * dir, eps);
        }
        if (!(R_new > R)) {
            // R has hit its floating-point plateau. Inside the quadratic
            // basin (Newton decrement below fp resolution of R) the pure
            // Newton step still contracts the gradient; take it so the
            // weight identities reach machine accuracy.
            if (grad.dot(dir) <= 1e-12 * (1.0 + std::fabs(R)) && plateau_steps < 5) {
                ++plateau_steps;
                sol.lambda += dir;
                R = objective(g, sol.lambda, eps);
                continue;
            }
            sol.converged = sol.grad_norm <= plateau_tol;
            break;
        }
        assert(R_new >= R); // monotone inner convergence
        sol.lambda += t * dir;
        R = R_new;

        if (sol.lambda.norm() > cap) {
            sol.feasible = false; // multiplier diverging: hull violation
            break;
        }
    }

    const Eigen::VectorXd zv = (g * sol.lambda).array() + 1.0;
    if (sol.converged && (zv.array() <= 0.0).any()) sol.feasible = false;
    sol.weights.resize(n);
    for (int i = 0; i < n; ++i) sol.weights[i] = 1.0 / (n * zv[i]);
    sol.loglik = R;
    return sol;
}

ProfileEvaluator::ProfileEvaluator(const TrialDataset& data, const ConstraintSpec& spec)
    : data_(data), link_(spec.link), q_(data.num_arms()) {
    spec.validate(data);
    // assemble once at a throwaway beta: auxiliary columns are beta-free
    const EstimatingFunctionSet set(data, spec, Eigen::VectorXd::Zero(q_));
    aux_ = set.g().rightCols(set.r() - q_);
    growth_warning_ = set.growth_warning();
}

ProfileEvaluator::ProfileEvaluator(const TrialDataset& data, Link link,
                                   Eigen::MatrixXd aux_columns)
    : data_(data), link_(link), aux_(std::move(aux_columns)), q_(data.num_arms()) {
    if (aux_.rows() != data.n())
        throw SpecError("ProfileEvaluator: aux row count differs from n");
    const double r = static_cast<double>(q_ + aux_.cols());
    growth_warning_ = r * r * r >= static_cast<double>(data.n());
}

EstimatingFunctionSet ProfileEvaluator::assemble_at(const Eigen::VectorXd& beta) const {
    return EstimatingFunctionSet(data_, link_, aux_, beta);
}

ELSolution ProfileEvaluator::evaluate(const Eigen::VectorXd& beta) {
    const EstimatingFunctionSet set = assemble_at(beta);
    const Eigen::VectorXd* warm = warm_lambda_ ? &*warm_lambda_ : nullptr;
    ELSolution sol = solve_lambda(set.g(), opts_, warm);
    if (sol.converged && sol.feasible) warm_lambda_ = sol.lambda;
    return sol;
}

Eigen::VectorXd ProfileEvaluator::gradient(const Eigen::VectorXd& beta,
                                           const ELSolution& solution) const {
    if (!solution.converged || !solution.feasible)
        throw ContractError("profile_gradient: requires a converged feasible solution");
    const EstimatingFunctionSet set = assemble_at(beta);
    const Eigen::MatrixXd& g = set.g();
    const Eigen::VectorXd zv = (g * solution.lambda).array() + 1.0;
    const Eigen::VectorXd lam_m = solution.lambda.head(q_);

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(q_);
    for (int i = 0; i < data_.n(); ++i) {
        const double s = set.design().row(i).dot(lam_m);
        grad.noalias() -= (s * set.link_weights()[i] / zv[i]) * set.design().row(i).transpose();
    }
    return grad;
}

ELSolution profile_loglik(const TrialDataset& data, const ConstraintSpec& spec,
                          const Eigen::VectorXd& beta) {
    ProfileEvaluator eval(data, spec);
    return eval.evaluate(beta);
}

Eigen::VectorXd profile_gradient(const TrialDataset& data, const ConstraintSpec& spec,
                                 const Eigen::VectorXd& beta, const ELSolution& solution) {
    const ProfileEvaluator eval(data, spec);
    return eval.gradient(beta, solution);
}

} // namespace elca
