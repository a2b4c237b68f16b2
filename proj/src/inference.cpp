#include "elca/inference.hpp"

#include "elca/dist.hpp"
#include "elca/errors.hpp"
#include "elca/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace elca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGradTol = 1e-6;
constexpr double kStepTol = 1e-9;
constexpr int kMaxOuter = 200;
constexpr double kLogitClip = 10.0;

struct Restriction {
    std::vector<int> free_idx;
    Eigen::VectorXd base; // fixed components filled, free ones overwritten

    Eigen::VectorXd expand(const Eigen::VectorXd& x) const {
        Eigen::VectorXd beta = base;
        for (std::size_t j = 0; j < free_idx.size(); ++j) beta[free_idx[j]] = x[j];
        return beta;
    }
    Eigen::VectorXd reduce(const Eigen::VectorXd& full) const {
        Eigen::VectorXd x(free_idx.size());
        for (std::size_t j = 0; j < free_idx.size(); ++j) x[j] = full[free_idx[j]];
        return x;
    }
};

struct InnerEval {
    double f = kInf;
    ELSolution sol;
};

InnerEval eval_point(ProfileEvaluator& eval, const Restriction& res, const Eigen::VectorXd& x) {
    InnerEval out;
    out.sol = eval.evaluate(res.expand(x));
    if (out.sol.feasible && out.sol.converged) out.f = out.sol.loglik;
    return out;
}

// One golden-section pass over each free coordinate; returns true when the
// objective improved.
bool golden_section_pass(ProfileEvaluator& eval, const Restriction& res, Eigen::VectorXd& x,
                         double& f) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    bool improved = false;
    for (std::size_t j = 0; j < res.free_idx.size(); ++j) {
        const double h = std::max(0.5, 0.1 * std::fabs(x[j]));
        double a = x[j] - h, b = x[j] + h;
        auto fj = [&](double v) {
            Eigen::VectorXd xt = x;
            xt[j] = v;
            return eval_point(eval, res, xt).f;
        };
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = fj(c), fd = fj(d);
        for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
            if (fc < fd) {
                b = d; d = c; fd = fc;
                c = b - gr * (b - a);
                fc = fj(c);
            } else {
                a = c; c = d; fc = fd;
                d = a + gr * (b - a);
                fd = fj(d);
            }
        }
        const double xb = (fc < fd) ? c : d;
        const double fb = std::min(fc, fd);
        if (fb < f - 1e-14) {
            x[j] = xb;
            f = fb;
            improved = true;
        }
    }
    return improved;
}

struct OptimResult {
    Eigen::VectorXd beta;
    double loglik = kInf;
    ELSolution sol;
    int iterations = 0;
    bool converged = false;
    bool feasible_start = false;
};

// Quasi-Newton (BFGS inverse-Hessian) descent over the free coordinates.
// Steps are accepted only when l_E decreases (Armijo backtracking); a stall
// falls back to one coordinate-wise golden-section pass.
OptimResult minimize_profile(ProfileEvaluator& eval, const Restriction& res,
                             const Eigen::VectorXd& init_free,
                             std::uint64_t fallback_seed = 0x51D5EED) {
    OptimResult out;
    const int p = static_cast<int>(res.free_idx.size());
    Eigen::VectorXd x = init_free;

    InnerEval cur = eval_point(eval, res, x);
    if (!std::isfinite(cur.f)) {
        // perturb a few times before giving up; deterministic stream
        CounterRng rng(fallback_seed);
        bool ok = false;
        for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
            Eigen::VectorXd xt = x;
            for (int j = 0; j < p; ++j) xt[j] += 0.5 * rng.normal();
            InnerEval trial = eval_point(eval, res, xt);
            if (std::isfinite(trial.f)) {
                x = xt;
                cur = std::move(trial);
                ok = true;
            }
        }
        if (!ok) {
            out.beta = res.expand(x);
            out.sol = cur.sol;
            return out; // infeasible start; caller decides
        }
    }
    out.feasible_start = true;

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd grad = res.reduce(eval.gradient(res.expand(x), cur.sol));

    int it = 0;
    for (; it < kMaxOuter; ++it) {
        if (grad.norm() <= kGradTol * (1.0 + std::fabs(cur.f))) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd dir = -(H * grad);
        if (dir.dot(grad) >= -1e-12 * dir.norm() * grad.norm()) {
            H.setIdentity();
            dir = -grad;
        }

        const double slope = dir.dot(grad);
        double t = 1.0;
        InnerEval next;
        bool accepted = false;
        while (t > 1e-12) {
            next = eval_point(eval, res, x + t * dir);
            if (next.f <= cur.f + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }

        if (!accepted) {
            double f = cur.f;
            if (golden_section_pass(eval, res, x, f)) {
                cur = eval_point(eval, res, x);
                grad = res.reduce(eval.gradient(res.expand(x), cur.sol));
                H.setIdentity();
                continue;
            }
            break; // no descent available
        }

        const Eigen::VectorXd step = t * dir;
        const Eigen::VectorXd x_new = x + step;
        Eigen::VectorXd grad_new = res.reduce(eval.gradient(res.expand(x_new), next.sol));
        const Eigen::VectorXd yv = grad_new - grad;
        const double ys = yv.dot(step);
        if (ys > 1e-10 * yv.norm() * step.norm()) {
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
            const Eigen::MatrixXd V = I - step * yv.transpose() / ys;
            H = V * H * V.transpose() + step * step.transpose() / ys;
        }
        x = x_new;
        cur = std::move(next);
        grad = std::move(grad_new);
        if (step.norm() < kStepTol) {
            out.converged = grad.norm() <= kGradTol * (1.0 + std::fabs(cur.f));
            break;
        }
    }
    if (!out.converged && it == kMaxOuter)
        out.converged = grad.norm() <= kGradTol * (1.0 + std::fabs(cur.f));

    out.beta = res.expand(x);
    out.loglik = cur.f;
    out.sol = cur.sol;
    out.iterations = it;
    return out;
}

Eigen::VectorXd closed_form_init(const TrialDataset& data, Link link, bool* clipped) {
    const int K = data.num_arms() - 1;
    Eigen::VectorXd beta(K + 1);
    if (clipped) *clipped = false;
    Eigen::VectorXd eta(K + 1);
    for (int k = 0; k <= K; ++k) {
        const double mean = data.arm_mean(k);
        if (link == Link::identity) {
            eta[k] = mean;
        } else {
            // degenerate arms clip the log-odds rather than fail
            double v;
            if (mean <= 0.0 || mean >= 1.0) {
                v = (mean <= 0.0) ? -kLogitClip : kLogitClip;
                if (clipped) *clipped = true;
            } else {
                v = std::log(mean / (1.0 - mean));
                if (std::fabs(v) > kLogitClip) {
                    v = std::copysign(kLogitClip, v);
                    if (clipped) *clipped = true;
                }
            }
            eta[k] = v;
        }
    }
    beta[0] = eta[0];
    for (int k = 1; k <= K; ++k) beta[k] = eta[k] - eta[0];
    return beta;
}

Restriction full_restriction(int q) {
    Restriction res;
    res.base = Eigen::VectorXd::Zero(q);
    res.free_idx.resize(q);
    for (int j = 0; j < q; ++j) res.free_idx[j] = j;
    return res;
}

Eigen::MatrixXd sandwich_vcov(const EstimatingFunctionSet& set) {
    const int n = static_cast<int>(set.g().rows());
    const Eigen::MatrixXd S = set.g().transpose() * set.g() / static_cast<double>(n);
    const Eigen::MatrixXd D = set.jacobian_mean();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("sandwich variance: S_n is not factorizable");
    const Eigen::MatrixXd M = D.transpose() * ldlt.solve(D);
    Eigen::LDLT<Eigen::MatrixXd> minv(M);
    if (minv.info() != Eigen::Success)
        throw NumericError("sandwich variance: D^T S^-1 D is singular");
    Eigen::MatrixXd V =
        minv.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols())) / static_cast<double>(n);
    V = 0.5 * (V + V.transpose()).eval();
    if (!V.allFinite()) throw NumericError("sandwich variance: non-finite result");
    return V;
}

MeleResult finish_fit(ProfileEvaluator& eval, const OptimResult& opt, bool clipped_init) {
    MeleResult fit;
    fit.beta_hat = opt.beta;
    fit.loglik_at_opt = opt.loglik;
    fit.inner_diag = opt.sol;
    fit.outer_iterations = opt.iterations;
    fit.converged = opt.converged;
    if (opt.converged) {
        fit.vcov = sandwich_vcov(eval.assemble_at(opt.beta));
    } else {
        const int q = static_cast<int>(opt.beta.size());
        fit.vcov = Eigen::MatrixXd::Constant(q, q, std::numeric_limits<double>::quiet_NaN());
    }
    if (eval.link() == Link::logit && clipped_init) {
        // separation: the optimum sits on the clip boundary
        double eta0 = fit.beta_hat[0];
        fit.separation_warning = std::fabs(eta0) >= kLogitClip - 1e-6;
        for (int k = 1; k < fit.beta_hat.size(); ++k) {
            if (std::fabs(fit.beta_hat[0] + fit.beta_hat[k]) >= kLogitClip - 1e-6)
                fit.separation_warning = true;
        }
    }
    return fit;
}

} // namespace

MeleResult fit_mele(ProfileEvaluator& eval, const std::optional<Eigen::VectorXd>& init,
                    std::uint64_t fallback_seed) {
    const int q = eval.q();
    bool clipped = false;
    Eigen::VectorXd start =
        init ? *init : closed_form_init(eval.data(), eval.link(), &clipped);
    if (start.size() != q) throw SpecError("fit_mele: init has wrong length");

    const Restriction res = full_restriction(q);
    const OptimResult opt = minimize_profile(eval, res, start, fallback_seed);
    if (!opt.feasible_start) {
        if (clipped)
            throw NumericError("fit_mele: an arm with all-0 or all-1 outcomes separates "
                               "the logit model; the profile is infeasible");
        throw NumericError("fit_mele: empirical likelihood infeasible at the initial "
                           "value and 5 perturbations of it");
    }
    return finish_fit(eval, opt, clipped);
}

MeleResult fit_mele(const TrialDataset& data, const ConstraintSpec& spec,
                    const std::optional<Eigen::VectorXd>& init, std::uint64_t fallback_seed) {
    ProfileEvaluator eval(data, spec);
    return fit_mele(eval, init, fallback_seed);
}

namespace {

TestResult make_lr_result(double loglik_null, const MeleResult& fit, int df, TestKind kind) {
    TestResult out;
    out.kind = kind;
    out.df = df;
    double stat = 2.0 * loglik_null - 2.0 * fit.loglik_at_opt;
    if (stat < 0.0) {
        if (stat < -1e-8)
            throw NumericError("likelihood-ratio statistic " + std::to_string(stat) +
                               " is negative: unrestricted fit not at its optimum");
        stat = 0.0;
    }
    out.statistic = stat;
    out.p_value = 1.0 - chi2_cdf(stat, df);
    return out;
}

TestResult infeasible_null_result(int df, TestKind kind) {
    TestResult out;
    out.kind = kind;
    out.df = df;
    out.statistic = kInf;
    out.p_value = 0.0;
    out.null_infeasible = true;
    return out;
}

MeleResult repolish(const TrialDataset& data, const ConstraintSpec& spec,
                    const MeleResult& fit, const Eigen::VectorXd& alt_start) {
    MeleResult better = fit_mele(data, spec, alt_start);
    return (better.converged && better.loglik_at_opt < fit.loglik_at_opt) ? better : fit;
}

} // namespace

TestResult lr_test_full(const TrialDataset& data, const ConstraintSpec& spec,
                        const Eigen::VectorXd& beta0, const MeleResult& fit) {
    ProfileEvaluator eval(data, spec);
    const ELSolution sol0 = eval.evaluate(beta0);
    const int q = data.num_arms();
    if (!sol0.feasible) return infeasible_null_result(q, TestKind::full_vector);
    if (!sol0.converged)
        throw NumericError("lr_test_full: inner solve did not converge at beta0");
    try {
        return make_lr_result(sol0.loglik, fit, q, TestKind::full_vector);
    } catch (const NumericError&) {
        // l_E(beta0) < l_E(beta_hat): re-polish the unrestricted fit from beta0
        return make_lr_result(sol0.loglik, repolish(data, spec, fit, beta0), q,
                              TestKind::full_vector);
    }
}

TestResult lr_test_full(const TrialDataset& data, const ConstraintSpec& spec,
                        const Eigen::VectorXd& beta0) {
    return lr_test_full(data, spec, beta0, fit_mele(data, spec));
}

RestrictedFit minimize_restricted(ProfileEvaluator& eval, const std::vector<int>& fixed_indices,
                                  const Eigen::VectorXd& fixed_values,
                                  const Eigen::VectorXd& init_full) {
    const int q = eval.q();
    if (fixed_indices.empty())
        throw SpecError("minimize_restricted: no components fixed");
    if (static_cast<int>(fixed_indices.size()) >= q)
        throw SpecError("minimize_restricted: fixed set must be a proper subset of 0..q-1");
    if (fixed_values.size() != static_cast<Eigen::Index>(fixed_indices.size()))
        throw SpecError("minimize_restricted: fixed indices/values length mismatch");
    if (init_full.size() != q)
        throw SpecError("minimize_restricted: init has wrong length");
    std::set<int> fixed(fixed_indices.begin(), fixed_indices.end());
    if (fixed.size() != fixed_indices.size())
        throw SpecError("minimize_restricted: duplicate fixed index");
    for (int idx : fixed_indices)
        if (idx < 0 || idx >= q)
            throw SpecError("minimize_restricted: fixed index out of range");

    Restriction res;
    res.base = Eigen::VectorXd::Zero(q);
    for (std::size_t j = 0; j < fixed_indices.size(); ++j)
        res.base[fixed_indices[j]] = fixed_values[static_cast<Eigen::Index>(j)];
    for (int j = 0; j < q; ++j)
        if (!fixed.count(j)) res.free_idx.push_back(j);

    const OptimResult opt = minimize_profile(eval, res, res.reduce(init_full));
    RestrictedFit out;
    out.beta = opt.beta;
    out.loglik = opt.loglik;
    out.converged = opt.converged;
    out.feasible = opt.feasible_start;
    return out;
}

TestResult lr_test_profile(const TrialDataset& data, const ConstraintSpec& spec,
                           const std::vector<int>& fixed_indices,
                           const Eigen::VectorXd& fixed_values, const MeleResult& fit) {
    ProfileEvaluator eval(data, spec);
    const RestrictedFit restricted =
        minimize_restricted(eval, fixed_indices, fixed_values, fit.beta_hat);
    const int df = static_cast<int>(fixed_indices.size());
    if (!restricted.feasible)
        return infeasible_null_result(df, TestKind::profile_subset);
    if (!restricted.converged)
        throw NumericError("lr_test_profile: restricted optimization did not converge");
    try {
        return make_lr_result(restricted.loglik, fit, df, TestKind::profile_subset);
    } catch (const NumericError&) {
        return make_lr_result(restricted.loglik, repolish(data, spec, fit, restricted.beta),
                              df, TestKind::profile_subset);
    }
}

TestResult lr_test_profile(const TrialDataset& data, const ConstraintSpec& spec,
                           const std::vector<int>& fixed_indices,
                           const Eigen::VectorXd& fixed_values) {
    return lr_test_profile(data, spec, fixed_indices, fixed_values, fit_mele(data, spec));
}

std::pair<double, double> wald_interval(const MeleResult& fit, int index, double level) {
    if (!fit.converged) throw ContractError("wald_interval: fit did not converge");
    if (index < 0 || index >= fit.beta_hat.size())
        throw SpecError("wald_interval: parameter index out of range");
    if (!(level > 0.0 && level < 1.0))
        throw SpecError("wald_interval: level must lie in (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    const double half = z * std::sqrt(fit.vcov(index, index));
    return {fit.beta_hat[index] - half, fit.beta_hat[index] + half};
}

double power_analytic(const Eigen::MatrixXd& A, const Eigen::VectorXd& h, double level,
                      const std::optional<std::vector<int>>& tested,
                      double* noncentrality_out) {
    const int q = static_cast<int>(A.rows());
    if (A.cols() != q || h.size() != q)
        throw SpecError("power_analytic: dimension mismatch");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + A.cwiseAbs().maxCoeff()))
        throw SpecError("power_analytic: A must be symmetric");
    if (Eigen::LLT<Eigen::MatrixXd>(A).info() != Eigen::Success)
        throw NumericError("power_analytic: A is not positive definite");
    if (!(level > 0.0 && level < 1.0))
        throw SpecError("power_analytic: level must lie in (0,1)");

    double ncp;
    int df;
    if (!tested || static_cast<int>(tested->size()) == q) {
        ncp = h.dot(A * h);
        df = q;
    } else {
        const auto& t = *tested;
        if (t.empty()) throw SpecError("power_analytic: empty tested subset");
        std::vector<int> rest;
        std::set<int> tset(t.begin(), t.end());
        if (tset.size() != t.size()) throw SpecError("power_analytic: duplicate tested index");
        for (int j = 0; j < q; ++j)
            if (!tset.count(j)) rest.push_back(j);
        for (int idx : t)
            if (idx < 0 || idx >= q) throw SpecError("power_analytic: tested index out of range");
        const int q1 = static_cast<int>(t.size());
        const int q2 = q - q1;
        Eigen::MatrixXd A11(q1, q1), A12(q1, q2), A22(q2, q2);
        Eigen::VectorXd h1(q1);
        for (int i = 0; i < q1; ++i) {
            h1[i] = h[t[i]];
            for (int j = 0; j < q1; ++j) A11(i, j) = A(t[i], t[j]);
            for (int j = 0; j < q2; ++j) A12(i, j) = A(t[i], rest[j]);
        }
        for (int i = 0; i < q2; ++i)
            for (int j = 0; j < q2; ++j) A22(i, j) = A(rest[i], rest[j]);
        Eigen::LLT<Eigen::MatrixXd> llt(A22);
        if (llt.info() != Eigen::Success)
            throw NumericError("power_analytic: A22 block is singular");
        const Eigen::MatrixXd schur = A11 - A12 * llt.solve(A12.transpose());
        ncp = h1.dot(schur * h1);
        df = q1;
    }
    if (noncentrality_out) *noncentrality_out = ncp;
    const double crit = chi2_quantile(1.0 - level, df);
    return 1.0 - noncentral_chi2_cdf(crit, df, ncp);
}

} // namespace elca
