#include "elca/constraints.hpp"

#include "elca/dist.hpp"
#include "elca/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace elca {

namespace {

double legendre(int j, double u) {
    if (j == 0) return 1.0;
    double pm = 1.0, pc = u;
    for (int k = 1; k < j; ++k) {
        const double pn = ((2.0 * k + 1.0) * u * pc - k * pm) / (k + 1.0);
        pm = pc;
        pc = pn;
    }
    return pc;
}

const char* basis_name(Basis b) {
    switch (b) {
        case Basis::constant: return "const";
        case Basis::fourier_sin: return "fsin";
        case Basis::fourier_cos: return "fcos";
        case Basis::legendre: return "leg";
        case Basis::power: return "pow";
        case Basis::raw_power: return "xpow";
    }
    return "?";
}

} // namespace

AuxTerm parse_aux_term(const std::string& descriptor) {
    const auto at = descriptor.find('@');
    if (at == std::string::npos)
        throw SpecError("aux term '" + descriptor + "': missing '@<arm>'");
    std::string head = descriptor.substr(0, at);
    std::string tail = descriptor.substr(at + 1);

    AuxTerm term;
    static const std::vector<std::pair<std::string, Basis>> bases = {
        {"const", Basis::constant}, {"fsin", Basis::fourier_sin},
        {"fcos", Basis::fourier_cos}, {"leg", Basis::legendre},
        {"xpow", Basis::raw_power},  {"pow", Basis::power}};
    bool matched = false;
    for (const auto& [name, basis] : bases) {
        if (head.rfind(name, 0) == 0) {
            term.basis = basis;
            head = head.substr(name.size());
            matched = true;
            break;
        }
    }
    if (!matched)
        throw SpecError("aux term '" + descriptor + "': unknown basis (expected "
                        "const, fsin, fcos, leg, pow or xpow)");

    if (term.basis == Basis::constant) {
        if (!head.empty())
            throw SpecError("aux term '" + descriptor + "': const takes no index");
        term.index = 1;
    } else {
        try {
            std::size_t used = 0;
            term.index = std::stoi(head, &used);
            if (used != head.size() || term.index < 1) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw SpecError("aux term '" + descriptor + "': bad basis index '" + head + "'");
        }
    }

    std::string arm_part = tail;
    std::string cov_part;
    const auto colon = tail.find(':');
    if (colon != std::string::npos) {
        arm_part = tail.substr(0, colon);
        cov_part = tail.substr(colon + 1);
    }
    try {
        std::size_t used = 0;
        term.arm = std::stoi(arm_part, &used);
        if (used != arm_part.size() || term.arm < 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw SpecError("aux term '" + descriptor + "': bad arm '" + arm_part + "'");
    }
    if (term.basis != Basis::constant) {
        if (cov_part.empty())
            throw SpecError("aux term '" + descriptor + "': basis needs ':<covariate>'");
        if (cov_part.front() == 'x') cov_part = cov_part.substr(1);
        try {
            std::size_t used = 0;
            term.covariate = std::stoi(cov_part, &used);
            if (used != cov_part.size() || term.covariate < 0) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw SpecError("aux term '" + descriptor + "': bad covariate '" + cov_part + "'");
        }
    } else if (!cov_part.empty()) {
        throw SpecError("aux term '" + descriptor + "': const takes no covariate");
    }
    return term;
}

std::string format_aux_term(const AuxTerm& term) {
    std::string s = basis_name(term.basis);
    if (term.basis != Basis::constant) s += std::to_string(term.index);
    s += "@" + std::to_string(term.arm);
    if (term.basis != Basis::constant) s += ":x" + std::to_string(term.covariate);
    return s;
}

int ConstraintSpec::num_constraints(const TrialDataset& data) const {
    return data.num_arms() + static_cast<int>(aux_terms.size());
}

bool ConstraintSpec::growth_warning(const TrialDataset& data) const {
    const double r = num_constraints(data);
    return r * r * r >= static_cast<double>(data.n());
}

void ConstraintSpec::validate(const TrialDataset& data) const {
    const int K = data.num_arms() - 1;
    std::set<std::tuple<int, int, int, int>> seen;
    for (const auto& t : aux_terms) {
        if (t.arm < 1 || t.arm > K)
            throw SpecError("aux term " + format_aux_term(t) + ": arm must lie in 1.." +
                            std::to_string(K));
        const bool uses_cov = t.basis != Basis::constant;
        if (uses_cov) {
            if (data.num_covariates() == 0)
                throw SpecError("aux term " + format_aux_term(t) +
                                ": dataset has no covariates");
            if (t.covariate < 0 || t.covariate >= data.num_covariates())
                throw SpecError("aux term " + format_aux_term(t) + ": covariate index out of range");
            if (t.index < 1)
                throw SpecError("aux term " + format_aux_term(t) + ": index must be positive");
        }
        const auto key = std::make_tuple(t.arm, static_cast<int>(t.basis),
                                         uses_cov ? t.index : 0, uses_cov ? t.covariate : 0);
        if (!seen.insert(key).second)
            throw SpecError("duplicate aux term " + format_aux_term(t));
    }
    const int r = num_constraints(data);
    if (r > data.n() - 1)
        throw SpecError("constraint count r=" + std::to_string(r) + " exceeds n-1=" +
                        std::to_string(data.n() - 1));
    if (link == Link::logit && !data.outcome_is_binary())
        throw SpecError("logit link requires outcomes coded exactly {0,1}; "
                        "other encodings are not recoded");
}

Eigen::MatrixXd marginal_equations(const TrialDataset& data, Link link,
                                   const Eigen::VectorXd& beta) {
    const int K = data.num_arms() - 1;
    const int q = K + 1;
    if (beta.size() != q)
        throw SpecError("marginal_equations: beta has length " + std::to_string(beta.size()) +
                        ", expected " + std::to_string(q));
    if (!beta.allFinite()) throw InputError("marginal_equations: non-finite beta");
    if (link == Link::logit && !data.outcome_is_binary())
        throw SpecError("marginal_equations: logit link requires a binary outcome");

    Eigen::MatrixXd m(data.n(), q);
    for (int i = 0; i < data.n(); ++i) {
        const int z = data.arms()[i];
        double eta = beta[0];
        if (z >= 1) eta += beta[z];
        const double mu = (link == Link::identity) ? eta : logistic(eta);
        const double resid = data.outcomes()[i] - mu;
        m(i, 0) = resid;
        for (int k = 1; k <= K; ++k) m(i, k) = (z == k) ? resid : 0.0;
    }
    return m;
}

Eigen::MatrixXd auxiliary_equations(const TrialDataset& data, const ConstraintSpec& spec) {
    spec.validate(data);
    const int n = data.n();
    Eigen::MatrixXd a(n, static_cast<int>(spec.aux_terms.size()));

    // F_n per referenced covariate, computed once on the pooled sample
    std::vector<int> cols;
    for (const auto& t : spec.aux_terms)
        if (t.basis != Basis::constant) cols.push_back(t.covariate);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    std::vector<Eigen::VectorXd> u_by_col(data.num_covariates());
    for (int c : cols) {
        const EmpiricalCdf F = empirical_cdf(data, c);
        Eigen::VectorXd u(n);
        for (int i = 0; i < n; ++i) u[i] = F(data.covariates()(i, c));
        u_by_col[c] = std::move(u);
    }

    const double two_pi = 2.0 * M_PI;
    for (std::size_t j = 0; j < spec.aux_terms.size(); ++j) {
        const AuxTerm& t = spec.aux_terms[j];
        const double pik = data.allocation()[t.arm];
        for (int i = 0; i < n; ++i) {
            const double ind = (data.arms()[i] == t.arm) ? 1.0 : 0.0;
            double h = 1.0;
            switch (t.basis) {
                case Basis::constant:
                    h = 1.0;
                    break;
                case Basis::fourier_sin:
                    h = std::sqrt(2.0) * std::sin(two_pi * t.index * u_by_col[t.covariate][i]);
                    break;
                case Basis::fourier_cos:
                    h = std::sqrt(2.0) * std::cos(two_pi * t.index * u_by_col[t.covariate][i]);
                    break;
                case Basis::legendre:
                    h = legendre(t.index, 2.0 * u_by_col[t.covariate][i] - 1.0);
                    break;
                case Basis::power:
                    h = std::pow(2.0 * u_by_col[t.covariate][i] - 1.0, t.index);
                    break;
                case Basis::raw_power:
                    h = std::pow(data.covariates()(i, t.covariate), t.index);
                    break;
            }
            a(i, static_cast<int>(j)) = (ind - pik) * h;
        }
    }
    return a;
}

void EstimatingFunctionSet::fill_marginal(const TrialDataset& data, Link link,
                                          const Eigen::VectorXd& beta) {
    const int n = data.n();
    const int K = data.num_arms() - 1;
    q_ = K + 1;
    design_.resize(n, q_);
    link_w_.resize(n);
    for (int i = 0; i < n; ++i) {
        const int z = data.arms()[i];
        design_(i, 0) = 1.0;
        for (int k = 1; k <= K; ++k) design_(i, k) = (z == k) ? 1.0 : 0.0;
        double eta = beta[0];
        if (z >= 1) eta += beta[z];
        const double mu = (link == Link::identity) ? eta : logistic(eta);
        link_w_[i] = (link == Link::identity) ? 1.0 : logistic_deriv(eta);
        const double resid = data.outcomes()[i] - mu;
        for (int k = 0; k < q_; ++k) g_(i, k) = design_(i, k) * resid;
    }
}

EstimatingFunctionSet::EstimatingFunctionSet(const TrialDataset& data,
                                             const ConstraintSpec& spec,
                                             const Eigen::VectorXd& beta) {
    spec.validate(data);
    if (beta.size() != data.num_arms())
        throw SpecError("assemble: beta length must equal K+1");
    if (!beta.allFinite()) throw InputError("assemble: non-finite beta");

    const int n = data.n();
    const int q = data.num_arms();
    const int r = spec.num_constraints(data);
    g_.resize(n, r);
    fill_marginal(data, spec.link, beta);

    Eigen::MatrixXd aux = auxiliary_equations(data, spec);
    aux_scales_ = Eigen::VectorXd::Ones(aux.cols());
    for (int j = 0; j < aux.cols(); ++j) {
        const double rms = std::sqrt(aux.col(j).squaredNorm() / n);
        if (rms == 0.0)
            throw SpecError("aux term " + format_aux_term(spec.aux_terms[j]) +
                            " evaluates to an identically zero column");
        if (spec.standardize) {
            aux.col(j) /= rms;
            aux_scales_[j] = rms;
        }
    }
    g_.rightCols(r - q) = aux;
    growth_warning_ = spec.growth_warning(data);
}

EstimatingFunctionSet::EstimatingFunctionSet(const TrialDataset& data, Link link,
                                             Eigen::MatrixXd aux_columns,
                                             const Eigen::VectorXd& beta) {
    if (beta.size() != data.num_arms())
        throw SpecError("EstimatingFunctionSet: beta length must equal K+1");
    if (aux_columns.rows() != data.n())
        throw SpecError("EstimatingFunctionSet: aux row count differs from n");
    if (link == Link::logit && !data.outcome_is_binary())
        throw SpecError("EstimatingFunctionSet: logit link requires a binary outcome");
    const int n = data.n();
    const int q = data.num_arms();
    g_.resize(n, q + static_cast<int>(aux_columns.cols()));
    fill_marginal(data, link, beta);
    g_.rightCols(aux_columns.cols()) = aux_columns;
    aux_scales_ = Eigen::VectorXd::Ones(aux_columns.cols());
    const double r = static_cast<double>(g_.cols());
    growth_warning_ = r * r * r >= static_cast<double>(n);
}

Eigen::MatrixXd EstimatingFunctionSet::dg_dbeta(int i) const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(r(), q_);
    d.topRows(q_) = -link_w_[i] * design_.row(i).transpose() * design_.row(i);
    return d;
}

Eigen::MatrixXd EstimatingFunctionSet::jacobian_mean() const {
    const int n = static_cast<int>(g_.rows());
    Eigen::MatrixXd top = Eigen::MatrixXd::Zero(q_, q_);
    for (int i = 0; i < n; ++i)
        top.noalias() -= link_w_[i] * design_.row(i).transpose() * design_.row(i);
    top /= static_cast<double>(n);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(r(), q_);
    d.topRows(q_) = top;
    return d;
}

EstimatingFunctionSet assemble(const TrialDataset& data, const ConstraintSpec& spec,
                               const Eigen::VectorXd& beta) {
    return EstimatingFunctionSet(data, spec, beta);
}

} // namespace elca
