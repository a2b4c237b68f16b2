#include "elca/analysis.hpp"

#include "elca/el_core.hpp"
#include "elca/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace elca {

ConstraintSpec AnalysisConfig::adjusted_spec() const {
    ConstraintSpec spec;
    spec.link = link;
    spec.standardize = standardize;
    for (const auto& d : aux) spec.aux_terms.push_back(parse_aux_term(d));
    return spec;
}

namespace {

FitSummary summarize(const std::string& label, const TrialDataset& data,
                     const ConstraintSpec& spec, double level,
                     const std::vector<int>& test_components, std::uint64_t seed) {
    FitSummary s;
    s.label = label;
    const MeleResult fit = seed ? fit_mele(data, spec, std::nullopt, seed)
                                : fit_mele(data, spec);
    s.beta = fit.beta_hat;
    s.converged = fit.converged;
    s.feasible = fit.inner_diag.feasible;
    s.loglik = fit.loglik_at_opt;
    s.outer_iterations = fit.outer_iterations;
    s.inner_iterations = fit.inner_diag.iterations;
    s.separation_warning = fit.separation_warning;
    s.growth_warning = spec.growth_warning(data);
    if (!fit.converged)
        throw NumericError("analysis: '" + label + "' fit did not converge");

    const int q = data.num_arms();
    s.se.resize(q);
    for (int p = 0; p < q; ++p) {
        s.se[p] = std::sqrt(fit.vcov(p, p));
        s.ci.push_back(wald_interval(fit, p, level));
    }

    std::vector<int> fixed;
    for (int comp : test_components) fixed.push_back(comp - 1); // to 0-based
    s.lr = lr_test_profile(data, spec, fixed,
                           Eigen::VectorXd::Zero(static_cast<int>(fixed.size())), fit);
    return s;
}

} // namespace

AnalysisReport run_analysis(const AnalysisConfig& config) {
    const TrialDataset data = load_csv(config.input, config.schema);
    if (!(config.level > 0.0 && config.level < 1.0))
        throw SpecError("analysis: level must lie in (0,1)");

    AnalysisReport report;
    report.n = data.n();
    report.arms = data.num_arms();
    report.link = config.link;
    report.level = config.level;

    std::vector<int> test = config.test_components;
    if (test.empty()) {
        for (int k = 2; k <= data.num_arms(); ++k) test.push_back(k);
    }
    for (int comp : test)
        if (comp < 1 || comp > data.num_arms())
            throw SpecError("analysis: test component " + std::to_string(comp) +
                            " out of range 1.." + std::to_string(data.num_arms()));
    if (static_cast<int>(test.size()) >= data.num_arms())
        throw SpecError("analysis: cannot test every component at once");
    report.test_components = test;

    ConstraintSpec marginal;
    marginal.link = config.link;
    marginal.validate(data); // catches logit-on-continuous before any fitting
    ConstraintSpec adjusted = config.adjusted_spec();
    if (!config.aux.empty()) adjusted.validate(data);

    report.marginal = summarize("marginal", data, marginal, config.level, test, config.seed);
    if (!config.aux.empty())
        report.adjusted =
            summarize("adjusted", data, adjusted, config.level, test, config.seed);
    return report;
}

namespace {

std::string fmt(double v, int prec = 5) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

void fit_text(std::ostream& os, const FitSummary& s, double level) {
    os << s.label << " fit: loglik=" << fmt(s.loglik, 6)
       << "  outer-iterations=" << s.outer_iterations
       << (s.converged ? "" : "  NOT-CONVERGED") << (s.feasible ? "" : "  INFEASIBLE");
    if (s.separation_warning) os << "  SEPARATION-WARNING";
    if (s.growth_warning) os << "  constraint-growth-warning (r^3 >= n)";
    os << "\n";
    os << "  param    estimate      SE           " << fmt(100 * level, 0) << "% CI\n";
    for (int p = 0; p < s.beta.size(); ++p) {
        os << "  b" << (p + 1) << "       " << fmt(s.beta[p]) << "     " << fmt(s.se[p])
           << "      (" << fmt(s.ci[p].first) << ", " << fmt(s.ci[p].second) << ")\n";
    }
    os << "  LR test (tested contrasts = 0): stat=" << fmt(s.lr.statistic, 5)
       << "  df=" << s.lr.df << "  p=" << fmt(s.lr.p_value, 6);
    if (s.lr.null_infeasible) os << "  (null infeasible)";
    os << "\n";
}

nlohmann::ordered_json fit_json(const FitSummary& s) {
    nlohmann::ordered_json j;
    j["label"] = s.label;
    j["estimates"] = std::vector<double>(s.beta.data(), s.beta.data() + s.beta.size());
    j["se"] = std::vector<double>(s.se.data(), s.se.data() + s.se.size());
    auto ci = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : s.ci) ci.push_back({lo, hi});
    j["ci"] = std::move(ci);
    j["lr"] = {{"stat", s.lr.statistic}, {"df", s.lr.df}, {"p", s.lr.p_value},
               {"null_infeasible", s.lr.null_infeasible}};
    j["diagnostics"] = {{"loglik", s.loglik},
                        {"converged", s.converged},
                        {"feasible", s.feasible},
                        {"outer_iterations", s.outer_iterations},
                        {"inner_iterations", s.inner_iterations},
                        {"separation_warning", s.separation_warning},
                        {"growth_warning", s.growth_warning}};
    return j;
}

} // namespace

std::string AnalysisReport::to_text() const {
    std::ostringstream os;
    os << "n=" << n << "  arms=" << arms << "  link="
       << (link == Link::identity ? "identity" : "logit") << "  level=" << level << "\n";
    os << "tested components:";
    for (int c : test_components) os << " b" << c;
    os << "\n\n";
    fit_text(os, marginal, level);
    if (adjusted) {
        os << "\n";
        fit_text(os, *adjusted, level);
    }
    return os.str();
}

std::string AnalysisReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "method,param,estimate,se,ci_lo,ci_hi,lr_stat,lr_df,lr_p\n";
    auto emit = [&](const FitSummary& s) {
        for (int p = 0; p < s.beta.size(); ++p) {
            os << s.label << ',' << (p + 1) << ',' << s.beta[p] << ',' << s.se[p] << ','
               << s.ci[p].first << ',' << s.ci[p].second << ',' << s.lr.statistic << ','
               << s.lr.df << ',' << s.lr.p_value << "\n";
        }
    };
    emit(marginal);
    if (adjusted) emit(*adjusted);
    return os.str();
}

std::string AnalysisReport::to_json_string() const {
    nlohmann::ordered_json analysis;
    analysis["n"] = n;
    analysis["arms"] = arms;
    analysis["link"] = (link == Link::identity) ? "identity" : "logit";
    analysis["level"] = level;
    analysis["tested_components"] = test_components;
    analysis["marginal"] = fit_json(marginal);
    if (adjusted) analysis["adjusted"] = fit_json(*adjusted);
    nlohmann::ordered_json root;
    root["analysis"] = std::move(analysis);
    return root.dump(2);
}

} // namespace elca
