#include "elca/simulate.hpp"

#include "elca/dist.hpp"
#include "elca/errors.hpp"
#include "elca/inference.hpp"
#include "elca/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

namespace elca {

void Scenario::validate() const {
    if (sigma.empty() || sigma.size() != slopes.size() || sigma.size() != quadratic.size())
        throw SpecError("Scenario: sigma/slopes/quadratic must have one entry per covariate");
    for (double s : sigma)
        if (!(s > 0.0)) throw SpecError("Scenario: sigma must be positive");
    if (n < 4) throw SpecError("Scenario: need n >= 4");
    if (!(pi[0] > 0.0 && pi[0] < 1.0 && pi[1] > 0.0 && pi[1] < 1.0) ||
        std::fabs(pi[0] + pi[1] - 1.0) > 1e-12)
        throw SpecError("Scenario: allocation must be a two-arm probability vector");
    const std::size_t expected = (id == ScenarioKind::two_covariates) ? 2 : 1;
    if (sigma.size() != expected)
        throw SpecError("Scenario: covariate count does not match scenario kind");
}

TrialDataset generate(const Scenario& scenario, CounterRng& rng) {
    scenario.validate();
    const int n = scenario.n;
    const int d = scenario.num_covariates();
    Eigen::VectorXd y(n);
    Eigen::VectorXi z(n);
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
        const int zi = rng.bernoulli(scenario.pi[1]) ? 1 : 0;
        double eta = scenario.intercepts[zi];
        for (int c = 0; c < d; ++c) {
            const double xc = scenario.sigma[c] * rng.normal();
            x(i, c) = xc;
            const double t = scenario.quadratic[c] ? xc * xc : xc;
            eta += scenario.slopes[c][zi] * t;
        }
        z[i] = zi;
        y[i] = rng.bernoulli(logistic(eta)) ? 1.0 : 0.0;
    }
    return TrialDataset(std::move(y), std::move(z), std::move(x),
                        Eigen::Vector2d(scenario.pi));
}

TrialDataset generate(const Scenario& scenario, std::uint64_t rng_seed) {
    CounterRng rng(rng_seed);
    return generate(scenario, rng);
}

namespace {

Eigen::Vector2d true_beta_at(const Scenario& s, const GaussHermiteRule& rule) {
    Eigen::Vector2d p;
    for (int arm = 0; arm < 2; ++arm) {
        double val;
        if (s.num_covariates() == 1) {
            val = normal_expectation(
                rule,
                [&](double x) {
                    const double t = s.quadratic[0] ? x * x : x;
                    return logistic(s.intercepts[arm] + s.slopes[0][arm] * t);
                },
                s.sigma[0]);
        } else {
            val = normal_expectation2(
                rule,
                [&](double x1, double x2) {
                    const double t1 = s.quadratic[0] ? x1 * x1 : x1;
                    const double t2 = s.quadratic[1] ? x2 * x2 : x2;
                    return logistic(s.intercepts[arm] + s.slopes[0][arm] * t1 +
                                    s.slopes[1][arm] * t2);
                },
                s.sigma[0], s.sigma[1]);
        }
        p[arm] = val;
    }
    const double l0 = std::log(p[0] / (1.0 - p[0]));
    const double l1 = std::log(p[1] / (1.0 - p[1]));
    return {l0, l1 - l0};
}

} // namespace

Eigen::Vector2d true_beta(const Scenario& scenario) {
    scenario.validate();
    int nodes = 64;
    Eigen::Vector2d prev = true_beta_at(scenario, GaussHermiteRule(nodes));
    while (nodes <= 256) {
        const Eigen::Vector2d next = true_beta_at(scenario, GaussHermiteRule(nodes * 2));
        if ((next - prev).cwiseAbs().maxCoeff() <= 1e-6) return next;
        prev = next;
        nodes *= 2;
    }
    throw NumericError("true_beta: quadrature did not stabilize to 1e-6 by 512 nodes");
}

namespace {

struct MethodRep {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    std::vector<bool> covered;
    Eigen::VectorXd ci_len;
    bool lr_cov_accept = false;
    bool lr_power_reject = false;
};

struct RepResult {
    bool failed = false;
    std::vector<MethodRep> methods;
};

RepResult run_one_rep(const Scenario& scenario, const std::vector<MethodSpec>& methods,
                      std::uint64_t seed, int rep, double level,
                      const Eigen::Vector2d& truth) {
    RepResult out;
    CounterRng rng = CounterRng::for_replication(seed, static_cast<std::uint64_t>(rep));
    const TrialDataset data = generate(scenario, rng);
    const double alpha = 1.0 - level;
    const int q = data.num_arms();

    for (const auto& method : methods) {
        MethodRep m;
        try {
            const MeleResult fit = fit_mele(data, method.spec);
            if (!fit.converged) throw NumericError("fit did not converge");
            m.beta = fit.beta_hat;
            m.se.resize(q);
            m.ci_len.resize(q);
            m.covered.resize(q);
            for (int p = 0; p < q; ++p) {
                m.se[p] = std::sqrt(fit.vcov(p, p));
                const auto [lo, hi] = wald_interval(fit, p, level);
                m.ci_len[p] = hi - lo;
                m.covered[p] = (lo <= truth[p] && truth[p] <= hi);
            }
            const TestResult at_null = lr_test_profile(data, method.spec, {1},
                                                       Eigen::VectorXd::Zero(1), fit);
            m.lr_power_reject = at_null.p_value <= alpha;
            Eigen::VectorXd b2(1);
            b2[0] = truth[1];
            const TestResult at_truth = lr_test_profile(data, method.spec, {1}, b2, fit);
            m.lr_cov_accept = at_truth.p_value > alpha;
        } catch (const NumericError&) {
            out.failed = true;
            break;
        }
        out.methods.push_back(std::move(m));
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace

SimulationReport run_experiment(const Scenario& scenario,
                                const std::vector<MethodSpec>& methods,
                                const SimulationOptions& opts) {
    scenario.validate();
    if (methods.empty()) throw SpecError("run_experiment: no methods given");
    if (opts.reps < 1) throw SpecError("run_experiment: reps must be >= 1");
    if (!(opts.level > 0.0 && opts.level < 1.0))
        throw SpecError("run_experiment: level must lie in (0,1)");

    const Eigen::Vector2d truth = true_beta(scenario);
    const int reps = opts.reps;
    std::vector<RepResult> results(reps);

    const int workers = std::max(1, std::min(opts.workers, reps));
    if (workers == 1) {
        for (int rep = 0; rep < reps; ++rep)
            results[rep] = run_one_rep(scenario, methods, opts.seed, rep, opts.level, truth);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const int chunk = (reps + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    const int lo = w * chunk;
                    const int hi = std::min(reps, lo + chunk);
                    for (int rep = lo; rep < hi; ++rep)
                        results[rep] =
                            run_one_rep(scenario, methods, opts.seed, rep, opts.level, truth);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    SimulationReport report;
    report.power_mode = false;
    report.seed = opts.seed;
    report.reps = reps;
    report.level = opts.level;

    // pairwise exclusion: keep a replication only when every method succeeded
    std::vector<const RepResult*> kept;
    kept.reserve(reps);
    for (const auto& r : results) {
        if (r.failed) {
            ++report.failures;
        } else {
            kept.push_back(&r);
        }
    }

    const int q = 2;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        for (int p = 0; p < q; ++p) {
            std::vector<double> betas, ses, lens;
            double covered = 0.0;
            for (const RepResult* r : kept) {
                const MethodRep& m = r->methods[mi];
                betas.push_back(m.beta[p]);
                ses.push_back(m.se[p]);
                lens.push_back(m.ci_len[p]);
                covered += m.covered[p] ? 1.0 : 0.0;
            }
            SimulationReport::EstimateRow row;
            row.method = methods[mi].label;
            row.param = p;
            row.true_value = truth[p];
            row.mc_bias = kept.empty() ? 0.0 : mean_of(betas) - truth[p];
            row.mean_sandwich_se = mean_of(ses);
            row.mc_std = sd_of(betas);
            row.cov_prob = kept.empty() ? 0.0 : covered / static_cast<double>(kept.size());
            row.avg_ci_length = mean_of(lens);
            report.estimate_rows.push_back(std::move(row));
        }
        SimulationReport::TestRow trow;
        trow.method = methods[mi].label;
        trow.beta10 = truth[0];
        trow.beta20 = truth[1];
        double acc = 0.0, rej = 0.0;
        for (const RepResult* r : kept) {
            acc += r->methods[mi].lr_cov_accept ? 1.0 : 0.0;
            rej += r->methods[mi].lr_power_reject ? 1.0 : 0.0;
        }
        trow.cov_prob = kept.empty() ? 0.0 : acc / static_cast<double>(kept.size());
        trow.power = kept.empty() ? 0.0 : rej / static_cast<double>(kept.size());
        report.test_rows.push_back(std::move(trow));
    }
    return report;
}

namespace {

std::string fmt(double v, int width = 10, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%*.*f", width, prec, v);
    return buf;
}

} // namespace

std::string SimulationReport::to_text() const {
    std::ostringstream os;
    os << "scenario: " << scenario_label << "  reps=" << reps << "  seed=" << seed
       << "  level=" << level << "  failed-replications=" << failures << "\n\n";
    os << "estimates (Wald intervals at the stated level)\n";
    os << "  method        param   true      MC bias   mean-sw-SE  MC std    CovProb   avlen\n";
    for (const auto& r : estimate_rows) {
        char method[32];
        std::snprintf(method, sizeof(method), "%-12s", r.method.c_str());
        os << "  " << method << "  b" << (r.param + 1) << "  " << fmt(r.true_value, 8)
           << "  " << fmt(r.mc_bias, 8) << "  " << fmt(r.mean_sandwich_se, 9) << "  "
           << fmt(r.mc_std, 8) << "  " << fmt(r.cov_prob, 7) << "  "
           << fmt(r.avg_ci_length, 7) << "\n";
    }
    os << "\nprofile LR tests of the treatment contrast (b2)\n";
    os << "  method        beta10    beta20    CovProb   Power\n";
    for (const auto& r : test_rows) {
        char method[32];
        std::snprintf(method, sizeof(method), "%-12s", r.method.c_str());
        os << "  " << method << "  " << fmt(r.beta10, 8) << "  " << fmt(r.beta20, 8) << "  "
           << fmt(r.cov_prob, 7) << "  " << fmt(r.power, 7) << "\n";
    }
    return os.str();
}

std::string SimulationReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "row_kind,method,param,true_value,mc_bias,mean_sandwich_se,mc_std,"
          "wald_cov_prob,avg_ci_length,beta10,beta20,lr_cov_prob,lr_power\n";
    for (const auto& r : estimate_rows) {
        os << "estimate," << r.method << ',' << (r.param + 1) << ',' << r.true_value << ','
           << r.mc_bias << ',' << r.mean_sandwich_se << ',' << r.mc_std << ',' << r.cov_prob
           << ',' << r.avg_ci_length << ",,,,\n";
    }
    for (const auto& r : test_rows) {
        os << "test," << r.method << ",,,,,,,," << r.beta10 << ',' << r.beta20 << ','
           << r.cov_prob << ',' << r.power << "\n";
    }
    return os.str();
}

std::string SimulationReport::to_json_string() const {
    nlohmann::ordered_json sim;
    sim["scenario"] = scenario_label;
    sim["power_mode"] = power_mode;
    sim["seed"] = seed;
    sim["reps"] = reps;
    sim["failures"] = failures;
    sim["level"] = level;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : estimate_rows) {
        rows.push_back({{"kind", "estimate"},
                        {"method", r.method},
                        {"param", r.param + 1},
                        {"true_value", r.true_value},
                        {"mc_bias", r.mc_bias},
                        {"mean_sandwich_se", r.mean_sandwich_se},
                        {"mc_std", r.mc_std},
                        {"wald_cov_prob", r.cov_prob},
                        {"avg_ci_length", r.avg_ci_length}});
    }
    for (const auto& r : test_rows) {
        rows.push_back({{"kind", "test"},
                        {"method", r.method},
                        {"beta10", r.beta10},
                        {"beta20", r.beta20},
                        {"lr_cov_prob", r.cov_prob},
                        {"lr_power", r.power}});
    }
    sim["rows"] = std::move(rows);
    nlohmann::ordered_json root;
    root["simulation"] = std::move(sim);
    return root.dump(2);
}

namespace {

ConstraintSpec fourier_spec(int covariates) {
    ConstraintSpec spec;
    spec.link = Link::logit;
    spec.aux_terms.push_back(parse_aux_term("const@1"));
    for (int c = 0; c < covariates; ++c) {
        spec.aux_terms.push_back(parse_aux_term("fsin1@1:x" + std::to_string(c)));
        spec.aux_terms.push_back(parse_aux_term("fcos1@1:x" + std::to_string(c)));
    }
    return spec;
}

ConstraintSpec marginal_spec() {
    ConstraintSpec spec;
    spec.link = Link::logit;
    return spec;
}

Scenario one_cov(double sigma, bool quad, double c0, double a0, double c1, double a1) {
    Scenario s;
    s.id = quad ? ScenarioKind::quadratic_x : ScenarioKind::linear_x;
    s.sigma = {sigma};
    s.intercepts = {c0, c1};
    s.slopes = {Eigen::Vector2d(a0, a1)};
    s.quadratic = {quad};
    return s;
}

Scenario two_cov(double s1, double s2, bool q1, bool q2, double c0, double c1,
                 double a10, double a11, double a20, double a21) {
    Scenario s;
    s.id = ScenarioKind::two_covariates;
    s.sigma = {s1, s2};
    s.intercepts = {c0, c1};
    s.slopes = {Eigen::Vector2d(a10, a11), Eigen::Vector2d(a20, a21)};
    s.quadratic = {q1, q2};
    return s;
}

std::vector<SimPreset> build_presets() {
    std::vector<SimPreset> out;
    const std::vector<MethodSpec> m5 = {{"marginal", marginal_spec()},
                                        {"5 Fourier", fourier_spec(1)}};
    const std::vector<MethodSpec> m7 = {{"marginal", marginal_spec()},
                                        {"7 Fourier", fourier_spec(2)}};

    auto add = [&](const std::string& name, const std::string& desc, Scenario sc,
                   const std::vector<MethodSpec>& methods, bool power) {
        out.push_back({name, desc, std::move(sc), methods, power});
    };

    // estimation benchmarks: logit linear in X
    add("table1-sd05", "binary outcome, logit linear in X, X~N(0,0.5^2)",
        one_cov(0.5, false, 0.3, 1.0, 1.0, 1.5), m5, false);
    add("table1-sd1", "binary outcome, logit linear in X, X~N(0,1)",
        one_cov(1.0, false, 0.3, 1.0, 1.0, 1.5), m5, false);
    add("table1-sd2", "binary outcome, logit linear in X, X~N(0,2^2)",
        one_cov(2.0, false, 0.3, 1.0, 1.0, 1.5), m5, false);
    // logit quadratic in X
    add("table2-sd05", "binary outcome, logit quadratic in X, X~N(0,0.5^2)",
        one_cov(0.5, true, 0.3, 1.0, 1.0, 1.5), m5, false);
    add("table2-sd1", "binary outcome, logit quadratic in X, X~N(0,1)",
        one_cov(1.0, true, 0.3, 1.0, 1.0, 1.5), m5, false);
    // two covariates
    add("table3-a", "two covariates, logit linear in both, X1~N(0,1), X2~N(0,2^2)",
        two_cov(1, 2, false, false, 0.3, 1.0, 1.0, 1.5, 2.0, 1.5), m7, false);
    add("table3-b", "two covariates, quadratic in X1, X1~N(0,1), X2~N(0,2^2)",
        two_cov(1, 2, true, false, 0.3, 1.0, 1.0, 1.5, 2.0, 1.5), m7, false);
    add("table3-c", "two covariates, quadratic in both, X1~N(0,0.5^2), X2~N(0,1)",
        two_cov(0.5, 1, true, true, 0.3, 1.0, 1.0, 1.5, 2.0, 1.5), m7, false);

    // power benchmarks under alternatives; intercepts pin the published
    // marginal truth at the slopes below (see README)
    add("table4-sd05", "power, logit linear in X, X~N(0,0.5^2)",
        one_cov(0.5, false, 0.25700159584570037, 2.0, 1.2494882211510243, 2.0), m5, true);
    add("table4-sd1", "power, logit linear in X, X~N(0,1)",
        one_cov(1.0, false, 0.22760283457050762, 2.0, 1.5616490968294947, 2.0), m5, true);
    add("table4-sd2", "power, logit linear in X, X~N(0,2^2)",
        one_cov(2.0, false, 0.10582819403045184, 2.0, 2.320158220853212, 2.0), m5, true);
    add("table5-sd05", "power, logit quadratic in X, X~N(0,0.5^2)",
        one_cov(0.5, true, 0.3, 3.0, 1.7, 1.0), m5, true);
    add("table5-sd1", "power, logit quadratic in X, X~N(0,1)",
        one_cov(1.0, true, 0.3, 1.0, 1.0, 2.0), m5, true);
    add("table6-a", "power, two covariates, linear in both",
        two_cov(1, 2, false, false, 0.2, 1.6, 3.0, 1.0, 1.5, 1.0), m7, true);
    add("table6-b", "power, two covariates, quadratic in X1",
        two_cov(1, 2, true, false, -1.7, -0.05, 3.25, 3.25, 2.75, 1.25), m7, true);
    add("table6-c", "power, two covariates, quadratic in both",
        two_cov(0.5, 1, true, true, 0.6, 0.1, 1.75, 4.0, 0.25, 4.0), m7, true);
    return out;
}

} // namespace

const std::vector<SimPreset>& simulation_presets() {
    static const std::vector<SimPreset> presets = build_presets();
    return presets;
}

std::optional<SimPreset> find_preset(const std::string& name) {
    for (const auto& p : simulation_presets())
        if (p.name == name) return p;
    return std::nullopt;
}

} // namespace elca
