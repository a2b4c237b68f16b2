#include "elca/dist.hpp"

#include "elca/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace elca {

double logistic(double u) {
    if (u >= 0.0) {
        return 1.0 / (1.0 + std::exp(-u));
    }
    const double e = std::exp(u);
    return e / (1.0 + e);
}

double logistic_deriv(double u) {
    const double p = logistic(u);
    return p * (1.0 - p);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Regularized lower incomplete gamma P(a,x) by its power series.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by Lentz's continued fraction.
double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double chi2_cdf(double x, int df) {
    if (df <= 0) throw InputError("chi2_cdf: df must be positive");
    if (std::isnan(x)) throw InputError("chi2_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double a = 0.5 * df;
    const double t = 0.5 * x;
    if (x < df + 1.0) {
        return gamma_p_series(a, t);
    }
    return 1.0 - gamma_q_contfrac(a, t);
}

double chi2_pdf(double x, int df) {
    if (df <= 0) throw InputError("chi2_pdf: df must be positive");
    if (x < 0.0) return 0.0;
    if (x == 0.0) return df == 2 ? 0.5 : (df < 2 ? std::numeric_limits<double>::infinity() : 0.0);
    const double a = 0.5 * df;
    return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

double chi2_quantile(double p, int df) {
    if (df <= 0) throw InputError("chi2_quantile: df must be positive");
    if (!(p >= 0.0 && p < 1.0)) throw InputError("chi2_quantile: p must lie in [0,1)");
    if (p == 0.0) return 0.0;

    double lo = 0.0;
    double hi = df + 8.0;
    while (chi2_cdf(hi, df) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericError("chi2_quantile: bracket expansion failed");
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = chi2_cdf(x, df) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double dens = chi2_pdf(x, df);
        double next = x;
        if (dens > 0.0) next = x - f / dens;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 1e-10 * (1.0 + std::fabs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

double noncentral_chi2_cdf(double x, int df, double ncp) {
    if (df <= 0) throw InputError("noncentral_chi2_cdf: df must be positive");
    if (ncp < 0.0) throw InputError("noncentral_chi2_cdf: ncp must be nonnegative");
    if (x <= 0.0) return 0.0;
    if (ncp == 0.0) return chi2_cdf(x, df);

    const double half = 0.5 * ncp;
    double weight = std::exp(-half); // Poisson(half) mass at j=0
    double cum_weight = weight;
    double sum = weight * chi2_cdf(x, df);
    for (int j = 1; j < 100000; ++j) {
        weight *= half / j;
        cum_weight += weight;
        sum += weight * chi2_cdf(x, df + 2 * j);
        // remaining mass bounds the truncation error since each CDF term <= 1
        if (1.0 - cum_weight < 1e-12) return sum;
    }
    throw NumericError("noncentral_chi2_cdf: series did not converge (ncp=" +
                       std::to_string(ncp) + ")");
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("normal_quantile: p must lie in (0,1)");
    double lo = -40.0, hi = 40.0;
    double x = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double f = normal_cdf(x) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double dens = normal_pdf(x);
        double next = x;
        if (dens > 0.0) next = x - f / dens;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 1e-13 * (1.0 + std::fabs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

} // namespace elca
