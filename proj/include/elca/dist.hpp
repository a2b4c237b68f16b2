#pragma once

namespace elca {

/// Logistic function exp(u)/(1+exp(u)), evaluated without overflow.
double logistic(double u);

/// Derivative of the logistic function, phi*(1-phi).
double logistic_deriv(double u);

double normal_cdf(double x);

/// Inverse standard normal CDF on (0,1). Bracketed bisection polished by
/// Newton steps; absolute accuracy ~1e-12.
double normal_quantile(double p);

/// Chi-square CDF with integer df, via the regularized lower incomplete
/// gamma function: power series for x < df+1, continued fraction otherwise.
double chi2_cdf(double x, int df);

double chi2_pdf(double x, int df);

/// Inverse chi-square CDF: bracketing bisection polished by Newton, 1e-10.
double chi2_quantile(double p, int df);

/// Noncentral chi-square CDF through the Poisson mixture
///   sum_j e^{-ncp/2} (ncp/2)^j / j! * chi2_cdf(x, df + 2j),
/// truncated once the remaining Poisson tail is below 1e-12.
double noncentral_chi2_cdf(double x, int df, double ncp);

} // namespace elca
