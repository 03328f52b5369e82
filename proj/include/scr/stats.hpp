#pragma once

#include <vector>

namespace scr {

// Standard normal distribution function, accurate in both tails.
double norm_cdf(double z);

// Upper tail P(Z > z).
double norm_sf(double z);

// Inverse of norm_cdf on (0,1).  Wichura's PPND16 rational approximation,
// relative error below 1e-15 over the full open interval.
double norm_quantile(double p);

double norm_logpdf(double z, double mean, double sd);

// Regularized incomplete gamma P(a,x) = gamma(a,x)/Gamma(a) and its
// complement Q(a,x).  Series for x < a+1, continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// CDF of Gamma(shape, rate) at x.
double gamma_cdf(double x, double shape, double rate);

// CDF of the inverse-gamma distribution with shape a and scale b:
// X ~ IG(a,b)  <=>  1/X ~ Gamma(a, rate=b).
double inv_gamma_cdf(double x, double a, double b);

// log of the Gamma(shape, rate) density.
double gamma_logpdf(double x, double shape, double rate);

// Quantile of a sample by linear interpolation between order statistics:
// q(p) sits at position 1+(n-1)p of the sorted values.
double quantile_type7(std::vector<double> xs, double p);

double median_of(const std::vector<double>& xs);

}  // namespace scr
