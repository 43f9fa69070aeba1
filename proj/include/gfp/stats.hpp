#pragma once
// Small statistics toolkit shared by the experiment drivers and tests:
// binomial errors, least-squares fits, jackknife, Mann-Kendall trend test.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gfp {

double normal_pdf(double x);
double normal_cdf(double x);            // P[Z <= x]
double normal_tail(double x);           // P[Z >= x], accurate far out
double mills_ratio(double a);           // normal_tail(a) / normal_pdf(a)

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);  // unbiased, n-1

struct Binomial {
    double p_hat = 0.0;
    double se = 0.0;       // sqrt(p(1-p)/n), with a 1/(n+2) floor so 0/n counts
                           // still carry a usable error bar
    long k = 0;
    long n = 0;
};
Binomial binomial_estimate(long k, long n);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
};
// Ordinary least squares; slope_se from residual variance (needs n >= 3).
LinearFit fit_ols(std::span<const double> x, std::span<const double> y);
// Weighted by known per-point variances sigma2; slope_se propagated from them.
LinearFit fit_wls(std::span<const double> x, std::span<const double> y,
                  std::span<const double> sigma2);

struct MannKendall {
    int s = 0;             // sum of signs over pairs
    double z = 0.0;        // normal approximation with tie correction
    double p_increasing = 0.0;  // one-sided p-value against "no trend"
};
MannKendall mann_kendall(std::span<const double> v);

// Delete-one jackknife standard error of an arbitrary statistic.  `replicate`
// receives the index to leave out and returns the statistic on the rest.
double jackknife_se(std::size_t n, const std::function<double(std::size_t)>& replicate);

double log_sum_exp(double a, double b);

} // namespace gfp
