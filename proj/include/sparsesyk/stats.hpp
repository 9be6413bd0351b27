// stats.hpp: sample moments, Kolmogorov–Smirnov tests and small regressions

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ssyk::stats {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;        // unbiased
    double standard_error = 0.0;  // of the mean
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::size_t count = 0;
};

Moments moments(std::span<const double> x);

double mean(std::span<const double> x);

struct KsResult {
    double statistic = 0.0;  // sup |F_n - F|
    double p_value = 0.0;
};

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_q(double lambda);

// One-sample test of `samples` against a continuous CDF. Uses the Stephens
// finite-n correction for the p-value.
KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double pearson(std::span<const double> x, std::span<const double> y);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct ProportionalFit {
    double coefficient = 0.0;
    double r_squared = 0.0;  // 1 - SS_res / SS_tot (SS_tot about the mean of y)
};

// Least squares y = c * x with no intercept.
ProportionalFit fit_proportional(std::span<const double> x, std::span<const double> y);

double standard_normal_cdf(double x);

} // namespace ssyk::stats
