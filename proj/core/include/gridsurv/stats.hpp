#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gridsurv {

// Median-unbiased sample quantile (Hyndman-Fan type 8): with sorted x of size
// N and h = (N + 1/3) p + 1/3, linear interpolation between x[floor(h)] and
// x[floor(h)+1] (1-based), clamped to the sample range.
double quantile_type8(std::span<const double> sorted, double p);
// Sorts a copy first.
double quantile_type8_unsorted(std::span<const double> x, double p);

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // divisor N - 1

// Lag-1 sample autocorrelation; NaN when the series is constant or shorter
// than 3.
double lag1_autocorrelation(std::span<const double> x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace gridsurv
