#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace nctails::stats {

double normal_cdf(double x) noexcept;

/// Inverse of the standard normal CDF (Acklam's rational approximation
/// refined by one Halley step).
double normal_quantile(double p);

/// Two-sided z value for the given confidence level, e.g. 0.95 -> 1.95996.
double z_for_confidence(double confidence);

struct Interval {
  double low;
  double high;
};

/// Wilson score interval for `successes` out of `trials`.
Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence = 0.95);

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples`.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

/// sup_x |F_n(x) - G_m(x)| for two empirical CDFs.
double ks_two_sample_distance(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value of the two-sample statistic at significance
/// `alpha`: sqrt(-ln(alpha/2)/2) sqrt((n + m)/(n m)).
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

/// Lower-interpolated order statistic of sorted data at probability p:
/// sorted[floor(p (n - 1))].
double lower_quantile_sorted(std::span<const double> sorted, double p);

/// Distribution-free confidence interval for the p-quantile, from the
/// binomial normal approximation of order-statistic ranks.
Interval quantile_interval_sorted(std::span<const double> sorted, double p, double confidence);

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);

}  // namespace nctails::stats
