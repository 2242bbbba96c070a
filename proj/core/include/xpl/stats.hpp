#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xpl::stats {

/// Pairwise summation in a fixed tree order, so the result depends only on
/// the order of the input and not on how it was produced.
double pairwise_sum(std::span<const double> v);
double mean(std::span<const double> v);
/// Unbiased sample standard deviation; 0 for fewer than two values.
double stddev(std::span<const double> v);

struct MeanCI {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// Normal-approximation confidence interval mean +/- z * s / sqrt(n).
MeanCI mean_ci(std::span<const double> v, double z = kZ95);

/// Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);
/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> ranks(std::span<const double> v);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
/// Ordinary least squares y = slope * x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// One-sided paired t statistic for mean(after - before) > 0.
double paired_t(std::span<const double> before, std::span<const double> after);
/// P(T >= t) for Student's t with df degrees of freedom.
double t_upper_tail(double t, std::size_t df);

}  // namespace xpl::stats
