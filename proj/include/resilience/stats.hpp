#pragma once

#include <span>
#include <vector>

namespace resilience::stats {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> x);
double sample_variance(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);

/// Percentile p in [0, 100] by linear interpolation between closest ranks
/// (h = (n - 1) p / 100). Input need not be sorted.
double percentile(std::span<const double> x, double p);

/// Two-sided p-value of a Student-t statistic.
double student_t_two_sided_p(double t, double dof);

/// Two-sided p-value of a Pearson correlation r from n pairs (t = r sqrt(n-2) / sqrt(1-r^2)).
double correlation_p_value(double r, std::size_t n);

/// min, 1st quartile, median, mean, 3rd quartile, max, sample sd.
struct Summary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double sd = 0.0;
};

Summary summarize(std::span<const double> x);

}  // namespace resilience::stats
