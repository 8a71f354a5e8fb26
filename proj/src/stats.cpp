#include "resilience/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "resilience/error.hpp"

namespace resilience::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::TooFewObservations, "mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorCode::TooFewObservations, "variance needs at least 2 values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::TooFewObservations, "pearson needs two equal-length samples of size >= 2");
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double percentile(std::span<const double> x, double p) {
  if (x.empty()) throw Error(ErrorCode::TooFewObservations, "percentile of empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw Error(ErrorCode::InvalidArgument, "percentile outside [0, 100]");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double student_t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) return 1.0;
  const double a = std::abs(r);
  if (a >= 1.0) return 0.0;
  const double t = a * std::sqrt(static_cast<double>(n - 2)) / std::sqrt(1.0 - a * a);
  return student_t_two_sided_p(t, static_cast<double>(n - 2));
}

Summary summarize(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::TooFewObservations, "summary of empty sample");
  Summary s;
  s.min = *std::min_element(x.begin(), x.end());
  s.max = *std::max_element(x.begin(), x.end());
  s.q1 = percentile(x, 25.0);
  s.median = percentile(x, 50.0);
  s.q3 = percentile(x, 75.0);
  s.mean = mean(x);
  s.sd = x.size() >= 2 ? sample_sd(x) : 0.0;
  return s;
}

}  // namespace resilience::stats
