#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resilience/calendar.hpp"
#include "resilience/data_model.hpp"

namespace resilience {

enum class IndexKind { KP, FB, CF };

std::string_view to_string(IndexKind kind) noexcept;

struct GroupAssignment {
  IndexKind kind = IndexKind::KP;
  std::map<std::string, ResilienceLabel> labels;
  /// Cut points as given: raw thresholds for KP, percentiles for FB and CF.
  double low = 0.0;
  double high = 0.0;
  std::string rule;

  std::vector<std::string> members(ResilienceLabel label) const;
};

/// share < low_cut -> High, share > high_cut -> Low, else Medium.
GroupAssignment categorize_kp(const AffectedShareMap& shares, double low_cut = 40.0, double high_cut = 65.0);

/// FB > P_hi -> High, FB < P_lo -> Low, else Medium.
GroupAssignment categorize_fb(const std::map<std::string, double>& fb_average, double lo_pct = 33.0,
                              double hi_pct = 66.0);

/// Wraps categorize_cf: rho < P_lo -> High, rho > P_hi -> Low.
GroupAssignment categorize_cf_groups(std::span<const std::string> firms, std::span<const double> rho,
                                     double lo_pct = 33.0, double hi_pct = 66.0);

/// (1 / (h - 2019)) (E_t EPS_h - EPS_2019) / EPS_2019, using the latest observation on or before t.
double annualized_growth(const ForecastPanel& forecasts, std::string_view firm, Date t, int h);

/// (E_t EPS_h - E_Jan EPS_h) / E_Jan EPS_h; the baseline is the first January observation of year(t).
double revision(const ForecastPanel& forecasts, std::string_view firm, Date t, int h);

struct FirmMonthValue {
  std::string firm;
  YearMonth month;
  double value = 0.0;
};

struct GroupMeanRow {
  YearMonth month;
  double mean_high = std::numeric_limits<double>::quiet_NaN();
  double mean_low = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  /// Sign of (mean_high - mean_low) differs from the previous month where both were present.
  bool crossing = false;
};

std::vector<GroupMeanRow> group_mean_series(std::span<const FirmMonthValue> values, const GroupAssignment& groups);

struct TTest {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
};

/// Welch two-sample t with Welch-Satterthwaite dof. Throws TooFewObservations below 2 per sample.
TTest welch_test(std::span<const double> a, std::span<const double> b);

/// Equal-variance two-sample t with n_a + n_b - 2 dof.
TTest pooled_t(std::span<const double> a, std::span<const double> b);

enum class TestKind { Welch, Pooled };

std::string_view to_string(TestKind kind) noexcept;
TestKind parse_test_kind(std::string_view text);

struct MeanComparison {
  YearMonth month;
  double mean_high = std::numeric_limits<double>::quiet_NaN();
  double mean_low = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  double t_stat = std::numeric_limits<double>::quiet_NaN();
  double dof = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  bool significant = false;
};

/// Per-month High vs Low comparison. Months where a group has fewer than 2 firms carry NaN statistics.
std::vector<MeanComparison> compare_groups(std::span<const FirmMonthValue> values, const GroupAssignment& groups,
                                           TestKind test = TestKind::Welch, double alpha = 0.05);

struct GoodnessPoint {
  IndexKind kind = IndexKind::KP;
  YearMonth month;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  bool significant = false;
};

struct GoodnessCurve {
  std::vector<GoodnessPoint> points;
  /// Fraction of months with a defined p below alpha, per index kind.
  std::map<IndexKind, double> fraction;
};

GoodnessCurve goodness_curve(const std::map<IndexKind, std::vector<MeanComparison>>& comparisons,
                             double alpha = 0.05);

enum class ExpectationMeasure { Growth, Revision };

struct ExpectationRow {
  ResilienceLabel group = ResilienceLabel::High;
  YearMonth month;
  int fiscal_year = 0;
  double mean = 0.0;
  std::size_t n = 0;
};

/// Group means of annualized growth (fiscal years after 2019) or revisions (fiscal years >= the
/// observation year) per month and fiscal year. Each firm contributes its last observation in the month.
/// Firms whose measure is undefined are skipped.
std::vector<ExpectationRow> expectation_series(const ForecastPanel& forecasts, const GroupAssignment& groups,
                                               ExpectationMeasure measure);

}  // namespace resilience
