#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resilience/calendar.hpp"
#include "resilience/csv_io.hpp"
#include "resilience/data_model.hpp"

namespace resilience {

/// Forecast EPS for the current fiscal year and the two following ones.
using EpsTriple = std::array<double, 3>;

/// b = clamp(mean over years with net_income != 0 of (dividends + repurchases) / net_income, 0, 1).
/// Throws NoUsableYears.
double payout_ratio(const Fundamentals& fundamentals, std::string_view firm, YearWindow window = {});

/// Payout for every firm that has a usable year; firms without one are omitted.
std::map<std::string, double> payout_ratios(const Fundamentals& fundamentals, YearWindow window = {});

enum class GrowthMethod {
  Span,        // ((s_last - s_first) / s_first) / (last - first)
  YearlyMean,  // mean of year-on-year growth rates
};

enum class OutlierRule {
  Percentile,  // keep values inside [P_trim, P_(100 - trim)]
  Mad,         // drop modified z-scores 0.6745 |x - med| / MAD above the cutoff
};

struct GrowthOptions {
  GrowthMethod method = GrowthMethod::Span;
  OutlierRule outliers = OutlierRule::Percentile;
  double trim_pct = 1.0;
  double mad_cutoff = 3.5;
  int first_year = 2015;
  int last_year = 2019;
  /// Sectors with no usable firm are left out instead of raising EmptySector.
  bool skip_empty = false;
};

std::string_view to_string(GrowthMethod method) noexcept;
std::string_view to_string(OutlierRule rule) noexcept;
GrowthMethod parse_growth_method(std::string_view text);
OutlierRule parse_outlier_rule(std::string_view text);

/// Raw per-firm sales growth; absent when the firm lacks the needed years or its base sales are 0.
std::optional<double> raw_growth(const Fundamentals& fundamentals, std::string_view firm,
                                 const GrowthOptions& options = {});

/// Mean of the values that survive the outlier rule. Sectors of fewer than 3 firms are not trimmed.
double robust_sector_mean(std::span<const double> raw, const GrowthOptions& options = {});

struct SectorGrowth {
  std::map<std::string, double> by_sector;
  std::map<std::string, double> by_firm;  // every firm of a covered sector inherits its g
};

/// `sectors` maps firm id to 3-digit NAICS sector.
SectorGrowth sector_growth(const Fundamentals& fundamentals, const std::map<std::string, std::string>& sectors,
                           const GrowthOptions& options = {});

/// Four-term present value with a Gordon continuation on e2.
double pv(double r, double b, double g, const EpsTriple& eps) noexcept;

enum class DrStatus { Solved, NoRoot, NonMonotone, MissingInput };

std::string_view to_string(DrStatus status) noexcept;

struct SolverOptions {
  double epsilon = 1e-6;
  double r_max = 10.0;
  double rel_tol = 1e-10;
  std::size_t monotone_samples = 2000;
};

struct DrSolution {
  DrStatus status = DrStatus::MissingInput;
  double r = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
};

/// Solves pv(r) = price for r in (g + epsilon, r_max] with a Brent bracketed solver.
DrSolution implied_dr(double price, double b, double g, const EpsTriple& eps, const SolverOptions& options = {});

enum class HorizonMap {
  Nearest,   // the three smallest fiscal years >= year(t) present at the observation date
  Calendar,  // exactly year(t), year(t) + 1, year(t) + 2
};

std::string_view to_string(HorizonMap map) noexcept;
HorizonMap parse_horizon_map(std::string_view text);

struct ValuationRecord {
  std::string firm;
  YearMonth month;
  double price = 0.0;
  double payout = std::numeric_limits<double>::quiet_NaN();
  double growth = std::numeric_limits<double>::quiet_NaN();
  EpsTriple eps{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                std::numeric_limits<double>::quiet_NaN()};
  std::array<int, 3> fiscal_years{0, 0, 0};
  double r = std::numeric_limits<double>::quiet_NaN();
  DrStatus status = DrStatus::MissingInput;
};

struct BatchOptions {
  SolverOptions solver;
  HorizonMap horizon = HorizonMap::Nearest;
  unsigned threads = 1;
};

/// One record per price row, sorted by (firm, month). Forecasts come from the latest observation
/// date inside the month. Incomplete inputs and non-positive payouts give MissingInput.
std::vector<ValuationRecord> batch_solve(const PricePanel& prices, const ForecastPanel& forecasts,
                                         const std::map<std::string, double>& payouts,
                                         const std::map<std::string, double>& growths,
                                         const BatchOptions& options = {});

/// dr.csv: firm_id,month,r,status,b,g,e0,e1,e2,price. Absent numbers are empty fields.
std::string format_dr_table(std::span<const ValuationRecord> records);

}  // namespace resilience
