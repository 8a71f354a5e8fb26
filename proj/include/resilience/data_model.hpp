#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "resilience/calendar.hpp"

namespace resilience {

struct FirmId {
  std::string id;
  std::string sector;  // 3-digit NAICS

  bool operator==(const FirmId&) const = default;
};

/// Throws Error(MalformedRow) if the id is empty or the sector is not three digits.
void validate(const FirmId& firm);

enum class PeriodLabel { Before, After };

std::string_view to_string(PeriodLabel label) noexcept;

struct Period {
  PeriodLabel label = PeriodLabel::Before;
  std::vector<YearMonth> months;  // strictly increasing

  /// Inclusive month range.
  static Period span(PeriodLabel label, YearMonth first, YearMonth last);
  /// Jan 2013 - Dec 2019.
  static Period before_covid();
  /// Jan 2020 - Dec 2021.
  static Period after_covid();

  bool contains(YearMonth ym) const;
};

/// firm x ratio x month cube with a presence mask. Masked cells hold 0 and are never read.
class RatioPanel {
 public:
  RatioPanel() = default;
  RatioPanel(std::vector<FirmId> firms, std::vector<std::string> ratios,
             std::vector<YearMonth> months);

  std::size_t n_firms() const noexcept { return firms_.size(); }
  std::size_t n_ratios() const noexcept { return ratios_.size(); }
  std::size_t n_months() const noexcept { return months_.size(); }

  const std::vector<FirmId>& firms() const noexcept { return firms_; }
  const std::vector<std::string>& ratios() const noexcept { return ratios_; }
  const std::vector<YearMonth>& months() const noexcept { return months_; }

  std::optional<std::size_t> firm_index(std::string_view id) const;
  std::optional<std::size_t> ratio_index(std::string_view code) const;
  std::optional<std::size_t> month_index(YearMonth ym) const;

  bool has(std::size_t firm, std::size_t ratio, std::size_t month) const noexcept {
    return present_[offset(firm, ratio, month)] != 0;
  }
  double value(std::size_t firm, std::size_t ratio, std::size_t month) const noexcept {
    return values_[offset(firm, ratio, month)];
  }
  std::optional<double> get(std::size_t firm, std::size_t ratio, std::size_t month) const noexcept {
    if (!has(firm, ratio, month)) return std::nullopt;
    return value(firm, ratio, month);
  }

  void set(std::size_t firm, std::size_t ratio, std::size_t month, double v) noexcept {
    values_[offset(firm, ratio, month)] = v;
    present_[offset(firm, ratio, month)] = 1;
  }
  void unset(std::size_t firm, std::size_t ratio, std::size_t month) noexcept {
    values_[offset(firm, ratio, month)] = 0.0;
    present_[offset(firm, ratio, month)] = 0;
  }

  /// Raw storage access for tests that poison masked cells.
  std::span<double> raw_values() noexcept { return values_; }
  std::span<const std::uint8_t> raw_mask() const noexcept { return present_; }

  std::size_t present_count() const noexcept;

  std::map<std::string, std::string> sector_map() const;

 private:
  std::size_t offset(std::size_t f, std::size_t r, std::size_t m) const noexcept {
    return (f * ratios_.size() + r) * months_.size() + m;
  }

  std::vector<FirmId> firms_;
  std::vector<std::string> ratios_;
  std::vector<YearMonth> months_;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
  std::unordered_map<std::string, std::size_t> firm_lookup_;
  std::unordered_map<std::string, std::size_t> ratio_lookup_;
};

/// Time-averaged firm x ratio matrix.
struct CrossSection {
  std::vector<FirmId> firms;
  std::vector<std::string> ratios;
  Eigen::MatrixXd values;                                      // masked cells are 0
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> present;  // same shape

  /// Columns in the requested order. Throws Error(UnknownRatio) for codes not present.
  CrossSection select(std::span<const std::string> codes) const;
  std::optional<std::size_t> ratio_index(std::string_view code) const;
};

/// Per firm-ratio mean over the period's unmasked cells. A cell is masked when the
/// share of present months (relative to period months on the panel grid) is below
/// min_coverage. Throws Error(EmptyPeriod) when the period and the grid do not overlap.
CrossSection time_average(const RatioPanel& panel, const Period& period, double min_coverage = 0.5);

struct ForecastEntry {
  std::string firm;
  Date obs_date;
  int fiscal_year = 0;
  double eps = 0.0;
};

/// Consensus EPS forecasts, sorted by (firm, obs_date, fiscal_year).
class ForecastPanel {
 public:
  ForecastPanel() = default;
  /// Validates uniqueness and fiscal_year >= year(obs_date); sorts entries.
  explicit ForecastPanel(std::vector<ForecastEntry> entries,
                         std::map<std::string, double> realized_eps_2019 = {});

  const std::vector<ForecastEntry>& entries() const noexcept { return entries_; }
  const std::map<std::string, double>& realized_eps_2019() const noexcept { return realized_; }

  std::optional<double> find(std::string_view firm, Date obs_date, int fiscal_year) const;
  std::span<const ForecastEntry> for_firm(std::string_view firm) const;
  std::optional<double> realized_2019(std::string_view firm) const;

  void set_realized_2019(std::map<std::string, double> realized) { realized_ = std::move(realized); }

 private:
  std::vector<ForecastEntry> entries_;
  std::map<std::string, double> realized_;
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> ranges_;
};

struct FundamentalsRow {
  std::string firm;
  int year = 0;
  double dividends = 0.0;
  double repurchases = 0.0;
  double net_income = 0.0;
  double sales = 0.0;
};

/// Firm-year fundamentals, sorted by (firm, year).
class Fundamentals {
 public:
  Fundamentals() = default;
  explicit Fundamentals(std::vector<FundamentalsRow> rows);

  const std::vector<FundamentalsRow>& rows() const noexcept { return rows_; }
  std::span<const FundamentalsRow> for_firm(std::string_view firm) const;
  const FundamentalsRow* find(std::string_view firm, int year) const;
  std::vector<std::string> firm_ids() const;

 private:
  std::vector<FundamentalsRow> rows_;
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> ranges_;
};

struct PriceRow {
  std::string firm;
  YearMonth month;
  double close = 0.0;
};

/// Monthly closing prices, sorted by (firm, month). Prices are strictly positive.
class PricePanel {
 public:
  PricePanel() = default;
  explicit PricePanel(std::vector<PriceRow> rows);

  const std::vector<PriceRow>& rows() const noexcept { return rows_; }
  std::optional<double> find(std::string_view firm, YearMonth month) const;

 private:
  std::vector<PriceRow> rows_;
};

enum class ResilienceLabel { High, Medium, Low };

std::string_view to_string(ResilienceLabel label) noexcept;

/// Affected share per firm, in [0, 100].
using AffectedShareMap = std::map<std::string, double>;

/// Workplace resilience index: 100 - affected share.
inline double kp_index(double affected_share) noexcept { return 100.0 - affected_share; }

}  // namespace resilience
