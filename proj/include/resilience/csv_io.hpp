#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resilience/data_model.hpp"

namespace resilience {

// Plain comma-separated files with a mandatory header row. Fields are never quoted
// and never empty: a missing observation is an absent row.
//
//   ratios.csv        firm_id,sector,month,ratio_code,value
//   affected.csv      firm_id,affected_share
//   forecasts.csv     firm_id,obs_date,fiscal_year,eps
//   fundamentals.csv  firm_id,year,dividends,repurchases,net_income,sales
//   prices.csv        firm_id,month,close

struct RatioLoadOptions {
  /// Known codes; defaults to the full catalog when empty.
  std::vector<std::string> schema;
  /// Reject codes outside the schema with Error(UnknownRatioCode).
  bool strict = true;
};

struct YearWindow {
  int first = 2010;
  int last = 2019;
};

RatioPanel parse_ratio_panel(std::string_view content, const RatioLoadOptions& options = {},
                             std::string_view source = "ratios.csv");
AffectedShareMap parse_affected_shares(std::string_view content, std::string_view source = "affected.csv");
/// EPS_{i,2019} is taken from the latest-observed row with fiscal_year 2019.
ForecastPanel parse_forecasts(std::string_view content, std::string_view source = "forecasts.csv");
Fundamentals parse_fundamentals(std::string_view content, YearWindow years = {},
                                std::string_view source = "fundamentals.csv");
PricePanel parse_prices(std::string_view content, std::string_view source = "prices.csv");

RatioPanel load_ratio_panel(const std::filesystem::path& path, const RatioLoadOptions& options = {});
AffectedShareMap load_affected_shares(const std::filesystem::path& path);
ForecastPanel load_forecasts(const std::filesystem::path& path);
Fundamentals load_fundamentals(const std::filesystem::path& path, YearWindow years = {});
PricePanel load_prices(const std::filesystem::path& path);

std::string format_ratio_panel(const RatioPanel& panel);
std::string format_affected_shares(const AffectedShareMap& shares);
std::string format_forecasts(const ForecastPanel& forecasts);
std::string format_fundamentals(const Fundamentals& fundamentals);
std::string format_prices(const PricePanel& prices);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);
void append_number(std::string& out, double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace resilience
