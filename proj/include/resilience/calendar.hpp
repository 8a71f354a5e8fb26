#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace resilience {

/// Calendar month stamp. Ordered chronologically.
struct YearMonth {
  int year = 0;
  int month = 1;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  /// Months since year 0; used for grid arithmetic.
  int ordinal() const noexcept { return year * 12 + (month - 1); }
  static YearMonth from_ordinal(int ordinal) noexcept { return {ordinal / 12, ordinal % 12 + 1}; }
  YearMonth next() const noexcept { return from_ordinal(ordinal() + 1); }

  /// Parses "YYYY-MM". Throws Error(MalformedRow) on bad input.
  static YearMonth parse(std::string_view text);
  std::string to_string() const;
};

/// ISO calendar date (YYYY-MM-DD).
struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  YearMonth year_month() const noexcept { return {year, month}; }

  static Date parse(std::string_view text);
  std::string to_string() const;
};

bool is_leap_year(int year) noexcept;
int days_in_month(int year, int month) noexcept;

}  // namespace resilience
