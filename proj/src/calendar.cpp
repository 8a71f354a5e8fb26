#include "resilience/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "resilience/error.hpp"

namespace resilience {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::UnknownRatioCode: return "UnknownRatioCode";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyPeriod: return "EmptyPeriod";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NothingSurvives: return "NothingSurvives";
    case ErrorCode::MissingCategory: return "MissingCategory";
    case ErrorCode::UnknownRatio: return "UnknownRatio";
    case ErrorCode::TooFewFirms: return "TooFewFirms";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::FirmSetMismatch: return "FirmSetMismatch";
    case ErrorCode::NoUsableYears: return "NoUsableYears";
    case ErrorCode::EmptySector: return "EmptySector";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::ZeroBase: return "ZeroBase";
    case ErrorCode::MissingForecast: return "MissingForecast";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ArtifactMismatch: return "ArtifactMismatch";
  }
  return "Unknown";
}

namespace {

int parse_fixed_digits(std::string_view text, std::size_t pos, std::size_t count,
                       std::string_view what) {
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + count;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::MalformedRow, "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

bool is_leap_year(int year) noexcept {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) noexcept {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

YearMonth YearMonth::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') {
    throw Error(ErrorCode::MalformedRow, "month must be YYYY-MM, got '" + std::string(text) + "'");
  }
  YearMonth ym{parse_fixed_digits(text, 0, 4, "year"), parse_fixed_digits(text, 5, 2, "month")};
  if (ym.month < 1 || ym.month > 12) {
    throw Error(ErrorCode::MalformedRow, "month out of range in '" + std::string(text) + "'");
  }
  return ym;
}

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorCode::MalformedRow, "date must be YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  Date d{parse_fixed_digits(text, 0, 4, "year"), parse_fixed_digits(text, 5, 2, "month"),
         parse_fixed_digits(text, 8, 2, "day")};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
    throw Error(ErrorCode::MalformedRow, "invalid date '" + std::string(text) + "'");
  }
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

}  // namespace resilience
