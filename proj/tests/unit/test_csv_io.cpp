#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "resilience/csv_io.hpp"
#include "resilience/error.hpp"

using namespace resilience;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

constexpr const char* kRatioHeader = "firm_id,sector,month,ratio_code,value\n";

}  // namespace

TEST(RatioCsv, SingleRow) {
  const RatioPanel p = parse_ratio_panel(std::string(kRatioHeader) + "F1,311,2019-01,opmad,0.10\n");
  ASSERT_EQ(p.n_firms(), 1u);
  ASSERT_EQ(p.present_count(), 1u);
  EXPECT_EQ(p.get(0, 0, 0), 0.10);
  EXPECT_EQ(p.firms()[0].sector, "311");
}

TEST(RatioCsv, DuplicateCell) {
  EXPECT_EQ(code_of([] {
              parse_ratio_panel(std::string(kRatioHeader) + "F1,311,2019-01,opmad,0.1\nF1,311,2019-01,opmad,0.2\n");
            }),
            ErrorCode::DuplicateCell);
}

TEST(RatioCsv, MaskCount) {
  std::string text = kRatioHeader;
  for (const char* f : {"F1", "F2", "F3"}) {
    for (const char* r : {"opmad", "quick_ratio"}) {
      for (const char* m : {"2019-01", "2019-02"}) {
        if (std::string(f) == "F2" && std::string(r) == "opmad" && std::string(m) == "2019-02") continue;
        text += std::string(f) + ",311," + m + "," + r + ",1.5\n";
      }
    }
  }
  const RatioPanel p = parse_ratio_panel(text);
  EXPECT_EQ(p.n_firms() * p.n_ratios() * p.n_months(), 12u);
  EXPECT_EQ(p.present_count(), 11u);
}

TEST(RatioCsv, Rejections) {
  EXPECT_EQ(code_of([] { parse_ratio_panel(std::string(kRatioHeader) + "F1,311,2019-01,bogus,1\n"); }),
            ErrorCode::UnknownRatioCode);
  EXPECT_EQ(code_of([] { parse_ratio_panel(std::string(kRatioHeader) + "F1,311,2019-01,opmad\n"); }),
            ErrorCode::MalformedRow);
  EXPECT_EQ(code_of([] { parse_ratio_panel(std::string(kRatioHeader) + "F1,311,2019-01,opmad,abc\n"); }),
            ErrorCode::MalformedRow);
  EXPECT_EQ(code_of([] { parse_ratio_panel("wrong,header\n"); }), ErrorCode::MalformedRow);
  EXPECT_EQ(code_of([] {
              parse_ratio_panel(std::string(kRatioHeader) + "F1,311,2019-01,opmad,1\nF1,522,2019-02,opmad,1\n");
            }),
            ErrorCode::MalformedRow);
  RatioLoadOptions lax;
  lax.strict = false;
  EXPECT_NO_THROW(parse_ratio_panel(std::string(kRatioHeader) + "F1,311,2019-01,bogus,1\n", lax));
}

TEST(AffectedCsv, RangeCheck) {
  const auto shares = parse_affected_shares("firm_id,affected_share\nF1,72.0\n");
  EXPECT_EQ(shares.at("F1"), 72.0);
  EXPECT_EQ(code_of([] { parse_affected_shares("firm_id,affected_share\nF1,120\n"); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { parse_affected_shares("firm_id,affected_share\nF1,-1\n"); }), ErrorCode::OutOfRange);
}

TEST(ForecastCsv, EntryAndRealized) {
  const ForecastPanel fc = parse_forecasts(
      "firm_id,obs_date,fiscal_year,eps\n"
      "F1,2020-03-31,2022,4.25\n"
      "F1,2019-02-15,2019,1.0\n"
      "F1,2019-11-15,2019,1.2\n");
  const auto& e = fc.entries();
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(fc.find("F1", Date{2020, 3, 31}, 2022), 4.25);
  EXPECT_EQ(fc.realized_2019("F1"), 1.2);
}

TEST(FundamentalsCsv, WindowEnforced) {
  const std::string header = "firm_id,year,dividends,repurchases,net_income,sales\n";
  const Fundamentals f = parse_fundamentals(header + "F1,2015,1,2,10,100\n");
  ASSERT_NE(f.find("F1", 2015), nullptr);
  EXPECT_EQ(f.find("F1", 2015)->sales, 100.0);
  EXPECT_EQ(code_of([&] { parse_fundamentals(header + "F1,2021,1,2,10,100\n"); }), ErrorCode::OutOfRange);
}

TEST(PriceCsv, PositivePrices) {
  const PricePanel p = parse_prices("firm_id,month,close\nF1,2020-01,10.5\n");
  EXPECT_EQ(p.find("F1", {2020, 1}), 10.5);
  EXPECT_EQ(code_of([] { parse_prices("firm_id,month,close\nF1,2020-01,0\n"); }), ErrorCode::OutOfRange);
}

TEST(CsvRoundTrip, AllFormats) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  std::string text = kRatioHeader;
  for (int f = 0; f < 4; ++f) {
    for (int m = 1; m <= 3; ++m) {
      text += "F" + std::to_string(f) + ",311,2019-0" + std::to_string(m) + ",opmad," + format_number(n01(rng)) + "\n";
    }
  }
  const RatioPanel p = parse_ratio_panel(text);
  EXPECT_EQ(format_ratio_panel(parse_ratio_panel(format_ratio_panel(p))), format_ratio_panel(p));

  const std::string fc_text = "firm_id,obs_date,fiscal_year,eps\nF1,2020-03-31,2022,4.25\nF2,2019-01-15,2019,0.1\n";
  const ForecastPanel fc = parse_forecasts(fc_text);
  EXPECT_EQ(format_forecasts(parse_forecasts(format_forecasts(fc))), format_forecasts(fc));

  const AffectedShareMap shares{{"A", 12.5}, {"B", 99.0}};
  EXPECT_EQ(parse_affected_shares(format_affected_shares(shares)), shares);

  const PricePanel prices({{"F1", {2020, 1}, 3.25}, {"F1", {2020, 2}, 1.0 / 3.0}});
  EXPECT_EQ(parse_prices(format_prices(prices)).find("F1", {2020, 2}), 1.0 / 3.0);

  const Fundamentals fund({{"F1", 2015, 1.0, 2.0, 10.0, 100.0}});
  EXPECT_EQ(format_fundamentals(parse_fundamentals(format_fundamentals(fund))), format_fundamentals(fund));
}

TEST(FormatNumber, ShortestRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
}

TEST(FileIo, MissingFileIsIoFailure) {
  EXPECT_EQ(code_of([] { read_file("/nonexistent/dir/file.csv"); }), ErrorCode::IoFailure);
}
