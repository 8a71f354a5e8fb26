#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "resilience/csv_io.hpp"
#include "resilience/data_model.hpp"
#include "resilience/error.hpp"

using namespace resilience;

namespace {

RatioPanel small_panel() {
  return parse_ratio_panel(
      "firm_id,sector,month,ratio_code,value\n"
      "F1,311,2019-01,opmad,1.0\n"
      "F1,311,2019-02,opmad,3.0\n"
      "F1,311,2019-01,quick_ratio,2.0\n"
      "F2,522,2019-01,opmad,5.0\n"
      "F2,522,2019-02,opmad,7.0\n"
      "F2,522,2019-02,quick_ratio,4.0\n");
}

}  // namespace

TEST(FirmId, Validation) {
  EXPECT_NO_THROW(validate(FirmId{"F1", "311"}));
  EXPECT_THROW(validate(FirmId{"", "311"}), Error);
  EXPECT_THROW(validate(FirmId{"F1", "31"}), Error);
  EXPECT_THROW(validate(FirmId{"F1", "3a1"}), Error);
}

TEST(Period, SpanAndDefaults) {
  const Period p = Period::span(PeriodLabel::Before, {2019, 11}, {2020, 2});
  ASSERT_EQ(p.months.size(), 4u);
  EXPECT_TRUE(p.contains({2020, 1}));
  EXPECT_FALSE(p.contains({2020, 3}));
  EXPECT_EQ(Period::before_covid().months.size(), 84u);
  EXPECT_EQ(Period::after_covid().months.size(), 24u);
  EXPECT_THROW(Period::span(PeriodLabel::After, {2020, 2}, {2020, 1}), Error);
}

TEST(TimeAverage, MeanOfPresentMonths) {
  const RatioPanel panel = small_panel();
  const Period p = Period::span(PeriodLabel::Before, {2019, 1}, {2019, 2});
  const CrossSection cs = time_average(panel, p, 0.5);
  const auto opmad = *cs.ratio_index("opmad");
  const auto quick = *cs.ratio_index("quick_ratio");
  EXPECT_DOUBLE_EQ(cs.values(0, opmad), 2.0);
  EXPECT_DOUBLE_EQ(cs.values(1, opmad), 6.0);
  EXPECT_DOUBLE_EQ(cs.values(0, quick), 2.0);
  EXPECT_TRUE(cs.present(0, quick));
}

TEST(TimeAverage, LowCoverageIsMasked) {
  std::vector<YearMonth> grid;
  for (int m = 1; m <= 12; ++m) grid.push_back({2019, m});
  RatioPanel panel({{"F1", "311"}}, {"opmad"}, grid);
  panel.set(0, 0, 3, 1.5);
  const CrossSection cs = time_average(panel, Period::span(PeriodLabel::Before, {2019, 1}, {2019, 12}), 0.5);
  EXPECT_FALSE(cs.present(0, 0));
  EXPECT_EQ(cs.values(0, 0), 0.0);
}

TEST(TimeAverage, DisjointPeriodThrows) {
  const RatioPanel panel = small_panel();
  try {
    time_average(panel, Period::span(PeriodLabel::After, {2021, 1}, {2021, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPeriod);
  }
}

TEST(TimeAverage, MaskedCellsAreNeverRead) {
  RatioPanel panel = small_panel();
  const Period p = Period::span(PeriodLabel::Before, {2019, 1}, {2019, 2});
  const CrossSection clean = time_average(panel, p);
  auto values = panel.raw_values();
  const auto mask = panel.raw_mask();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i] == 0) values[i] = std::numeric_limits<double>::quiet_NaN();
  }
  const CrossSection poisoned = time_average(panel, p);
  for (Eigen::Index i = 0; i < clean.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < clean.values.cols(); ++j) {
      EXPECT_EQ(clean.present(i, j), poisoned.present(i, j));
      if (clean.present(i, j)) {
        EXPECT_EQ(clean.values(i, j), poisoned.values(i, j));
      }
    }
  }
}

TEST(TimeAverage, FiveByThreeMatchesRecomputation) {
  std::vector<YearMonth> grid;
  for (int m = 1; m <= 6; ++m) grid.push_back({2018, m});
  std::vector<FirmId> firms;
  for (int i = 0; i < 5; ++i) firms.push_back({"F" + std::to_string(i), "311"});
  RatioPanel panel(firms, {"a", "b", "c"}, grid);
  for (std::size_t f = 0; f < 5; ++f) {
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t m = 0; m < 6; ++m) {
        if ((f + r + m) % 4 == 0) continue;
        panel.set(f, r, m, std::sin(1.0 + f * 7.0 + r * 3.0 + m) * 10.0);
      }
    }
  }
  const CrossSection cs = time_average(panel, Period::span(PeriodLabel::Before, {2018, 1}, {2018, 6}), 0.5);
  for (std::size_t f = 0; f < 5; ++f) {
    for (std::size_t r = 0; r < 3; ++r) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t m = 0; m < 6; ++m) {
        if ((f + r + m) % 4 == 0) continue;
        sum += std::sin(1.0 + f * 7.0 + r * 3.0 + m) * 10.0;
        ++n;
      }
      ASSERT_TRUE(cs.present(f, r));
      EXPECT_NEAR(cs.values(f, r), sum / n, 1e-12);
    }
  }
}

TEST(CrossSection, SelectReordersAndRejectsUnknown) {
  const CrossSection cs = time_average(small_panel(), Period::span(PeriodLabel::Before, {2019, 1}, {2019, 2}));
  const std::vector<std::string> codes{"quick_ratio", "opmad"};
  const CrossSection sel = cs.select(codes);
  EXPECT_EQ(sel.ratios, codes);
  EXPECT_DOUBLE_EQ(sel.values(1, 1), 6.0);
  const std::vector<std::string> bad{"nope"};
  EXPECT_THROW(cs.select(bad), Error);
}

TEST(ForecastPanel, LookupAndValidation) {
  ForecastPanel fc({{"F1", Date{2020, 3, 31}, 2022, 4.25}, {"F1", Date{2020, 1, 15}, 2020, 3.0}});
  EXPECT_EQ(fc.find("F1", Date{2020, 3, 31}, 2022), 4.25);
  EXPECT_FALSE(fc.find("F1", Date{2020, 3, 31}, 2021).has_value());
  EXPECT_EQ(fc.for_firm("F1").size(), 2u);
  EXPECT_EQ(fc.entries().front().obs_date, (Date{2020, 1, 15}));
  EXPECT_THROW(ForecastPanel({{"F1", Date{2020, 3, 31}, 2019, 1.0}}), Error);
  EXPECT_THROW(ForecastPanel({{"F1", Date{2020, 3, 31}, 2021, 1.0}, {"F1", Date{2020, 3, 31}, 2021, 2.0}}), Error);
}

TEST(KpIndex, Complement) {
  EXPECT_EQ(kp_index(72.0), 28.0);
  EXPECT_EQ(kp_index(0.0), 100.0);
}
