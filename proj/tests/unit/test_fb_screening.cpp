#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "resilience/error.hpp"
#include "resilience/fb_screening.hpp"
#include "test_util.hpp"

using namespace resilience;

namespace {

/// 5 ratios loading 0.9 on one latent, 5 pure-noise ratios.
CrossSection planted_signal_noise(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const int n = 1000;
  Eigen::MatrixXd x(n, 10);
  for (int i = 0; i < n; ++i) {
    const double f = n01(rng);
    for (int j = 0; j < 5; ++j) x(i, j) = 0.9 * f + std::sqrt(1 - 0.81) * n01(rng);
    for (int j = 5; j < 10; ++j) x(i, j) = n01(rng);
  }
  std::vector<std::string> names;
  for (int j = 0; j < 10; ++j) names.push_back((j < 5 ? "sig" : "noise") + std::to_string(j));
  return testutil::make_cross(x, names);
}

ScreeningConfig config_for(const CrossSection& cs) {
  ScreeningConfig cfg;
  for (const auto& r : cs.ratios) cfg.category_map[r] = RatioCategory::Other;
  return cfg;
}

/// Three independent blocks with distinct strengths; the first member of each block is its leader.
CrossSection planted_three_blocks(std::uint64_t seed) {
  const std::vector<std::vector<std::string>> blocks = {
      {"opmad", "roa", "roe", "npm"}, {"pe_op_basic", "bm", "ps"}, {"quick_ratio", "curr_ratio", "cash_ratio"}};
  const std::vector<double> member = {0.9, 0.85, 0.8};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const int n = 2000;
  Eigen::MatrixXd x(n, 10);
  std::vector<std::string> names;
  for (const auto& b : blocks) names.insert(names.end(), b.begin(), b.end());
  for (int i = 0; i < n; ++i) {
    int col = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const double f = n01(rng);
      for (std::size_t k = 0; k < blocks[b].size(); ++k) {
        const double a = k == 0 ? 0.97 : member[b];
        x(i, col++) = a * f + std::sqrt(1 - a * a) * n01(rng);
      }
    }
  }
  return testutil::make_cross(x, names);
}

}  // namespace

TEST(Step1, PlantedSignalSurvives) {
  const CrossSection cs = planted_signal_noise(1);
  ScreeningConfig cfg = config_for(cs);
  cfg.step1_rule = ComponentRule::top_k(1);
  const Step1Result r = screen_step1(cs, cfg);
  ASSERT_EQ(r.survivors.size(), 5u);
  for (const auto& s : r.survivors) EXPECT_EQ(s.code.substr(0, 3), "sig");
  for (std::size_t k = 1; k < r.survivors.size(); ++k) {
    EXPECT_GE(r.survivors[k - 1].max_abs_corr, r.survivors[k].max_abs_corr);
  }
}

TEST(Step1, ZeroThresholdKeepsEverything) {
  const CrossSection cs = planted_signal_noise(2);
  ScreeningConfig cfg = config_for(cs);
  cfg.corr_threshold = 0.0;
  EXPECT_EQ(screen_step1(cs, cfg).survivors.size(), 10u);
}

TEST(Step1, NothingSurvives) {
  std::mt19937_64 rng(4);
  const CrossSection cs = testutil::make_cross(testutil::random_normal(rng, 500, 4), {"a", "b", "c", "d"});
  ScreeningConfig cfg = config_for(cs);
  cfg.corr_threshold = 0.99;
  try {
    screen_step1(cs, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NothingSurvives);
  }
}

TEST(Step2, PicksPlantedLeaders) {
  const CrossSection cs = planted_three_blocks(8);
  const Step2Result r = screen_step2(cs, cs.ratios, ScreeningConfig{});
  EXPECT_EQ(r.triple, (FbTriple{"opmad", "pe_op_basic", "quick_ratio"}));
  ASSERT_EQ(r.components.size(), 3u);
  EXPECT_EQ(r.components[0].category, RatioCategory::Profitability);
  EXPECT_EQ(r.components[1].category, RatioCategory::Valuation);
  EXPECT_EQ(r.components[2].category, RatioCategory::Liquidity);
}

TEST(Step2, MissingLiquidityCategory) {
  const CrossSection cs = planted_three_blocks(9);
  const std::vector<std::string> no_liquidity{"opmad", "roa", "roe", "npm", "pe_op_basic", "bm", "ps"};
  try {
    screen_step2(cs, no_liquidity, ScreeningConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingCategory);
  }
}

TEST(FbLoadings, PerfectlyCorrelatedTriple) {
  std::mt19937_64 rng(10);
  Eigen::MatrixXd x(50, 3);
  const Eigen::MatrixXd f = testutil::random_normal(rng, 50, 1);
  x.col(0) = f;
  x.col(1) = 2.0 * f.array() + 1.0;
  x.col(2) = 0.5 * f;
  const FbLoadings l = fit_fb_loadings(testutil::make_cross(x, {"opmad", "pe_op_basic", "quick_ratio"}),
                                       PeriodLabel::Before);
  const double w = 1.0 / std::sqrt(3.0);
  for (double v : l.weights) EXPECT_NEAR(v, w, 1e-10);
}

TEST(FbLoadings, AntiSignedLiquidity) {
  Eigen::Matrix3d r;
  r << 1, 0.5, -0.4, 0.5, 1, -0.3, -0.4, -0.3, 1;
  const Eigen::LLT<Eigen::Matrix3d> chol(r);
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd x = testutil::random_normal(rng, 3000, 3) * Eigen::Matrix3d(chol.matrixU());
  const FbLoadings l = fit_fb_loadings(testutil::make_cross(x, {"opmad", "pe_op_basic", "quick_ratio"}),
                                       PeriodLabel::Before);
  EXPECT_GT(l.weights[0], 0.0);
  EXPECT_GT(l.weights[1], 0.0);
  EXPECT_LT(l.weights[2], 0.0);
  EXPECT_EQ(l.provenance, LoadingProvenance::Estimated);
}

TEST(FbLoadings, PublishedValues) {
  const FbLoadings before = paper_loadings(PeriodLabel::Before);
  const FbLoadings after = paper_loadings(PeriodLabel::After);
  EXPECT_EQ(before.ratios, (FbTriple{"opmad", "pe_op_basic", "quick_ratio"}));
  EXPECT_NEAR(fb_value(before.weights, {1, 1, 1}), 0.74, 1e-12);
  EXPECT_NEAR(fb_value(after.weights, {1, 1, 1}), 0.41, 1e-12);
  EXPECT_EQ(fb_value(before.weights, {0, 0, 0}), 0.0);
  EXPECT_EQ(fb_value(after.weights, {0, 0, 1}), -0.55);
}

TEST(FbIndex, DeterministicAndMasked) {
  std::vector<YearMonth> grid = testutil::months({2019, 1}, 6);
  std::vector<FirmId> firms;
  for (int i = 0; i < 6; ++i) firms.push_back({"F" + std::to_string(i), "311"});
  RatioPanel panel(firms, {"opmad", "pe_op_basic", "quick_ratio"}, grid);
  for (std::size_t f = 0; f < 6; ++f) {
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t m = 0; m < 6; ++m) panel.set(f, r, m, std::cos(0.3 * f + 1.7 * r + 0.1 * m) + f * 0.1);
    }
  }
  panel.unset(2, 1, 4);
  const Period p = Period::span(PeriodLabel::Before, {2019, 1}, {2019, 6});
  const FbLoadings l = paper_loadings(PeriodLabel::Before);
  const FbSeries a = fb_index(panel, l, p);
  const FbSeries b = fb_index(panel, l, p);
  EXPECT_EQ(a.values, b.values);
  EXPECT_FALSE(a.present(2, 4));
  EXPECT_TRUE(a.present(2, 3));
  // a present firm-month equals the weighted z-score by hand
  const FbStandardization& st = a.standardization.at(0);
  std::array<double, 3> z{};
  for (std::size_t r = 0; r < 3; ++r) z[r] = (panel.value(0, r, 0) - st.means[r]) / st.sds[r];
  EXPECT_NEAR(a.values(0, 0), fb_value(l.weights, z), 1e-12);
}

TEST(FbIndex, UnknownRatio) {
  RatioPanel panel({{"F1", "311"}}, {"opmad"}, testutil::months({2019, 1}, 2));
  panel.set(0, 0, 0, 1.0);
  try {
    fb_index(panel, paper_loadings(PeriodLabel::Before), Period::span(PeriodLabel::Before, {2019, 1}, {2019, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownRatio);
  }
}

TEST(Winsorize, ClampsTails) {
  Eigen::MatrixXd x(5, 1);
  x << 1, 2, 3, 4, 100;
  CrossSection cs = testutil::make_cross(x, {"a"});
  winsorize_columns(cs, 25.0);
  EXPECT_EQ(cs.values(0, 0), 2.0);
  EXPECT_EQ(cs.values(4, 0), 4.0);
}
