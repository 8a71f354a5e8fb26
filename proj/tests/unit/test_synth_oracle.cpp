#include <cmath>

#include <gtest/gtest.h>

#include "resilience/error.hpp"
#include "resilience/fb_screening.hpp"
#include "resilience/stats.hpp"
#include "resilience/synth_oracle.hpp"
#include "resilience/valuation.hpp"

using namespace resilience;

TEST(TargetCorrelation, FirstPcHasTargetCorrelations) {
  for (const auto& targets : {synth::kBeforeTargets, synth::kAfterTargets}) {
    const Eigen::Matrix3d r = synth::target_correlation(targets);
    EXPECT_LT((r.diagonal() - Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff(), 1e-12);
    const auto oracle = synth::oracle_eigen(Eigen::MatrixXd(r));
    EXPECT_GE(oracle.values.back(), -1e-12);
    const Eigen::Map<const Eigen::Vector3d> v(oracle.vectors[0].data());
    const double sign = v(0) >= 0 ? 1.0 : -1.0;
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(sign * v(j) * std::sqrt(oracle.values[0]), targets[j], 1e-10);
  }
}

TEST(TargetCorrelation, InfeasibleTargetsThrow) {
  for (const synth::CorrTriple& bad : {synth::CorrTriple{1.2, 0.1, 0.1}, synth::CorrTriple{0.3, 0.3, 0.3}}) {
    try {
      synth::target_correlation(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NotPsd);
    }
  }
}

TEST(GenPanel, ZeroNoiseOneFactorIsPerfectlyCorrelated) {
  synth::SynthSpec spec;
  spec.n_firms = 50;
  spec.n_months = 3;
  spec.monthly_noise = 0.0;
  spec.blocks = {{RatioCategory::Efficiency, 4, 1.0}};
  const auto g = synth::gen_panel(spec);
  ASSERT_EQ(g.panel.n_ratios(), 4u);
  std::vector<double> first;
  for (std::size_t f = 0; f < 50; ++f) first.push_back(g.panel.value(f, 0, 0));
  for (std::size_t r = 1; r < 4; ++r) {
    std::vector<double> col;
    for (std::size_t f = 0; f < 50; ++f) col.push_back(g.panel.value(f, r, 0));
    EXPECT_NEAR(std::abs(stats::pearson(first, col)), 1.0, 1e-12);
  }
}

TEST(GenPanel, SameSeedSamePanel) {
  synth::SynthSpec spec;
  spec.n_firms = 30;
  spec.n_months = 14;
  spec.missing_share = 0.05;
  const auto a = synth::gen_panel(spec);
  const auto b = synth::gen_panel(spec);
  spec.seed += 1;
  const auto c = synth::gen_panel(spec);
  EXPECT_EQ(format_ratio_panel(a.panel), format_ratio_panel(b.panel));
  EXPECT_NE(format_ratio_panel(a.panel), format_ratio_panel(c.panel));
  EXPECT_LT(a.panel.present_count(), a.panel.n_firms() * a.panel.n_ratios() * a.panel.n_months());
}

TEST(GenPanel, TableOneTargetsRecovered) {
  synth::SynthSpec spec;
  spec.n_firms = 5000;
  spec.n_months = 12;
  spec.blocks = {{RatioCategory::Profitability, 2, 0.75},
                 {RatioCategory::Valuation, 2, 0.55},
                 {RatioCategory::Liquidity, 2, 0.6}};
  const auto g = synth::gen_panel(spec);
  const CrossSection cs = time_average(g.panel, Period::span(PeriodLabel::Before, {2013, 1}, {2013, 12}));
  const std::vector<std::string> triple{"opmad", "pe_op_basic", "quick_ratio"};
  const FbLoadings l = fit_fb_loadings(cs.select(triple), PeriodLabel::Before);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(l.corr_with_pc1[j], synth::kBeforeTargets[j], 0.05);
}

TEST(OracleEigen, KnownCases) {
  const auto d = synth::oracle_eigen(std::vector<std::vector<double>>{{2.0 / 3.0, 0.0}, {0.0, 8.0 / 3.0}});
  EXPECT_EQ(d.values[0], 8.0 / 3.0);
  EXPECT_EQ(d.values[1], 2.0 / 3.0);
  EXPECT_EQ(std::abs(d.vectors[0][1]), 1.0);
  const auto r = synth::oracle_eigen(std::vector<std::vector<double>>{{1.0, 0.6}, {0.6, 1.0}});
  EXPECT_NEAR(r.values[0], 1.6, 1e-15);
  EXPECT_NEAR(r.values[1], 0.4, 1e-15);
  EXPECT_THROW(synth::oracle_eigen(std::vector<std::vector<double>>{{1.0, 0.5}, {0.4, 1.0}}), Error);
}

TEST(OracleDr, Cases) {
  EXPECT_NEAR(synth::oracle_dr(100.0, 1.0, 0.0, {5, 5, 5}), 0.05, 1e-10);
  const double r = 0.0937;
  const EpsTriple e{2.0, 2.5, 2.75};
  const double price = static_cast<double>(synth::oracle_pv(r, 0.6, 0.015, e));
  EXPECT_NEAR(synth::oracle_dr(price, 0.6, 0.015, e), r, 1e-9);
  EXPECT_THROW(synth::oracle_dr(10.0, 0.5, 0.02, {-1, -1, -1}), Error);
  EXPECT_EQ(implied_dr(10.0, 0.5, 0.02, {-1, -1, -1}).status, DrStatus::NoRoot);
}

TEST(OraclePv, AgreesWithMainPath) {
  EXPECT_NEAR(static_cast<double>(synth::oracle_pv(0.08L, 0.5L, 0.02L, {4, 5, 6})), 22775.0 / 486.0, 1e-12);
  EXPECT_NEAR(static_cast<double>(synth::oracle_pv(0.08L, 0.5L, 0.02L, {4, 5, 6})), pv(0.08, 0.5, 0.02, {4, 5, 6}),
              1e-12);
}

TEST(Dataset, TruthIsConsistent) {
  synth::DatasetSpec spec;
  spec.panel.n_firms = 20;
  spec.panel.n_months = 108;
  const auto data = synth::generate_dataset(spec);
  EXPECT_EQ(data.affected.size(), 20u);
  const auto truth = data.truth_json();
  EXPECT_TRUE(truth.contains("seed"));
  const auto sectors = data.ratios.panel.sector_map();
  for (const auto& [firm, rates] : data.r_star) {
    EXPECT_EQ(rates.size(), data.price_months.size());
    for (double r : rates) EXPECT_GT(r, data.sector_g.at(sectors.at(firm)));
  }
}
