#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "resilience/error.hpp"
#include "resilience/pca_engine.hpp"
#include "resilience/stats.hpp"
#include "resilience/synth_oracle.hpp"
#include "test_util.hpp"

using namespace resilience;

TEST(Standardize, SampleSd) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const Standardized s = standardize(x);
  EXPECT_DOUBLE_EQ(s.z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.z(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.z(2, 0), 1.0);
}

TEST(Standardize, Errors) {
  Eigen::MatrixXd c(3, 2);
  c << 1, 5, 2, 5, 3, 5;
  try {
    standardize(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateColumn);
  }
  Eigen::MatrixXd one(1, 2);
  one << 1, 2;
  try {
    standardize(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
  }
}

TEST(Standardize, ListwiseDeletionMatchesRecomputation) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = testutil::random_normal(rng, 10, 4);
  CrossSection cs = testutil::make_cross(x, {"a", "b", "c", "d"});
  cs.present(2, 1) = false;
  cs.present(7, 3) = false;
  const Standardized s = standardize(cs);
  EXPECT_EQ(s.dropped_rows, (std::vector<std::size_t>{2, 7}));
  ASSERT_EQ(s.z.rows(), 8);
  for (Eigen::Index j = 0; j < 4; ++j) {
    std::vector<double> col;
    for (Eigen::Index i = 0; i < 10; ++i) {
      if (i != 2 && i != 7) col.push_back(x(i, j));
    }
    const double m = std::accumulate(col.begin(), col.end(), 0.0) / col.size();
    double ss = 0.0;
    for (double v : col) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / (col.size() - 1));
    for (std::size_t k = 0; k < col.size(); ++k) {
      EXPECT_NEAR(s.z(static_cast<Eigen::Index>(k), j), (col[k] - m) / sd, 1e-12);
    }
  }
}

TEST(Pca, AnalyticTwoByTwo) {
  Eigen::Matrix2d r;
  r << 1, 0.6, 0.6, 1;
  const PcaResult p = pca_from_correlation(r);
  EXPECT_NEAR(p.eigenvalues(0), 1.6, 1e-14);
  EXPECT_NEAR(p.eigenvalues(1), 0.4, 1e-14);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(p.loadings(0, 0)), h, 1e-14);
  EXPECT_NEAR(p.loadings(0, 0) * p.loadings(1, 0), 0.5, 1e-14);
  EXPECT_NEAR(p.loadings(0, 1) * p.loadings(1, 1), -0.5, 1e-14);
}

TEST(Pca, IdentityCorrelation) {
  const PcaResult p = pca_from_correlation(Eigen::MatrixXd::Identity(4, 4));
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(p.eigenvalues(k), 1.0, 1e-14);
    EXPECT_NEAR(p.explained(k), 0.25, 1e-14);
  }
}

TEST(Pca, MatchesOracleOnRandomFixture) {
  std::mt19937_64 rng(50);
  const Eigen::MatrixXd x = testutil::random_normal(rng, 50, 5) * testutil::random_normal(rng, 5, 5);
  const PcaResult p = pca(standardize(x));
  const Eigen::MatrixXd c = (p.loadings * p.eigenvalues.asDiagonal() * p.loadings.transpose());
  const auto oracle = synth::oracle_eigen(c);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(p.eigenvalues(k), oracle.values[static_cast<std::size_t>(k)], 1e-8);
  }
  // and against the oracle applied to the sample correlation computed directly
  const Standardized s = standardize(x);
  const Eigen::MatrixXd corr = s.z.transpose() * s.z / 49.0;
  const auto direct = synth::oracle_eigen(corr);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(p.eigenvalues(k), direct.values[static_cast<std::size_t>(k)], 1e-8);
    const Eigen::Map<const Eigen::VectorXd> v(direct.vectors[static_cast<std::size_t>(k)].data(), 5);
    EXPECT_LT(testutil::sign_free_distance(p.loadings.col(k), v), 1e-8);
  }
}

TEST(Pca, VarPcCorrelationMatchesPearson) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = testutil::random_normal(rng, 40, 4) * testutil::random_normal(rng, 4, 4);
  const PcaResult p = pca(standardize(x));
  for (Eigen::Index j = 0; j < 4; ++j) {
    for (Eigen::Index k = 0; k < 4; ++k) {
      const Eigen::VectorXd xj = x.col(j);
      const Eigen::VectorXd sk = p.scores.col(k);
      const double direct = stats::pearson(std::span<const double>(xj.data(), 40), std::span<const double>(sk.data(), 40));
      EXPECT_NEAR(p.var_pc_corr(j, k), direct, 1e-10);
    }
  }
}

TEST(Pca, ZeroEigenvalueGivesZeroCorrelations) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 5, 10;
  const PcaResult p = pca(standardize(x));
  EXPECT_EQ(p.eigenvalues(1), 0.0);
  EXPECT_EQ(p.var_pc_corr(0, 1), 0.0);
  EXPECT_EQ(p.var_pc_corr(1, 1), 0.0);
}

TEST(Pca, ScaleAndPermutationInvariance) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd x = testutil::random_normal(rng, 30, 3) * testutil::random_normal(rng, 3, 3);
  const PcaResult base = pca(standardize(x));
  Eigen::MatrixXd scaled = x;
  scaled.col(0) *= 1000.0;
  scaled.col(2) = scaled.col(2).array() * 0.01 + 7.0;
  const PcaResult ps = pca(standardize(scaled));
  EXPECT_LT((ps.eigenvalues - base.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
  Eigen::MatrixXd permuted = x;
  permuted.row(0).swap(permuted.row(29));
  permuted.row(3).swap(permuted.row(11));
  const PcaResult pp = pca(standardize(permuted));
  EXPECT_LT((pp.eigenvalues - base.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pca, Invariants) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = static_cast<Eigen::Index>(2 + trial % 5);
    const PcaResult r = pca_from_correlation(testutil::random_correlation(rng, p));
    EXPECT_NEAR(r.explained.sum(), 1.0, 1e-12);
    EXPECT_LT((r.loadings.transpose() * r.loadings - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index k = 1; k < p; ++k) EXPECT_GE(r.eigenvalues(k - 1), r.eigenvalues(k));
    EXPECT_GE(r.eigenvalues.minCoeff(), 0.0);
  }
}

TEST(SignConvention, AnchorFlips) {
  PcaResult r;
  r.variables = {"opmad", "pe_op_basic", "quick_ratio"};
  r.eigenvalues = Eigen::Vector3d(1.5, 1.0, 0.5);
  r.loadings = Eigen::Matrix3d::Identity();
  r.loadings.col(0) = Eigen::Vector3d(-0.75, -0.45, 0.46);
  r.var_pc_corr = Eigen::Matrix3d::Zero();
  const std::array<std::optional<std::string>, 3> anchors = {std::string("opmad"), std::nullopt, std::nullopt};
  const PcaResult out = apply_sign_convention(r, anchors);
  EXPECT_EQ(out.loadings(0, 0), 0.75);
  EXPECT_EQ(out.loadings(1, 0), 0.45);
  EXPECT_EQ(out.loadings(2, 0), -0.46);

  const PcaResult again = apply_sign_convention(out, anchors);
  EXPECT_EQ(again.loadings, out.loadings);
}

TEST(SignConvention, ZeroAnchorFallsBackToLargest) {
  PcaResult r;
  r.variables = {"a", "b", "c"};
  r.eigenvalues = Eigen::Vector3d(1.5, 1.0, 0.5);
  r.loadings = Eigen::Matrix3d::Identity();
  r.loadings.col(0) = Eigen::Vector3d(0.0, 0.6, -0.8);
  r.var_pc_corr = Eigen::Matrix3d::Zero();
  const std::array<std::optional<std::string>, 1> anchors = {std::string("a")};
  const PcaResult out = apply_sign_convention(r, anchors);
  EXPECT_EQ(out.loadings(2, 0), 0.8);
  EXPECT_EQ(out.loadings(1, 0), -0.6);
}

TEST(ComponentRule, Selection) {
  PcaResult r;
  r.eigenvalues = Eigen::Vector4d(2.5, 1.2, 0.8, 0.5);
  r.explained = r.eigenvalues / r.eigenvalues.sum();
  EXPECT_EQ(select_components(r, ComponentRule::kaiser()), 2u);
  EXPECT_EQ(select_components(r, ComponentRule::top_k(3)), 3u);
  EXPECT_EQ(select_components(r, ComponentRule::top_k(9)), 4u);

  PcaResult q;
  q.eigenvalues = Eigen::Vector3d(2.76, 0.15, 0.09);
  q.explained = Eigen::Vector3d(0.92, 0.05, 0.03);
  EXPECT_EQ(select_components(q, ComponentRule::explained_at_least(0.9)), 1u);

  PcaResult flat;
  flat.eigenvalues = Eigen::Vector2d(0.9, 0.8);
  flat.explained = flat.eigenvalues / flat.eigenvalues.sum();
  EXPECT_EQ(select_components(flat, ComponentRule::kaiser()), 1u);

  EXPECT_EQ(ComponentRule::parse("top_k:3").to_string(), "top_k:3");
  EXPECT_EQ(ComponentRule::parse("kaiser").kind, ComponentRule::Kind::Kaiser);
  EXPECT_THROW(ComponentRule::parse("bogus"), Error);
}
