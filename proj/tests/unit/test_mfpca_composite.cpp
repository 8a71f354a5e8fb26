#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "resilience/error.hpp"
#include "resilience/mfpca_composite.hpp"
#include "resilience/stats.hpp"
#include "resilience/synth_oracle.hpp"
#include "test_util.hpp"

using namespace resilience;

namespace {

VariateSeries series_from(Variate v, const Eigen::MatrixXd& x) {
  VariateSeries s;
  s.variate = v;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s.firms.push_back("F" + std::to_string(100 + i));
  s.grid = testutil::months({2019, 1}, static_cast<std::size_t>(x.cols()));
  s.values = x;
  s.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(x.rows(), x.cols(), true);
  return s;
}

UfpcaResult scores_only(const Eigen::MatrixXd& kp_fb) {
  UfpcaResult r;
  for (Eigen::Index i = 0; i < kp_fb.rows(); ++i) r.firms.push_back("F" + std::to_string(i));
  r.scores = kp_fb;
  r.eigenfunctions = Eigen::MatrixXd::Zero(1, kp_fb.cols());
  r.eigenvalues = Eigen::VectorXd::Zero(1);
  r.mean_curve = Eigen::VectorXd::Zero(1);
  return r;
}

double sample_cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / static_cast<double>(a.size() - 1);
}

}  // namespace

TEST(KpSeries, ConstantRowWithoutNoise) {
  const auto grid = testutil::months({2019, 1}, 5);
  const VariateSeries kp = build_kp_series({{"F1", 72.0}, {"F2", 10.0}}, grid, 0.0, 1);
  ASSERT_EQ(kp.values.rows(), 2);
  for (Eigen::Index t = 0; t < 5; ++t) {
    EXPECT_EQ(kp.values(0, t), 28.0);
    EXPECT_EQ(kp.values(1, t), 90.0);
  }
}

TEST(KpSeries, SeededNoiseIsReproducible) {
  AffectedShareMap shares;
  for (int i = 0; i < 200; ++i) shares["F" + std::to_string(i)] = i % 100;
  const auto grid = testutil::months({2013, 1}, 50);
  const VariateSeries a = build_kp_series(shares, grid, 0.3, 42);
  const VariateSeries b = build_kp_series(shares, grid, 0.3, 42);
  const VariateSeries c = build_kp_series(shares, grid, 0.3, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  std::vector<double> eps;
  std::size_t i = 0;
  for (const auto& [firm, share] : shares) {
    for (Eigen::Index t = 0; t < 50; ++t) eps.push_back(a.values(static_cast<Eigen::Index>(i), t) - (100.0 - share));
    ++i;
  }
  EXPECT_NEAR(stats::sample_sd(eps), 0.3, 0.3 * 0.05);
}

TEST(FbVariate, GapPolicy) {
  FbSeries fb;
  fb.firms = {"A", "B"};
  fb.months = testutil::months({2020, 1}, 5);
  fb.values = Eigen::MatrixXd::Zero(2, 5);
  fb.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(2, 5, true);
  fb.values.row(0) << 9, 1, 0, 3, 9;
  fb.present(0, 0) = false;
  fb.present(0, 2) = false;
  fb.present(0, 4) = false;
  fb.present(1, 0) = false;
  fb.present(1, 1) = false;
  fb.present(1, 2) = false;
  fb.present(1, 3) = false;
  const VariateSeries v = prepare_fb_variate(fb, 0.4);
  ASSERT_EQ(v.firms, std::vector<std::string>{"A"});
  EXPECT_EQ(v.values(0, 0), 1.0);
  EXPECT_EQ(v.values(0, 2), 2.0);
  EXPECT_EQ(v.values(0, 4), 3.0);
  EXPECT_TRUE(v.complete());
}

TEST(Align, CommonFirmsAndMonths) {
  const VariateSeries kp = build_kp_series({{"A", 10}, {"B", 20}, {"C", 30}}, testutil::months({2019, 1}, 4), 0, 1);
  VariateSeries fb = series_from(Variate::FB, Eigen::MatrixXd::Ones(2, 3));
  fb.firms = {"C", "A"};
  fb.grid = testutil::months({2019, 2}, 3);
  const auto [k, f] = align_variates(kp, fb);
  EXPECT_EQ(k.firms, (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(f.firms, k.firms);
  EXPECT_EQ(k.grid.size(), 3u);
  EXPECT_EQ(k.values(1, 0), 70.0);
  fb.grid = testutil::months({2022, 1}, 3);
  EXPECT_THROW(align_variates(kp, fb), Error);
}

TEST(Ufpca, IdenticalCurvesHaveNoVariation) {
  Eigen::MatrixXd x(4, 3);
  for (int i = 0; i < 4; ++i) x.row(i) << 1, 2, 3;
  const UfpcaResult r = ufpca(series_from(Variate::FB, x), 1);
  EXPECT_EQ(r.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.scores.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Ufpca, RankOnePlanted) {
  Eigen::VectorXd a(6);
  a << 1, -2, 0.5, 3, -1.5, -1;
  Eigen::VectorXd u(5);
  u << 1, 2, 0, -1, 3;
  const Eigen::MatrixXd x = a * u.transpose();
  const UfpcaResult r = ufpca(series_from(Variate::FB, x), 1);
  const Eigen::VectorXd un = u.normalized();
  EXPECT_LT((r.eigenfunctions.col(0) - un).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::VectorXd ac = (a.array() - a.mean()).matrix() * u.norm();
  EXPECT_LT((r.scores.col(0) - ac).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GT(r.eigenvalues(0), 0.0);
  EXPECT_LT(r.eigenvalues.tail(4).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ufpca, TinyFixtureMatchesOracle) {
  Eigen::MatrixXd x(3, 2);
  x << 1.0, 2.0, 4.0, 1.0, -2.0, 3.5;
  const UfpcaResult r = ufpca(series_from(Variate::KP, x), 2);
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const auto oracle = synth::oracle_eigen(Eigen::MatrixXd(c.transpose() * c / 2.0));
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(r.eigenvalues(static_cast<Eigen::Index>(k)), oracle.values[k], 1e-10);
    const Eigen::Map<const Eigen::VectorXd> v(oracle.vectors[k].data(), 2);
    EXPECT_LT(testutil::sign_free_distance(r.eigenfunctions.col(static_cast<Eigen::Index>(k)), v), 1e-10);
  }
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_GE(r.eigenfunctions.col(k).sum(), 0.0);
}

TEST(Ufpca, ComponentBounds) {
  const VariateSeries s = series_from(Variate::FB, Eigen::MatrixXd::Random(3, 5));
  EXPECT_EQ(max_components(s), 2u);
  EXPECT_THROW(ufpca(s, 3), Error);
  EXPECT_THROW(ufpca(series_from(Variate::FB, Eigen::MatrixXd::Ones(1, 5)), 1), Error);
}

TEST(Mfpca, HandFixture) {
  Eigen::MatrixXd l(4, 2);
  l << 1, 0, -1, 0, 0, 2, 0, -2;
  const CompositeResult r = mfpca_combine(scores_only(l.col(0)), scores_only(l.col(1)), 1);
  EXPECT_EQ(r.zeta(0), 0.0);
  EXPECT_EQ(r.zeta(1), 1.0);
  EXPECT_EQ(r.rho, Eigen::Vector4d(0, 0, 2, -2));
  EXPECT_NEAR(r.nu(0), 8.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.nu(1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.explained(0), 0.8, 1e-15);
}

TEST(Mfpca, DegenerateFb) {
  Eigen::MatrixXd kp(3, 1);
  kp << 1.5, -0.5, -1.0;
  const CompositeResult r = mfpca_combine(scores_only(kp), scores_only(Eigen::MatrixXd::Zero(3, 1)), 1);
  EXPECT_EQ(r.zeta, Eigen::Vector2d(1, 0));
  EXPECT_EQ(r.rho, Eigen::VectorXd(kp.col(0)));
}

TEST(Mfpca, FirmSetMismatch) {
  UfpcaResult a = scores_only(Eigen::MatrixXd::Ones(3, 1));
  UfpcaResult b = scores_only(Eigen::MatrixXd::Ones(3, 1));
  b.firms[2] = "other";
  try {
    mfpca_combine(a, b, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FirmSetMismatch);
  }
}

TEST(Mfpca, ScoreIdentitiesOnRandomPanels) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 8 + trial;
    const Eigen::Index t = 6;
    const VariateSeries kp = series_from(Variate::KP, testutil::random_normal(rng, n, t));
    const VariateSeries fb = series_from(Variate::FB, testutil::random_normal(rng, n, t) * 2.0);
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 3);
    const CompositeResult r = mfpca_combine(ufpca(kp, m), ufpca(fb, m), m);
    EXPECT_NEAR(sample_cov(r.rho, r.rho), r.nu(0), 1e-8);
    for (Eigen::Index a = 0; a < r.all_scores.cols(); ++a) {
      for (Eigen::Index b = a + 1; b < r.all_scores.cols(); ++b) {
        EXPECT_NEAR(sample_cov(r.all_scores.col(a), r.all_scores.col(b)), 0.0, 1e-8);
      }
    }
    EXPECT_NEAR(r.explained.sum(), 1.0, 1e-12);
  }
}

TEST(KlReconstruct, MonotoneAndExactAtFullRank) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const VariateSeries s = series_from(Variate::FB, testutil::random_normal(rng, 10, 5));
    const UfpcaResult fit = ufpca(s, 5);
    double prev = kl_reconstruct(s, fit, 0).error;
    const Eigen::MatrixXd c = s.values.rowwise() - s.values.colwise().mean();
    EXPECT_NEAR(prev, c.squaredNorm() / 9.0, 1e-10);
    for (std::size_t m = 1; m <= 5; ++m) {
      const double e = kl_reconstruct(s, fit, m).error;
      EXPECT_LE(e, prev + 1e-12);
      prev = e;
    }
    EXPECT_LE(prev, 1e-8);
  }
}

TEST(CategorizeCf, NestedAndDisjoint) {
  std::vector<double> rho;
  for (int i = 1; i <= 100; ++i) rho.push_back(i);
  const auto wide = categorize_cf(rho, 33, 66);
  const auto narrow = categorize_cf(rho, 25, 75);
  std::size_t high = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (narrow[i] == ResilienceLabel::High) {
      EXPECT_EQ(wide[i], ResilienceLabel::High);
    }
    if (narrow[i] == ResilienceLabel::Low) {
      EXPECT_EQ(wide[i], ResilienceLabel::Low);
    }
    if (wide[i] == ResilienceLabel::High) {
      ++high;
      EXPECT_LT(rho[i], 34.0);
    }
  }
  EXPECT_EQ(high, 33u);
  EXPECT_EQ(wide.front(), ResilienceLabel::High);
  EXPECT_EQ(wide.back(), ResilienceLabel::Low);
  const std::vector<double> flat(10, 2.5);
  for (auto label : categorize_cf(flat)) EXPECT_EQ(label, ResilienceLabel::Medium);
  EXPECT_THROW(categorize_cf(rho, 70, 30), Error);
}
