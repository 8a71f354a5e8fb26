#include "resilience/mfpca_composite.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "resilience/error.hpp"
#include "resilience/pca_engine.hpp"
#include "resilience/stats.hpp"

namespace resilience {

namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Flip v so that v(first) >= 0, falling through to later entries while they are ~0.
void sign_by_leading_entries(Eigen::Ref<Eigen::VectorXd> v) {
  const double tol = 1e-14 * std::max(1.0, v.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) {
      if (v(i) < 0.0) v *= -1.0;
      return;
    }
  }
}

void sign_by_sum(Eigen::Ref<Eigen::VectorXd> psi) {
  const double s = psi.sum();
  if (std::abs(s) > 1e-12 * std::max(1.0, psi.cwiseAbs().sum())) {
    if (s < 0.0) psi *= -1.0;
    return;
  }
  sign_by_leading_entries(psi);
}

}  // namespace

std::string_view to_string(Variate variate) noexcept { return variate == Variate::KP ? "KP" : "FB"; }

VariateSeries build_kp_series(const AffectedShareMap& shares, const std::vector<YearMonth>& grid,
                              double noise_sd, std::uint64_t seed) {
  if (noise_sd < 0.0) throw Error(ErrorCode::InvalidArgument, "KP noise sd must be >= 0");
  VariateSeries out;
  out.variate = Variate::KP;
  out.grid = grid;
  const auto n = static_cast<Eigen::Index>(shares.size());
  const auto t = static_cast<Eigen::Index>(grid.size());
  out.values.resize(n, t);
  out.present = BoolArray::Constant(n, t, true);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> noise(0.0, noise_sd > 0.0 ? noise_sd : 1.0);
  Eigen::Index i = 0;
  for (const auto& [firm, share] : shares) {
    out.firms.push_back(firm);
    const double level = kp_index(share);
    for (Eigen::Index c = 0; c < t; ++c) {
      out.values(i, c) = noise_sd > 0.0 ? level + noise(engine) : level;
    }
    ++i;
  }
  return out;
}

VariateSeries prepare_fb_variate(const FbSeries& fb, double min_coverage) {
  VariateSeries out;
  out.variate = Variate::FB;
  out.grid = fb.months;
  const auto t = static_cast<Eigen::Index>(fb.months.size());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index f = 0; f < fb.values.rows(); ++f) {
    const auto present = fb.present.row(f).count();
    if (t > 0 && static_cast<double>(present) >= min_coverage * static_cast<double>(t) && present > 0) {
      keep.push_back(f);
    }
  }
  out.values.resize(static_cast<Eigen::Index>(keep.size()), t);
  out.present = BoolArray::Constant(static_cast<Eigen::Index>(keep.size()), t, true);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Eigen::Index f = keep[k];
    const auto row = static_cast<Eigen::Index>(k);
    out.firms.push_back(fb.firms[static_cast<std::size_t>(f)]);
    std::vector<Eigen::Index> obs;
    for (Eigen::Index c = 0; c < t; ++c) {
      if (fb.present(f, c)) obs.push_back(c);
    }
    std::size_t next = 0;
    for (Eigen::Index c = 0; c < t; ++c) {
      while (next < obs.size() && obs[next] < c) ++next;
      if (next < obs.size() && obs[next] == c) {
        out.values(row, c) = fb.values(f, c);
      } else if (next == 0) {
        out.values(row, c) = fb.values(f, obs.front());
      } else if (next == obs.size()) {
        out.values(row, c) = fb.values(f, obs.back());
      } else {
        const Eigen::Index a = obs[next - 1];
        const Eigen::Index b = obs[next];
        const double w = static_cast<double>(c - a) / static_cast<double>(b - a);
        out.values(row, c) = (1.0 - w) * fb.values(f, a) + w * fb.values(f, b);
      }
    }
  }
  return out;
}

double fb_innovation_sd(const VariateSeries& fb) {
  std::vector<double> diffs;
  for (Eigen::Index f = 0; f < fb.values.rows(); ++f) {
    for (Eigen::Index c = 1; c < fb.values.cols(); ++c) {
      if (fb.present(f, c) && fb.present(f, c - 1)) diffs.push_back(fb.values(f, c) - fb.values(f, c - 1));
    }
  }
  if (diffs.size() < 2) return 0.0;
  return stats::sample_sd(diffs);
}

std::pair<VariateSeries, VariateSeries> align_variates(const VariateSeries& kp, const VariateSeries& fb) {
  std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> firms;
  std::map<std::string, Eigen::Index> kp_rows;
  for (std::size_t i = 0; i < kp.firms.size(); ++i) kp_rows.emplace(kp.firms[i], static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < fb.firms.size(); ++i) {
    auto it = kp_rows.find(fb.firms[i]);
    if (it != kp_rows.end()) firms.emplace(fb.firms[i], std::make_pair(it->second, static_cast<Eigen::Index>(i)));
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cols;
  std::vector<YearMonth> grid;
  for (std::size_t a = 0; a < kp.grid.size(); ++a) {
    auto it = std::find(fb.grid.begin(), fb.grid.end(), kp.grid[a]);
    if (it != fb.grid.end()) {
      cols.emplace_back(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(it - fb.grid.begin()));
      grid.push_back(kp.grid[a]);
    }
  }
  if (grid.empty()) throw Error(ErrorCode::GridMismatch, "KP and FB series share no month");
  if (firms.size() < 2) throw Error(ErrorCode::TooFewFirms, "KP and FB series share fewer than 2 firms");

  auto take = [&](const VariateSeries& src, bool is_kp) {
    VariateSeries out;
    out.variate = src.variate;
    out.grid = grid;
    const auto n = static_cast<Eigen::Index>(firms.size());
    const auto t = static_cast<Eigen::Index>(grid.size());
    out.values.resize(n, t);
    out.present.resize(n, t);
    Eigen::Index i = 0;
    for (const auto& [firm, rows] : firms) {
      out.firms.push_back(firm);
      const Eigen::Index r = is_kp ? rows.first : rows.second;
      for (Eigen::Index c = 0; c < t; ++c) {
        const Eigen::Index sc = is_kp ? cols[static_cast<std::size_t>(c)].first : cols[static_cast<std::size_t>(c)].second;
        out.values(i, c) = src.values(r, sc);
        out.present(i, c) = src.present.size() == 0 ? true : src.present(r, sc);
      }
      ++i;
    }
    return out;
  };
  return {take(kp, true), take(fb, false)};
}

std::size_t max_components(const VariateSeries& series) noexcept {
  const auto n = static_cast<std::size_t>(series.values.rows());
  const auto t = static_cast<std::size_t>(series.values.cols());
  return n == 0 ? 0 : std::min(n - 1, t);
}

UfpcaResult ufpca(const VariateSeries& series, std::size_t components) {
  const Eigen::Index n = series.values.rows();
  const Eigen::Index t = series.values.cols();
  if (n < 2) throw Error(ErrorCode::TooFewFirms, "ufpca needs at least 2 firms");
  if (static_cast<Eigen::Index>(series.grid.size()) != t || t < 1) {
    throw Error(ErrorCode::GridMismatch, "grid length does not match the series");
  }
  if (!series.complete()) throw Error(ErrorCode::GridMismatch, "ufpca needs complete rows; apply the gap policy first");
  if (components > max_components(series)) {
    throw Error(ErrorCode::InvalidArgument, "requested " + std::to_string(components) +
                                                " components, at most " + std::to_string(max_components(series)));
  }
  UfpcaResult out;
  out.firms = series.firms;
  out.mean_curve = series.values.colwise().mean().transpose();
  const Eigen::MatrixXd centered = series.values.rowwise() - out.mean_curve.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  SymmetricEigen eig = symmetric_eigen(cov);
  out.eigenvalues = eig.values.cwiseMax(0.0);
  const auto m = static_cast<Eigen::Index>(components);
  out.eigenfunctions = eig.vectors.leftCols(m);
  for (Eigen::Index k = 0; k < m; ++k) sign_by_sum(out.eigenfunctions.col(k));
  out.scores = centered * out.eigenfunctions;
  return out;
}

CompositeResult mfpca_combine(const UfpcaResult& kp, const UfpcaResult& fb, std::size_t m) {
  if (kp.firms != fb.firms) throw Error(ErrorCode::FirmSetMismatch, "KP and FB fits cover different firms");
  if (m < 1 || kp.n_components() < m || fb.n_components() < m) {
    throw Error(ErrorCode::InvalidArgument, "each variate needs at least M = " + std::to_string(m) + " scores");
  }
  const auto n = static_cast<Eigen::Index>(kp.firms.size());
  if (n < 2) throw Error(ErrorCode::TooFewFirms, "mfpca needs at least 2 firms");
  const auto mm = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd lambda(n, 2 * mm);
  lambda.leftCols(mm) = kp.scores.leftCols(mm);
  lambda.rightCols(mm) = fb.scores.leftCols(mm);
  const Eigen::MatrixXd gram = (lambda.transpose() * lambda) / static_cast<double>(n - 1);

  CompositeResult out;
  out.firms = kp.firms;
  out.m_used = m;
  if (m == 1) {
    const double a = gram(0, 0);
    const double b = gram(0, 1);
    const double c = gram(1, 1);
    const double mid = 0.5 * (a + c);
    const double half_gap = std::hypot(0.5 * (a - c), b);
    out.nu = Eigen::Vector2d(mid + half_gap, std::max(0.0, mid - half_gap));
    Eigen::Vector2d v1(out.nu(0) - c, b);
    const Eigen::Vector2d alt(b, out.nu(0) - a);
    if (alt.norm() > v1.norm()) v1 = alt;
    if (v1.norm() == 0.0) v1 = Eigen::Vector2d(1.0, 0.0);
    v1.normalize();
    Eigen::Vector2d v2(-v1(1), v1(0));
    out.eigvecs.resize(2, 2);
    out.eigvecs.col(0) = v1;
    out.eigvecs.col(1) = v2;
  } else {
    SymmetricEigen eig = symmetric_eigen(gram);
    out.nu = eig.values.cwiseMax(0.0);
    out.eigvecs = std::move(eig.vectors);
  }
  for (Eigen::Index k = 0; k < out.eigvecs.cols(); ++k) sign_by_leading_entries(out.eigvecs.col(k));
  out.zeta = out.eigvecs.col(0);
  out.all_scores = lambda * out.eigvecs;
  out.rho = out.all_scores.col(0);
  const double total = out.nu.sum();
  out.explained = total > 0.0 ? Eigen::VectorXd(out.nu / total) : Eigen::VectorXd::Zero(out.nu.size());
  return out;
}

Reconstruction kl_reconstruct(const VariateSeries& series, const UfpcaResult& fit, std::size_t m) {
  if (m > fit.n_components()) {
    throw Error(ErrorCode::InvalidArgument, "fit has only " + std::to_string(fit.n_components()) + " components");
  }
  const Eigen::Index n = series.values.rows();
  const auto mm = static_cast<Eigen::Index>(m);
  Reconstruction out;
  out.values = fit.scores.leftCols(mm) * fit.eigenfunctions.leftCols(mm).transpose();
  out.values.rowwise() += fit.mean_curve.transpose();
  out.error = (series.values - out.values).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  return out;
}

std::vector<ResilienceLabel> categorize_cf(std::span<const double> rho, double low_pct, double high_pct) {
  if (!(low_pct > 0.0 && low_pct < high_pct && high_pct < 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < low_pct < high_pct < 100");
  }
  std::vector<ResilienceLabel> out(rho.size(), ResilienceLabel::Medium);
  if (rho.empty()) return out;
  const double lo = stats::percentile(rho, low_pct);
  const double hi = stats::percentile(rho, high_pct);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] < lo) {
      out[i] = ResilienceLabel::High;
    } else if (rho[i] > hi) {
      out[i] = ResilienceLabel::Low;
    }
  }
  return out;
}

}  // namespace resilience
