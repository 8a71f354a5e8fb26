#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "resilience/data_model.hpp"
#include "resilience/fb_screening.hpp"

namespace resilience {

enum class Variate { KP, FB };

std::string_view to_string(Variate variate) noexcept;

/// N firms x T months of one variate on a common grid.
struct VariateSeries {
  Variate variate = Variate::KP;
  std::vector<std::string> firms;
  std::vector<YearMonth> grid;
  Eigen::MatrixXd values;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> present;

  bool complete() const { return present.size() == 0 || present.all(); }
};

/// KP_i(t) = (100 - affected_share_i) + eps_it with eps iid N(0, noise_sd^2) drawn from a
/// generator seeded with `seed`, firm-major in map order.
VariateSeries build_kp_series(const AffectedShareMap& shares, const std::vector<YearMonth>& grid,
                              double noise_sd, std::uint64_t seed);

/// Gap policy for FB: drop firms with coverage below `min_coverage`, interpolate interior
/// gaps linearly, hold the ends flat.
VariateSeries prepare_fb_variate(const FbSeries& fb, double min_coverage = 0.8);

/// Sample sd of month-to-month FB changes pooled across firms (present pairs only).
double fb_innovation_sd(const VariateSeries& fb);

/// Restricts both variates to their common firms (sorted by id) and common months.
/// Throws GridMismatch when there is no common month, TooFewFirms below 2 common firms.
std::pair<VariateSeries, VariateSeries> align_variates(const VariateSeries& kp, const VariateSeries& fb);

struct UfpcaResult {
  std::vector<std::string> firms;
  Eigen::VectorXd mean_curve;      // T
  Eigen::VectorXd eigenvalues;     // all T, non-increasing
  Eigen::MatrixXd eigenfunctions;  // T x M, orthonormal with unit grid weights
  Eigen::MatrixXd scores;          // N x M

  std::size_t n_components() const noexcept { return static_cast<std::size_t>(eigenfunctions.cols()); }
};

/// Discrete-grid functional PCA: centre by the cross-firm mean curve, eigendecompose the
/// T x T sample covariance, project. Each eigenfunction is signed so that its sum is
/// non-negative (first non-zero entry positive on ties).
UfpcaResult ufpca(const VariateSeries& series, std::size_t components);

/// Largest meaningful component count, min(N - 1, T).
std::size_t max_components(const VariateSeries& series) noexcept;

struct CompositeResult {
  std::vector<std::string> firms;
  Eigen::VectorXd zeta;         // leading eigenvector (KP block first)
  Eigen::VectorXd rho;          // per-firm composite score
  Eigen::VectorXd nu;           // eigenvalues of (N-1)^-1 Lambda^T Lambda, non-increasing
  Eigen::VectorXd explained;    // nu / sum(nu)
  Eigen::MatrixXd eigvecs;      // all eigenvectors (columns)
  Eigen::MatrixXd all_scores;   // Lambda * eigvecs, N x 2M
  std::size_t m_used = 1;
};

/// Combines the first M univariate scores of each variate. With M = 1 the 2x2 problem is
/// solved in closed form. Sign: zeta's first KP entry >= 0, then the first FB entry.
CompositeResult mfpca_combine(const UfpcaResult& kp, const UfpcaResult& fb, std::size_t m = 1);

struct Reconstruction {
  Eigen::MatrixXd values;
  /// sum_i ||x_i - x_hat_i||^2 / (N - 1); equals the total centred variance at M = 0.
  double error = 0.0;
};

Reconstruction kl_reconstruct(const VariateSeries& series, const UfpcaResult& fit, std::size_t m);

/// rho < P_lo -> High, rho > P_hi -> Low, else Medium.
std::vector<ResilienceLabel> categorize_cf(std::span<const double> rho, double low_pct = 33.0,
                                           double high_pct = 66.0);

}  // namespace resilience
