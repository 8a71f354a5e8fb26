#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilience/data_model.hpp"

namespace resilience {

/// Column-standardized complete rows of a cross-section.
struct Standardized {
  std::vector<std::string> variables;
  Eigen::MatrixXd z;  // kept rows x variables, column mean 0, sample sd 1
  Eigen::VectorXd means;
  Eigen::VectorXd sds;
  std::vector<std::size_t> kept_rows;     // row indices into the input
  std::vector<std::size_t> dropped_rows;  // rows with any masked cell
};

/// Listwise deletion followed by z-scoring with the sample (n - 1) sd.
/// Throws DegenerateColumn for a zero-variance column, TooFewRows for < 2 complete rows.
Standardized standardize(const CrossSection& cross);
Standardized standardize(const Eigen::MatrixXd& x, std::vector<std::string> variables = {});

/// Symmetric eigendecomposition sorted by descending eigenvalue.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns
};

/// Deterministic eigensolver shared by the PCA and functional-PCA paths. Eigenvalues
/// within a relative 1e-12 of zero are clamped to zero.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& matrix);

struct PcaResult {
  std::vector<std::string> variables;
  Eigen::VectorXd eigenvalues;  // non-increasing, >= 0
  Eigen::MatrixXd loadings;     // p x p orthonormal, columns are components
  Eigen::MatrixXd scores;       // n x p
  Eigen::VectorXd explained;    // eigenvalue shares
  Eigen::MatrixXd var_pc_corr;  // corr(X_j, PC_k)
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_sds;
  std::vector<std::size_t> kept_rows;
  std::vector<std::size_t> dropped_rows;

  std::size_t n_components() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// Correlation-matrix PCA of standardized data. Throws TooFewRows if n < 2.
PcaResult pca(const Standardized& standardized);

/// PCA of a given correlation matrix (no scores).
PcaResult pca_from_correlation(const Eigen::MatrixXd& correlation, std::vector<std::string> variables = {});

/// corr(X_j, PC_k) = loading_jk * sqrt(lambda_k).
Eigen::MatrixXd var_pc_correlations(const PcaResult& result);

/// Flips each component so its anchor variable loads non-negatively. A missing anchor,
/// an unknown code, or a zero anchor loading falls back to the variable with the largest
/// |loading| (first such on ties).
PcaResult apply_sign_convention(PcaResult result,
                                std::span<const std::optional<std::string>> anchors = {});

struct ComponentRule {
  enum class Kind { Kaiser, TopK, ExplainedAtLeast };
  Kind kind = Kind::Kaiser;
  std::size_t k = 0;
  double q = 0.0;

  static ComponentRule kaiser() { return {}; }
  static ComponentRule top_k(std::size_t k) { return {Kind::TopK, k, 0.0}; }
  static ComponentRule explained_at_least(double q) { return {Kind::ExplainedAtLeast, 0, q}; }

  /// "kaiser", "top_k:N" or "explained:Q".
  static ComponentRule parse(const std::string& text);
  std::string to_string() const;
};

/// kaiser: #{lambda > 1}, counting eigenvalues within 1e-12 of 1 as ties that go to the
/// larger count; top_k: min(k, p); explained: smallest k whose cumulative share reaches q.
/// Always returns at least 1 for a non-empty result.
std::size_t select_components(const PcaResult& result, const ComponentRule& rule);

}  // namespace resilience
