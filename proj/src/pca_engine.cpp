#include "resilience/pca_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "resilience/error.hpp"

namespace resilience {

namespace {

constexpr double kTieTolerance = 1e-12;

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("X" + std::to_string(j + 1));
  return names;
}

void flip(PcaResult& r, Eigen::Index k) {
  r.loadings.col(k) *= -1.0;
  if (r.scores.size() > 0) r.scores.col(k) *= -1.0;
  if (r.var_pc_corr.size() > 0) r.var_pc_corr.col(k) *= -1.0;
}

Eigen::Index largest_abs_index(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    if (std::abs(v(j)) > std::abs(v(best))) best = j;
  }
  return best;
}

}  // namespace

Standardized standardize(const Eigen::MatrixXd& x, std::vector<std::string> variables) {
  CrossSection cross;
  cross.values = x;
  cross.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(x.rows(), x.cols(), true);
  cross.ratios = variables.empty() ? default_names(static_cast<std::size_t>(x.cols())) : std::move(variables);
  return standardize(cross);
}

Standardized standardize(const CrossSection& cross) {
  Standardized out;
  out.variables = cross.ratios;
  const Eigen::Index n = cross.values.rows();
  const Eigen::Index p = cross.values.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cross.present.row(i).all()) {
      out.kept_rows.push_back(static_cast<std::size_t>(i));
    } else {
      out.dropped_rows.push_back(static_cast<std::size_t>(i));
    }
  }
  const auto kept = static_cast<Eigen::Index>(out.kept_rows.size());
  if (kept < 2) {
    throw Error(ErrorCode::TooFewRows, "standardize needs at least 2 complete rows, got " + std::to_string(kept));
  }
  out.z.resize(kept, p);
  for (Eigen::Index i = 0; i < kept; ++i) {
    // Only rows whose every cell is present are read.
    out.z.row(i) = cross.values.row(static_cast<Eigen::Index>(out.kept_rows[static_cast<std::size_t>(i)]));
  }
  out.means = out.z.colwise().mean().transpose();
  out.sds.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    out.z.col(j).array() -= out.means(j);
    const double sd = std::sqrt(out.z.col(j).squaredNorm() / static_cast<double>(kept - 1));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw Error(ErrorCode::DegenerateColumn, "column '" + out.variables[static_cast<std::size_t>(j)] +
                                                   "' has zero variance over complete rows");
    }
    out.sds(j) = sd;
    out.z.col(j) /= sd;
  }
  return out;
}

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& matrix) {
  const Eigen::Index p = matrix.rows();
  SymmetricEigen out;
  if (p == 0) return out;
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "eigensolver failed");
  out.values.resize(p);
  out.vectors.resize(p, p);
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < p; ++k) {
    out.values(k) = solver.eigenvalues()(p - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(p - 1 - k);
  }
  const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < p; ++k) {
    if (std::abs(out.values(k)) <= kTieTolerance * scale * static_cast<double>(p)) out.values(k) = 0.0;
  }
  return out;
}

PcaResult pca_from_correlation(const Eigen::MatrixXd& correlation, std::vector<std::string> variables) {
  const Eigen::Index p = correlation.rows();
  PcaResult r;
  r.variables = variables.empty() ? default_names(static_cast<std::size_t>(p)) : std::move(variables);
  auto eig = symmetric_eigen(correlation);
  r.eigenvalues = eig.values.cwiseMax(0.0);
  r.loadings = std::move(eig.vectors);
  const double total = r.eigenvalues.sum();
  r.explained = total > 0.0 ? Eigen::VectorXd(r.eigenvalues / total) : Eigen::VectorXd::Zero(p);
  r.var_pc_corr = var_pc_correlations(r);
  return apply_sign_convention(std::move(r));
}

PcaResult pca(const Standardized& standardized) {
  const Eigen::Index n = standardized.z.rows();
  if (n < 2) throw Error(ErrorCode::TooFewRows, "pca needs at least 2 rows");
  const Eigen::MatrixXd corr = (standardized.z.transpose() * standardized.z) / static_cast<double>(n - 1);
  PcaResult r = pca_from_correlation(corr, standardized.variables);
  r.scores = standardized.z * r.loadings;
  r.column_means = standardized.means;
  r.column_sds = standardized.sds;
  r.kept_rows = standardized.kept_rows;
  r.dropped_rows = standardized.dropped_rows;
  return r;
}

Eigen::MatrixXd var_pc_correlations(const PcaResult& result) {
  return result.loadings * result.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

PcaResult apply_sign_convention(PcaResult result, std::span<const std::optional<std::string>> anchors) {
  const Eigen::Index p = result.loadings.cols();
  for (Eigen::Index k = 0; k < p; ++k) {
    std::optional<Eigen::Index> anchor;
    if (static_cast<std::size_t>(k) < anchors.size() && anchors[static_cast<std::size_t>(k)]) {
      auto it = std::find(result.variables.begin(), result.variables.end(), *anchors[static_cast<std::size_t>(k)]);
      if (it != result.variables.end()) {
        const auto j = static_cast<Eigen::Index>(it - result.variables.begin());
        if (result.loadings(j, k) != 0.0) anchor = j;
      }
    }
    const Eigen::Index j = anchor ? *anchor : largest_abs_index(result.loadings.col(k));
    if (result.loadings(j, k) < 0.0) flip(result, k);
  }
  return result;
}

ComponentRule ComponentRule::parse(const std::string& text) {
  if (text == "kaiser") return kaiser();
  try {
    if (text.rfind("top_k:", 0) == 0) return top_k(std::stoul(text.substr(6)));
    if (text.rfind("explained:", 0) == 0) return explained_at_least(std::stod(text.substr(10)));
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown component rule '" + text + "'");
}

std::string ComponentRule::to_string() const {
  switch (kind) {
    case Kind::Kaiser: return "kaiser";
    case Kind::TopK: return "top_k:" + std::to_string(k);
    case Kind::ExplainedAtLeast: {
      std::string s = std::to_string(q);
      s.erase(s.find_last_not_of('0') + 1);
      if (s.back() == '.') s.pop_back();
      return "explained:" + s;
    }
  }
  return "kaiser";
}

std::size_t select_components(const PcaResult& result, const ComponentRule& rule) {
  const std::size_t p = result.n_components();
  if (p == 0) return 0;
  std::size_t count = 0;
  switch (rule.kind) {
    case ComponentRule::Kind::Kaiser:
      for (Eigen::Index k = 0; k < result.eigenvalues.size(); ++k) {
        if (result.eigenvalues(k) > 1.0 - kTieTolerance) ++count;
      }
      break;
    case ComponentRule::Kind::TopK:
      count = std::min(rule.k, p);
      break;
    case ComponentRule::Kind::ExplainedAtLeast: {
      double cumulative = 0.0;
      count = p;
      for (std::size_t k = 0; k < p; ++k) {
        cumulative += result.explained(static_cast<Eigen::Index>(k));
        if (cumulative >= rule.q - kTieTolerance) {
          count = k + 1;
          break;
        }
      }
      break;
    }
  }
  return std::max<std::size_t>(count, 1);
}

}  // namespace resilience
