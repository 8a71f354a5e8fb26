#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilience/data_model.hpp"

namespace testutil {

inline Eigen::MatrixXd random_normal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
  }
  return m;
}

/// Sample correlation matrix of a random mixed Gaussian draw.
inline Eigen::MatrixXd random_correlation(std::mt19937_64& rng, Eigen::Index p, Eigen::Index n = 40) {
  const Eigen::MatrixXd x = random_normal(rng, n, p) * random_normal(rng, p, p);
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(n - 1);
  const Eigen::VectorXd d = cov.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = d.asDiagonal() * cov * d.asDiagonal();
  r = 0.5 * (r + r.transpose()).eval();
  r.diagonal().setOnes();
  return r;
}

inline resilience::CrossSection make_cross(const Eigen::MatrixXd& values, const std::vector<std::string>& ratios) {
  resilience::CrossSection c;
  for (Eigen::Index i = 0; i < values.rows(); ++i) c.firms.push_back({"F" + std::to_string(i), "311"});
  c.ratios = ratios;
  c.values = values;
  c.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(values.rows(), values.cols(), true);
  return c;
}

inline std::vector<resilience::YearMonth> months(resilience::YearMonth first, std::size_t n) {
  std::vector<resilience::YearMonth> out;
  for (std::size_t i = 0; i < n; ++i, first = first.next()) out.push_back(first);
  return out;
}

/// Column-sign-insensitive distance between two vectors.
inline double sign_free_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::min((a - b).cwiseAbs().maxCoeff(), (a + b).cwiseAbs().maxCoeff());
}

}  // namespace testutil
