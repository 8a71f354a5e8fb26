#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "resilience/calendar.hpp"
#include "resilience/data_model.hpp"
#include "resilience/ratio_catalog.hpp"
#include "resilience/valuation.hpp"

namespace resilience::synth {

/// First-PC correlations of (profitability, valuation, liquidity) leaders.
using CorrTriple = std::array<double, 3>;

inline constexpr CorrTriple kBeforeTargets{0.80, 0.51, -0.52};
inline constexpr CorrTriple kAfterTargets{0.80, 0.25, -0.62};

struct RatioBlock {
  RatioCategory category = RatioCategory::Profitability;
  /// Number of catalog ratios of the category to emit (0 = all of them).
  std::size_t count = 0;
  /// Correlation of each member with the block's latent (the leader for target categories).
  double loading = 0.5;
};

struct SynthSpec {
  std::size_t n_firms = 1000;
  YearMonth first_month{2013, 1};
  std::size_t n_months = 108;
  std::vector<RatioBlock> blocks = default_blocks();
  CorrTriple before_targets = kBeforeTargets;
  CorrTriple after_targets = kAfterTargets;
  /// Whiten and re-colour the leader draw so its sample correlation equals the target exactly.
  bool moment_match = true;
  /// Standard deviation of month-level noise around each firm's regime level.
  double monthly_noise = 0.25;
  /// Student-t (3 dof) scale mixture on the monthly noise.
  bool heavy_tail = false;
  /// Share of ratio cells left missing.
  double missing_share = 0.0;
  std::uint64_t seed = 20200311;

  static std::vector<RatioBlock> default_blocks();
};

/// Ratios whose latent follows the target correlation structure.
struct Leaders {
  std::string profitability = "opmad";
  std::string valuation = "pe_op_basic";
  std::string liquidity = "quick_ratio";
};

struct PlantedTruth {
  Leaders leaders;
  Eigen::Matrix3d r_before;
  Eigen::Matrix3d r_after;
  std::vector<std::string> ratios;
  /// Population correlation of each ratio with its block latent.
  std::map<std::string, double> loadings;
};

/// Correlation matrix whose first principal component has the given variable correlations.
/// Throws NotPsd when no valid matrix exists.
Eigen::Matrix3d target_correlation(const CorrTriple& targets);

struct GeneratedPanel {
  RatioPanel panel;
  PlantedTruth truth;
};

/// Block-factor Gaussian panel. Months before 2020 use the before targets, later months the after ones.
GeneratedPanel gen_panel(const SynthSpec& spec);

struct DatasetSpec {
  SynthSpec panel;
  YearMonth price_first{2019, 1};
  YearMonth price_last{2021, 12};
  double zero_payout_share = 0.02;
};

struct SyntheticDataset {
  GeneratedPanel ratios;
  AffectedShareMap affected;
  ForecastPanel forecasts;
  Fundamentals fundamentals;
  PricePanel prices;
  std::map<std::string, double> payout;
  std::map<std::string, double> sector_g;
  /// Planted discount rate per firm over the price months (absent for zero-payout firms).
  std::map<std::string, std::vector<double>> r_star;
  std::vector<YearMonth> price_months;
  std::uint64_t seed = 0;

  nlohmann::json truth_json() const;
};

SyntheticDataset generate_dataset(const DatasetSpec& spec);

/// ratios.csv, affected.csv, forecasts.csv, fundamentals.csv, prices.csv and truth.json.
void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir);

struct OracleEigen {
  std::vector<double> values;                // non-increasing
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi reference decomposition, iterated until the off-diagonal norm is below 1e-14.
/// Throws NotSymmetric.
OracleEigen oracle_eigen(const std::vector<std::vector<double>>& matrix);
OracleEigen oracle_eigen(const Eigen::MatrixXd& matrix);

/// Reference implied rate: scan (g + 1e-6, 10] at step 1e-4, then golden-section refinement of |pv - price|.
/// Throws NoRoot.
double oracle_dr(double price, double b, double g, const EpsTriple& eps);

/// Present value in extended precision, evaluated independently of the valuation module.
long double oracle_pv(long double r, long double b, long double g, const EpsTriple& eps);

}  // namespace resilience::synth
