#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "resilience/calendar.hpp"
#include "resilience/data_model.hpp"
#include "resilience/diagnostics.hpp"
#include "resilience/fb_screening.hpp"
#include "resilience/valuation.hpp"

namespace resilience {

struct InputPaths {
  std::filesystem::path ratios = "ratios.csv";
  std::filesystem::path affected = "affected.csv";
  std::filesystem::path forecasts = "forecasts.csv";
  std::filesystem::path fundamentals = "fundamentals.csv";
  std::filesystem::path prices = "prices.csv";

  /// All five under one directory with their default names.
  static InputPaths in_directory(const std::filesystem::path& dir);
};

struct PeriodConfig {
  YearMonth before_first{2013, 1};
  YearMonth before_last{2019, 12};
  YearMonth after_first{2020, 1};
  YearMonth after_last{2021, 12};
  double min_coverage = 0.5;

  Period before() const { return Period::span(PeriodLabel::Before, before_first, before_last); }
  Period after() const { return Period::span(PeriodLabel::After, after_first, after_last); }
};

enum class FbMode { Estimate, Paper };

std::string_view to_string(FbMode mode) noexcept;
FbMode parse_fb_mode(std::string_view text);

struct MfpcaConfig {
  /// Explicit KP noise sd; when absent, kp_noise_scale x the FB innovation sd.
  std::optional<double> kp_noise_sd;
  double kp_noise_scale = 0.1;
  std::uint64_t seed = 1;
  std::size_t components = 1;
  double fb_min_coverage = 0.8;
  bool regime_switching = true;
};

struct ValuationConfig {
  SolverOptions solver;
  GrowthOptions growth;
  HorizonMap horizon = HorizonMap::Nearest;
  YearWindow payout_years;
};

struct DiagnosticsConfig {
  double kp_low = 40.0;
  double kp_high = 65.0;
  double fb_lo_pct = 33.0;
  double fb_hi_pct = 66.0;
  double cf_lo_pct = 33.0;
  double cf_hi_pct = 66.0;
  double alpha = 0.05;
  TestKind test = TestKind::Welch;
  bool emit_pooled = false;
};

struct RunConfig {
  InputPaths inputs;
  PeriodConfig periods;
  ScreeningConfig screening;
  FbMode fb_mode = FbMode::Estimate;
  MfpcaConfig mfpca;
  ValuationConfig valuation;
  DiagnosticsConfig diagnostics;
  std::filesystem::path output_dir = "out";
  unsigned threads = 1;

  /// Full serialization, including paths.
  nlohmann::json to_json() const;
  /// Analysis parameters only (no paths, no thread count); the basis of config_hash().
  nlohmann::json parameters_json() const;
  std::string config_hash() const;

  /// Missing keys take defaults, unknown keys are rejected (ConfigInvalid). Relative paths are
  /// resolved against `base_dir`.
  static RunConfig from_json(const nlohmann::json& json, const std::filesystem::path& base_dir = {});
};

/// Throws ConfigInvalid for an unreadable or malformed file.
RunConfig load_config(const std::filesystem::path& path);

/// Throws ConfigInvalid for out-of-range parameters.
void validate(const RunConfig& config);

}  // namespace resilience
