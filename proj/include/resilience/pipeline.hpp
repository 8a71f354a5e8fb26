#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "resilience/config.hpp"
#include "resilience/data_model.hpp"
#include "resilience/fb_screening.hpp"
#include "resilience/valuation.hpp"

namespace resilience::app {

inline constexpr const char* kVersion = "0.1.0";

enum class Stage { Screen, FbIndex, CfIndex, DiscountRate, Diagnose };

std::string_view to_string(Stage stage) noexcept;

/// Runs pipeline stages against one config. Inputs are read at most once per workspace; upstream
/// artifacts are always read back from the output directory so that stages run alone and inside
/// `pipeline` produce the same bytes.
class Workspace {
 public:
  explicit Workspace(RunConfig config, bool force = false);

  const RunConfig& config() const noexcept { return config_; }
  const std::string& config_hash() const noexcept { return config_hash_; }

  /// Throws ConfigInvalid naming the first missing input the stage needs.
  void check_inputs(Stage stage) const;

  void run(Stage stage);
  void run_pipeline();

 private:
  template <class T>
  struct Loaded {
    T value;
    std::string hash;
  };

  const Loaded<RatioPanel>& ratios();
  const Loaded<AffectedShareMap>& affected();
  const Loaded<ForecastPanel>& forecasts();
  const Loaded<Fundamentals>& fundamentals();
  const Loaded<PricePanel>& prices();

  void run_screen();
  void run_fb_index();
  void run_cf_index();
  void run_discount_rate();
  void run_diagnose();

  /// Checks the upstream stage's manifest and returns the hash of `artifact`.
  std::string require_artifact(Stage producer, const std::string& artifact) const;
  std::string write_artifact(const std::string& name, const std::string& content);
  void write_manifest(Stage stage, const nlohmann::json& inputs, const nlohmann::json& upstream,
                      const nlohmann::json& artifacts);

  RunConfig config_;
  std::string config_hash_;
  bool force_;
  std::optional<Loaded<RatioPanel>> ratios_;
  std::optional<Loaded<AffectedShareMap>> affected_;
  std::optional<Loaded<ForecastPanel>> forecasts_;
  std::optional<Loaded<Fundamentals>> fundamentals_;
  std::optional<Loaded<PricePanel>> prices_;
};

/// fb_series.csv: firm_id,month,fb for present firm-months.
std::string format_fb_series(const FbSeries& series);
FbSeries parse_fb_series(std::string_view content);

struct RhoRow {
  std::string firm;
  double rho = 0.0;
  ResilienceLabel label = ResilienceLabel::Medium;
};

std::vector<RhoRow> parse_rho_table(std::string_view content);
std::vector<ValuationRecord> parse_dr_table(std::string_view content);

nlohmann::json to_json(const FbLoadings& loadings);

}  // namespace resilience::app
