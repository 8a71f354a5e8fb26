#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilience/data_model.hpp"
#include "resilience/pca_engine.hpp"
#include "resilience/ratio_catalog.hpp"

namespace resilience {

struct ScreeningConfig {
  /// |corr(ratio, PC)| cutoff. 0 disables the step-1 filter entirely.
  double corr_threshold = 0.5;
  ComponentRule step1_rule = ComponentRule::kaiser();
  /// Also require the ratio-PC correlation to be significant (Pearson t-test).
  bool require_significance = true;
  double alpha = 0.05;
  std::size_t step2_components = 3;
  /// Keep only the top-N step-1 survivors before step 2.
  std::optional<std::size_t> step2_target_count;
  /// Ratio code -> category. Empty means the built-in catalog.
  std::map<std::string, RatioCategory> category_map;
  /// Winsorize each time-averaged column at [P_trim, P_100-trim] before PCA. 0 = off.
  double trim_pct = 0.0;

  RatioCategory category_of(const std::string& code) const;
};

struct RatioCorrelation {
  std::string code;
  RatioCategory category = RatioCategory::Other;
  double max_abs_corr = 0.0;
  std::size_t component = 0;  // argmax component
  double p_value = 1.0;
};

struct Step1Result {
  PcaResult pca;
  std::size_t components = 0;
  std::vector<RatioCorrelation> all;        // input order
  std::vector<RatioCorrelation> survivors;  // descending max_abs_corr
};

/// Keeps ratios whose max |corr| with the selected components reaches the threshold.
/// Throws NothingSurvives on an empty selection.
Step1Result screen_step1(const CrossSection& cross, const ScreeningConfig& cfg);

struct FbTriple {
  std::string profitability;
  std::string valuation;
  std::string liquidity;

  std::array<std::string, 3> codes() const { return {profitability, valuation, liquidity}; }
  bool operator==(const FbTriple&) const = default;
};

struct ComponentAssignment {
  std::size_t component = 0;
  std::optional<RatioCategory> category;
  std::vector<std::string> correlated;  // ratios above threshold on this component
};

struct Step2Result {
  PcaResult pca;
  std::vector<std::string> candidates;
  std::vector<ComponentAssignment> components;
  FbTriple triple;
};

/// Picks one representative ratio per profitability / valuation / liquidity component.
/// `survivors` should be ordered by step-1 strength (used by step2_target_count).
/// Throws MissingCategory when a target category has no ratio or no component.
Step2Result screen_step2(const CrossSection& cross, const std::vector<std::string>& survivors,
                         const ScreeningConfig& cfg);

enum class LoadingProvenance { Estimated, PaperBefore, PaperAfter };

std::string_view to_string(LoadingProvenance provenance) noexcept;

struct FbLoadings {
  PeriodLabel period = PeriodLabel::Before;
  FbTriple ratios;
  std::array<double, 3> weights{};
  LoadingProvenance provenance = LoadingProvenance::Estimated;
  /// corr(ratio, PC1); only for estimated loadings.
  std::array<double, 3> corr_with_pc1{};
  double eigenvalue1 = 0.0;
  double explained1 = 0.0;
};

/// First-PC loadings of the triple, sign anchored on the profitability ratio.
FbLoadings fit_fb_loadings(const CrossSection& triple_cross, PeriodLabel period);

/// Published loadings on (opmad, pe_op_basic, quick_ratio); used verbatim.
FbLoadings paper_loadings(PeriodLabel period);

/// sum_j w_j z_j.
double fb_value(const std::array<double, 3>& weights, const std::array<double, 3>& z) noexcept;

struct FbStandardization {
  PeriodLabel period = PeriodLabel::Before;
  std::array<double, 3> means{};
  std::array<double, 3> sds{};
};

struct FbSeries {
  std::vector<std::string> firms;
  std::vector<YearMonth> months;
  Eigen::MatrixXd values;                                      // firm x month
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> present;  // same shape
  std::vector<FbStandardization> standardization;

  /// Mean of the present values for each firm over the given months (nullopt if none).
  std::vector<std::optional<double>> firm_means(const Period& period) const;
};

/// FB_it over the period months on the panel grid. z-scores use means and sample sds of
/// the period's time-averaged triple (complete rows only). Firm-months missing any triple
/// member are masked. Throws UnknownRatio if a triple ratio is not in the panel.
FbSeries fb_index(const RatioPanel& panel, const FbLoadings& loadings, const Period& period,
                  double min_coverage = 0.5);

/// Regime-switching series: Before months use `before`, After months use `after`.
FbSeries fb_index_regimes(const RatioPanel& panel, const FbLoadings& before, const Period& before_period,
                          const FbLoadings& after, const Period& after_period, double min_coverage = 0.5);

/// Winsorizes each column's present values at [P_pct, P_100-pct].
void winsorize_columns(CrossSection& cross, double pct);

}  // namespace resilience
