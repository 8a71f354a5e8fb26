#include "resilience/fb_screening.hpp"

#include <algorithm>
#include <cmath>

#include "resilience/error.hpp"
#include "resilience/stats.hpp"

namespace resilience {

namespace {

constexpr std::array kTargetCategories = {RatioCategory::Profitability, RatioCategory::Valuation,
                                          RatioCategory::Liquidity};

}  // namespace

RatioCategory ScreeningConfig::category_of(const std::string& code) const {
  if (!category_map.empty()) {
    auto it = category_map.find(code);
    if (it != category_map.end()) return it->second;
  } else if (const auto* info = find_ratio(code)) {
    return info->category;
  }
  throw Error(ErrorCode::ConfigInvalid, "ratio '" + code + "' has no category");
}

std::string_view to_string(LoadingProvenance provenance) noexcept {
  switch (provenance) {
    case LoadingProvenance::Estimated: return "Estimated";
    case LoadingProvenance::PaperBefore: return "PaperBefore";
    case LoadingProvenance::PaperAfter: return "PaperAfter";
  }
  return "Estimated";
}

void winsorize_columns(CrossSection& cross, double pct) {
  if (pct <= 0.0) return;
  for (Eigen::Index j = 0; j < cross.values.cols(); ++j) {
    std::vector<double> col;
    for (Eigen::Index i = 0; i < cross.values.rows(); ++i) {
      if (cross.present(i, j)) col.push_back(cross.values(i, j));
    }
    if (col.empty()) continue;
    const double lo = stats::percentile(col, pct);
    const double hi = stats::percentile(col, 100.0 - pct);
    for (Eigen::Index i = 0; i < cross.values.rows(); ++i) {
      if (cross.present(i, j)) cross.values(i, j) = std::clamp(cross.values(i, j), lo, hi);
    }
  }
}

Step1Result screen_step1(const CrossSection& cross, const ScreeningConfig& cfg) {
  Step1Result out;
  out.pca = pca(standardize(cross));
  out.components = select_components(out.pca, cfg.step1_rule);
  const std::size_t n = out.pca.kept_rows.size();
  for (std::size_t j = 0; j < cross.ratios.size(); ++j) {
    RatioCorrelation rc;
    rc.code = cross.ratios[j];
    rc.category = cfg.category_of(rc.code);
    for (std::size_t k = 0; k < out.components; ++k) {
      const double c = std::abs(out.pca.var_pc_corr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
      if (c > rc.max_abs_corr) {
        rc.max_abs_corr = c;
        rc.component = k;
      }
    }
    rc.p_value = stats::correlation_p_value(rc.max_abs_corr, n);
    out.all.push_back(rc);
  }
  for (const auto& rc : out.all) {
    if (cfg.corr_threshold <= 0.0) {
      out.survivors.push_back(rc);
      continue;
    }
    const bool strong = rc.max_abs_corr >= cfg.corr_threshold;
    const bool significant = !cfg.require_significance || rc.p_value < cfg.alpha;
    if (strong && significant) out.survivors.push_back(rc);
  }
  std::stable_sort(out.survivors.begin(), out.survivors.end(), [](const auto& a, const auto& b) {
    if (a.max_abs_corr != b.max_abs_corr) return a.max_abs_corr > b.max_abs_corr;
    return a.code < b.code;
  });
  if (out.survivors.empty()) {
    throw Error(ErrorCode::NothingSurvives, "no ratio reaches |corr| >= " + std::to_string(cfg.corr_threshold));
  }
  return out;
}

Step2Result screen_step2(const CrossSection& cross, const std::vector<std::string>& survivors,
                         const ScreeningConfig& cfg) {
  Step2Result out;
  out.candidates = survivors;
  if (cfg.step2_target_count && out.candidates.size() > *cfg.step2_target_count) {
    out.candidates.resize(*cfg.step2_target_count);
  }
  for (auto target : kTargetCategories) {
    const bool any = std::any_of(out.candidates.begin(), out.candidates.end(),
                                 [&](const auto& code) { return cfg.category_of(code) == target; });
    if (!any) {
      throw Error(ErrorCode::MissingCategory,
                  "no " + std::string(to_string(target)) + " ratio among step-2 candidates");
    }
  }

  out.pca = pca(standardize(cross.select(out.candidates)));
  const std::size_t n_comp = std::min(cfg.step2_components, out.pca.n_components());
  const auto& corr = out.pca.var_pc_corr;

  for (std::size_t k = 0; k < n_comp; ++k) {
    ComponentAssignment a;
    a.component = k;
    std::map<RatioCategory, std::pair<int, double>> tally;  // count, strongest |corr|
    for (std::size_t j = 0; j < out.candidates.size(); ++j) {
      const double c = std::abs(corr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
      if (c < cfg.corr_threshold) continue;
      a.correlated.push_back(out.candidates[j]);
      auto& [count, strongest] = tally[cfg.category_of(out.candidates[j])];
      ++count;
      strongest = std::max(strongest, c);
    }
    for (const auto& [category, stat] : tally) {
      if (!a.category) {
        a.category = category;
        continue;
      }
      const auto& best = tally.at(*a.category);
      if (stat.first > best.first || (stat.first == best.first && stat.second > best.second)) a.category = category;
    }
    out.components.push_back(std::move(a));
  }

  std::array<std::string, 3> picked;
  for (std::size_t t = 0; t < kTargetCategories.size(); ++t) {
    const auto target = kTargetCategories[t];
    auto comp = std::find_if(out.components.begin(), out.components.end(),
                             [&](const auto& a) { return a.category == target; });
    if (comp == out.components.end()) {
      throw Error(ErrorCode::MissingCategory, "no leading component maps to " + std::string(to_string(target)));
    }
    const auto k = static_cast<Eigen::Index>(comp->component);
    double best = -1.0;
    for (std::size_t j = 0; j < out.candidates.size(); ++j) {
      if (cfg.category_of(out.candidates[j]) != target) continue;
      const double c = std::abs(corr(static_cast<Eigen::Index>(j), k));
      if (c > best || (c == best && out.candidates[j] < picked[t])) {
        best = c;
        picked[t] = out.candidates[j];
      }
    }
  }
  out.triple = {picked[0], picked[1], picked[2]};
  return out;
}

FbLoadings fit_fb_loadings(const CrossSection& triple_cross, PeriodLabel period) {
  if (triple_cross.ratios.size() != 3) {
    throw Error(ErrorCode::InvalidArgument, "fit_fb_loadings expects exactly three ratios");
  }
  PcaResult r = pca(standardize(triple_cross));
  const std::array<std::optional<std::string>, 3> anchors = {triple_cross.ratios[0], std::nullopt, std::nullopt};
  r = apply_sign_convention(std::move(r), anchors);
  FbLoadings out;
  out.period = period;
  out.ratios = {triple_cross.ratios[0], triple_cross.ratios[1], triple_cross.ratios[2]};
  out.provenance = LoadingProvenance::Estimated;
  for (Eigen::Index j = 0; j < 3; ++j) {
    out.weights[static_cast<std::size_t>(j)] = r.loadings(j, 0);
    out.corr_with_pc1[static_cast<std::size_t>(j)] = r.var_pc_corr(j, 0);
  }
  out.eigenvalue1 = r.eigenvalues(0);
  out.explained1 = r.explained(0);
  return out;
}

FbLoadings paper_loadings(PeriodLabel period) {
  FbLoadings out;
  out.period = period;
  out.ratios = {"opmad", "pe_op_basic", "quick_ratio"};
  if (period == PeriodLabel::Before) {
    out.weights = {0.75, 0.45, -0.46};
    out.provenance = LoadingProvenance::PaperBefore;
  } else {
    out.weights = {0.75, 0.21, -0.55};
    out.provenance = LoadingProvenance::PaperAfter;
  }
  return out;
}

double fb_value(const std::array<double, 3>& weights, const std::array<double, 3>& z) noexcept {
  return weights[0] * z[0] + weights[1] * z[1] + weights[2] * z[2];
}

std::vector<std::optional<double>> FbSeries::firm_means(const Period& period) const {
  std::vector<std::optional<double>> out(firms.size());
  for (std::size_t f = 0; f < firms.size(); ++f) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t m = 0; m < months.size(); ++m) {
      const auto fi = static_cast<Eigen::Index>(f);
      const auto mi = static_cast<Eigen::Index>(m);
      if (present(fi, mi) && period.contains(months[m])) {
        sum += values(fi, mi);
        ++count;
      }
    }
    if (count > 0) out[f] = sum / count;
  }
  return out;
}

namespace {

struct RegimePart {
  const FbLoadings* loadings;
  const Period* period;
};

FbSeries build_series(const RatioPanel& panel, std::span<const RegimePart> parts, double min_coverage) {
  FbSeries out;
  for (const auto& firm : panel.firms()) out.firms.push_back(firm.id);

  struct Resolved {
    std::array<std::size_t, 3> ratio_idx;
    FbStandardization standardization;
    const FbLoadings* loadings;
  };
  std::vector<Resolved> resolved;
  std::vector<std::pair<std::size_t, std::size_t>> month_regime;  // panel month index, part index
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& part = parts[p];
    const auto codes = part.loadings->ratios.codes();
    Resolved r;
    r.loadings = part.loadings;
    for (std::size_t j = 0; j < 3; ++j) {
      auto idx = panel.ratio_index(codes[j]);
      if (!idx) throw Error(ErrorCode::UnknownRatio, "ratio '" + codes[j] + "' not in panel");
      r.ratio_idx[j] = *idx;
    }
    const std::vector<std::string> code_vec(codes.begin(), codes.end());
    const Standardized st = standardize(time_average(panel, *part.period, min_coverage).select(code_vec));
    r.standardization.period = part.period->label;
    for (std::size_t j = 0; j < 3; ++j) {
      r.standardization.means[j] = st.means(static_cast<Eigen::Index>(j));
      r.standardization.sds[j] = st.sds(static_cast<Eigen::Index>(j));
    }
    out.standardization.push_back(r.standardization);
    resolved.push_back(r);
    for (const auto& ym : part.period->months) {
      if (auto m = panel.month_index(ym)) month_regime.emplace_back(*m, p);
    }
  }
  std::sort(month_regime.begin(), month_regime.end());
  month_regime.erase(std::unique(month_regime.begin(), month_regime.end(),
                                 [](const auto& a, const auto& b) { return a.first == b.first; }),
                     month_regime.end());

  const auto n_f = static_cast<Eigen::Index>(panel.n_firms());
  const auto n_m = static_cast<Eigen::Index>(month_regime.size());
  out.values = Eigen::MatrixXd::Zero(n_f, n_m);
  out.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_f, n_m, false);
  for (const auto& [m, p] : month_regime) out.months.push_back(panel.months()[m]);

  for (Eigen::Index f = 0; f < n_f; ++f) {
    for (Eigen::Index c = 0; c < n_m; ++c) {
      const auto [m, p] = month_regime[static_cast<std::size_t>(c)];
      const auto& r = resolved[p];
      std::array<double, 3> z{};
      bool complete = true;
      for (std::size_t j = 0; j < 3 && complete; ++j) {
        if (!panel.has(static_cast<std::size_t>(f), r.ratio_idx[j], m)) {
          complete = false;
          break;
        }
        z[j] = (panel.value(static_cast<std::size_t>(f), r.ratio_idx[j], m) - r.standardization.means[j]) /
               r.standardization.sds[j];
      }
      if (!complete) continue;
      out.values(f, c) = fb_value(r.loadings->weights, z);
      out.present(f, c) = true;
    }
  }
  return out;
}

}  // namespace

FbSeries fb_index(const RatioPanel& panel, const FbLoadings& loadings, const Period& period,
                  double min_coverage) {
  const std::array parts = {RegimePart{&loadings, &period}};
  return build_series(panel, parts, min_coverage);
}

FbSeries fb_index_regimes(const RatioPanel& panel, const FbLoadings& before, const Period& before_period,
                          const FbLoadings& after, const Period& after_period, double min_coverage) {
  const std::array parts = {RegimePart{&before, &before_period}, RegimePart{&after, &after_period}};
  return build_series(panel, parts, min_coverage);
}

}  // namespace resilience
