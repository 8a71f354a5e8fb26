#include "resilience/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include "resilience/csv_io.hpp"
#include "resilience/error.hpp"
#include "resilience/mfpca_composite.hpp"
#include "resilience/stats.hpp"

namespace resilience {

std::string_view to_string(IndexKind kind) noexcept {
  switch (kind) {
    case IndexKind::KP: return "KP";
    case IndexKind::FB: return "FB";
    case IndexKind::CF: return "CF";
  }
  return "KP";
}

std::vector<std::string> GroupAssignment::members(ResilienceLabel label) const {
  std::vector<std::string> out;
  for (const auto& [firm, l] : labels) {
    if (l == label) out.push_back(firm);
  }
  return out;
}

namespace {

void check_percentiles(double lo, double hi) {
  if (!(lo > 0.0 && lo < hi && hi < 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < low percentile < high percentile < 100");
  }
}

std::string cut_text(std::string_view prefix, double lo, double hi) {
  return std::string(prefix) + "(" + format_number(lo) + "," + format_number(hi) + ")";
}

}  // namespace

GroupAssignment categorize_kp(const AffectedShareMap& shares, double low_cut, double high_cut) {
  if (!(low_cut < high_cut)) throw Error(ErrorCode::InvalidArgument, "KP cuts need low_cut < high_cut");
  GroupAssignment out;
  out.kind = IndexKind::KP;
  out.low = low_cut;
  out.high = high_cut;
  out.rule = cut_text("affected_share_threshold", low_cut, high_cut);
  for (const auto& [firm, share] : shares) {
    auto label = ResilienceLabel::Medium;
    if (share < low_cut) {
      label = ResilienceLabel::High;
    } else if (share > high_cut) {
      label = ResilienceLabel::Low;
    }
    out.labels.emplace(firm, label);
  }
  return out;
}

GroupAssignment categorize_fb(const std::map<std::string, double>& fb_average, double lo_pct, double hi_pct) {
  check_percentiles(lo_pct, hi_pct);
  GroupAssignment out;
  out.kind = IndexKind::FB;
  out.low = lo_pct;
  out.high = hi_pct;
  out.rule = cut_text("fb_percentile", lo_pct, hi_pct);
  if (fb_average.empty()) return out;
  std::vector<double> values;
  values.reserve(fb_average.size());
  for (const auto& kv : fb_average) values.push_back(kv.second);
  const double p_lo = stats::percentile(values, lo_pct);
  const double p_hi = stats::percentile(values, hi_pct);
  for (const auto& [firm, fb] : fb_average) {
    auto label = ResilienceLabel::Medium;
    if (fb > p_hi) {
      label = ResilienceLabel::High;
    } else if (fb < p_lo) {
      label = ResilienceLabel::Low;
    }
    out.labels.emplace(firm, label);
  }
  return out;
}

GroupAssignment categorize_cf_groups(std::span<const std::string> firms, std::span<const double> rho, double lo_pct,
                                     double hi_pct) {
  if (firms.size() != rho.size()) throw Error(ErrorCode::InvalidArgument, "firms and rho differ in length");
  check_percentiles(lo_pct, hi_pct);
  GroupAssignment out;
  out.kind = IndexKind::CF;
  out.low = lo_pct;
  out.high = hi_pct;
  out.rule = cut_text("cf_percentile", lo_pct, hi_pct);
  const auto labels = categorize_cf(rho, lo_pct, hi_pct);
  for (std::size_t i = 0; i < firms.size(); ++i) out.labels.emplace(firms[i], labels[i]);
  return out;
}

namespace {

/// Latest forecast of fiscal year h observed on or before t.
std::optional<double> latest_on_or_before(std::span<const ForecastEntry> entries, Date t, int h) {
  std::optional<double> out;
  for (const auto& e : entries) {
    if (t < e.obs_date) break;
    if (e.fiscal_year == h) out = e.eps;
  }
  return out;
}

std::optional<double> january_baseline(std::span<const ForecastEntry> entries, int year, int h) {
  for (const auto& e : entries) {
    if (e.obs_date.year == year && e.obs_date.month == 1 && e.fiscal_year == h) return e.eps;
    if (e.obs_date.year > year || (e.obs_date.year == year && e.obs_date.month > 1)) break;
  }
  return std::nullopt;
}

double growth_value(double forecast, double base, int h) {
  if (base == 0.0) throw Error(ErrorCode::ZeroBase, "realized 2019 EPS is zero");
  return (forecast - base) / base / static_cast<double>(h - 2019);
}

double revision_value(double forecast, double baseline) {
  if (baseline == 0.0) throw Error(ErrorCode::ZeroBaseline, "January baseline forecast is zero");
  return (forecast - baseline) / baseline;
}

}  // namespace

double annualized_growth(const ForecastPanel& forecasts, std::string_view firm, Date t, int h) {
  if (h <= 2019) throw Error(ErrorCode::InvalidArgument, "growth horizon must be after 2019");
  const auto base = forecasts.realized_2019(firm);
  if (!base) throw Error(ErrorCode::MissingForecast, "no realized 2019 EPS for firm " + std::string(firm));
  const auto forecast = latest_on_or_before(forecasts.for_firm(firm), t, h);
  if (!forecast) {
    throw Error(ErrorCode::MissingForecast,
                "no forecast of fiscal " + std::to_string(h) + " for firm " + std::string(firm) + " by " + t.to_string());
  }
  return growth_value(*forecast, *base, h);
}

double revision(const ForecastPanel& forecasts, std::string_view firm, Date t, int h) {
  const auto entries = forecasts.for_firm(firm);
  const auto forecast = latest_on_or_before(entries, t, h);
  if (!forecast) {
    throw Error(ErrorCode::MissingForecast,
                "no forecast of fiscal " + std::to_string(h) + " for firm " + std::string(firm) + " by " + t.to_string());
  }
  const auto baseline = january_baseline(entries, t.year, h);
  if (!baseline) {
    throw Error(ErrorCode::MissingBaseline, "no January " + std::to_string(t.year) + " forecast of fiscal " +
                                                std::to_string(h) + " for firm " + std::string(firm));
  }
  return revision_value(*forecast, *baseline);
}

namespace {

struct MonthBuckets {
  std::map<YearMonth, std::pair<std::vector<double>, std::vector<double>>> by_month;
};

MonthBuckets bucket(std::span<const FirmMonthValue> values, const GroupAssignment& groups) {
  MonthBuckets out;
  for (const auto& v : values) {
    auto& slot = out.by_month[v.month];
    auto it = groups.labels.find(v.firm);
    if (it == groups.labels.end() || std::isnan(v.value)) continue;
    if (it->second == ResilienceLabel::High) slot.first.push_back(v.value);
    if (it->second == ResilienceLabel::Low) slot.second.push_back(v.value);
  }
  // sums are order-dependent in floating point; sort so firm ordering cannot leak into the means
  for (auto& kv : out.by_month) {
    std::sort(kv.second.first.begin(), kv.second.first.end());
    std::sort(kv.second.second.begin(), kv.second.second.end());
  }
  return out;
}

}  // namespace

std::vector<GroupMeanRow> group_mean_series(std::span<const FirmMonthValue> values, const GroupAssignment& groups) {
  std::vector<GroupMeanRow> out;
  int prev_sign = 0;
  for (const auto& [month, pair] : bucket(values, groups).by_month) {
    GroupMeanRow row;
    row.month = month;
    row.n_high = pair.first.size();
    row.n_low = pair.second.size();
    if (row.n_high > 0) row.mean_high = stats::mean(pair.first);
    if (row.n_low > 0) row.mean_low = stats::mean(pair.second);
    if (row.n_high > 0 && row.n_low > 0) {
      const double diff = row.mean_high - row.mean_low;
      const int sign = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
      if (sign != 0) {
        row.crossing = prev_sign != 0 && sign != prev_sign;
        prev_sign = sign;
      }
    }
    out.push_back(row);
  }
  return out;
}

namespace {

void require_two(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::TooFewObservations, "t-test needs at least 2 observations per sample");
  }
}

TTest finish(double diff, double se, double dof) {
  TTest out;
  out.dof = dof;
  if (diff == 0.0) {
    out.t = 0.0;
    out.p = 1.0;
    return out;
  }
  out.t = se > 0.0 ? diff / se : std::copysign(std::numeric_limits<double>::infinity(), diff);
  out.p = stats::student_t_two_sided_p(out.t, dof);
  return out;
}

}  // namespace

TTest welch_test(std::span<const double> a, std::span<const double> b) {
  require_two(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = stats::sample_variance(a) / na;
  const double vb = stats::sample_variance(b) / nb;
  const double sum = va + vb;
  double dof = na + nb - 2.0;
  if (sum > 0.0) dof = sum * sum / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return finish(stats::mean(a) - stats::mean(b), std::sqrt(sum), dof);
}

TTest pooled_t(std::span<const double> a, std::span<const double> b) {
  require_two(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double dof = na + nb - 2.0;
  const double sp2 = ((na - 1.0) * stats::sample_variance(a) + (nb - 1.0) * stats::sample_variance(b)) / dof;
  return finish(stats::mean(a) - stats::mean(b), std::sqrt(sp2 * (1.0 / na + 1.0 / nb)), dof);
}

std::string_view to_string(TestKind kind) noexcept { return kind == TestKind::Welch ? "welch" : "pooled"; }

TestKind parse_test_kind(std::string_view text) {
  if (text == "welch") return TestKind::Welch;
  if (text == "pooled") return TestKind::Pooled;
  throw Error(ErrorCode::ConfigInvalid, "unknown test '" + std::string(text) + "'");
}

std::vector<MeanComparison> compare_groups(std::span<const FirmMonthValue> values, const GroupAssignment& groups,
                                           TestKind test, double alpha) {
  std::vector<MeanComparison> out;
  for (const auto& [month, pair] : bucket(values, groups).by_month) {
    MeanComparison row;
    row.month = month;
    row.n_high = pair.first.size();
    row.n_low = pair.second.size();
    if (row.n_high > 0) row.mean_high = stats::mean(pair.first);
    if (row.n_low > 0) row.mean_low = stats::mean(pair.second);
    if (row.n_high >= 2 && row.n_low >= 2) {
      const TTest r = test == TestKind::Welch ? welch_test(pair.first, pair.second) : pooled_t(pair.first, pair.second);
      row.t_stat = r.t;
      row.dof = r.dof;
      row.p_value = r.p;
      row.significant = r.p < alpha;
    }
    out.push_back(row);
  }
  return out;
}

GoodnessCurve goodness_curve(const std::map<IndexKind, std::vector<MeanComparison>>& comparisons, double alpha) {
  GoodnessCurve out;
  for (const auto& [kind, rows] : comparisons) {
    std::size_t defined = 0;
    std::size_t hits = 0;
    for (const auto& row : rows) {
      GoodnessPoint point;
      point.kind = kind;
      point.month = row.month;
      point.p_value = row.p_value;
      point.significant = !std::isnan(row.p_value) && row.p_value < alpha;
      if (!std::isnan(row.p_value)) ++defined;
      if (point.significant) ++hits;
      out.points.push_back(point);
    }
    out.fraction[kind] = defined == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(defined);
  }
  return out;
}

std::vector<ExpectationRow> expectation_series(const ForecastPanel& forecasts, const GroupAssignment& groups,
                                               ExpectationMeasure measure) {
  std::map<std::tuple<ResilienceLabel, YearMonth, int>, std::vector<double>> acc;
  for (const auto& [firm, label] : groups.labels) {
    const auto entries = forecasts.for_firm(firm);
    if (entries.empty()) continue;
    const auto base = forecasts.realized_2019(firm);
    std::map<std::pair<int, int>, double> baselines;
    for (const auto& e : entries) {
      if (e.obs_date.month == 1) baselines.try_emplace({e.obs_date.year, e.fiscal_year}, e.eps);
    }
    std::size_t i = 0;
    while (i < entries.size()) {
      // find the last observation date in this month
      const YearMonth ym = entries[i].obs_date.year_month();
      std::size_t end = i;
      while (end < entries.size() && entries[end].obs_date.year_month() == ym) ++end;
      const Date last = entries[end - 1].obs_date;
      for (std::size_t k = i; k < end; ++k) {
        const auto& e = entries[k];
        if (e.obs_date != last) continue;
        if (measure == ExpectationMeasure::Growth) {
          if (e.fiscal_year <= 2019 || !base || *base == 0.0) continue;
          acc[{label, ym, e.fiscal_year}].push_back(growth_value(e.eps, *base, e.fiscal_year));
        } else {
          auto it = baselines.find({ym.year, e.fiscal_year});
          if (e.fiscal_year < ym.year || it == baselines.end() || it->second == 0.0) continue;
          acc[{label, ym, e.fiscal_year}].push_back(revision_value(e.eps, it->second));
        }
      }
      i = end;
    }
  }
  std::vector<ExpectationRow> out;
  out.reserve(acc.size());
  for (auto& [key, vals] : acc) {
    std::sort(vals.begin(), vals.end());
    ExpectationRow row;
    row.group = std::get<0>(key);
    row.month = std::get<1>(key);
    row.fiscal_year = std::get<2>(key);
    row.mean = stats::mean(vals);
    row.n = vals.size();
    out.push_back(row);
  }
  return out;
}

}  // namespace resilience
