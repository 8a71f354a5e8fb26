#include "resilience/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>

#include "resilience/error.hpp"
#include "resilience/stats.hpp"

namespace resilience {

double payout_ratio(const Fundamentals& fundamentals, std::string_view firm, YearWindow window) {
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& row : fundamentals.for_firm(firm)) {
    if (row.year < window.first || row.year > window.last || row.net_income == 0.0) continue;
    sum += (row.dividends + row.repurchases) / row.net_income;
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::NoUsableYears, "firm " + std::string(firm) + " has no year with non-zero net income in " +
                                              std::to_string(window.first) + "-" + std::to_string(window.last));
  }
  return std::clamp(sum / static_cast<double>(used), 0.0, 1.0);
}

std::map<std::string, double> payout_ratios(const Fundamentals& fundamentals, YearWindow window) {
  std::map<std::string, double> out;
  for (const auto& firm : fundamentals.firm_ids()) {
    try {
      out.emplace(firm, payout_ratio(fundamentals, firm, window));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoUsableYears) throw;
    }
  }
  return out;
}

std::string_view to_string(GrowthMethod method) noexcept {
  return method == GrowthMethod::Span ? "span" : "yearly_mean";
}

std::string_view to_string(OutlierRule rule) noexcept { return rule == OutlierRule::Percentile ? "percentile" : "mad"; }

GrowthMethod parse_growth_method(std::string_view text) {
  if (text == "span") return GrowthMethod::Span;
  if (text == "yearly_mean") return GrowthMethod::YearlyMean;
  throw Error(ErrorCode::ConfigInvalid, "unknown growth method '" + std::string(text) + "'");
}

OutlierRule parse_outlier_rule(std::string_view text) {
  if (text == "percentile") return OutlierRule::Percentile;
  if (text == "mad") return OutlierRule::Mad;
  throw Error(ErrorCode::ConfigInvalid, "unknown outlier rule '" + std::string(text) + "'");
}

std::optional<double> raw_growth(const Fundamentals& fundamentals, std::string_view firm,
                                 const GrowthOptions& options) {
  const int span = options.last_year - options.first_year;
  if (span <= 0) throw Error(ErrorCode::InvalidArgument, "growth window must span at least one year");
  const auto* first = fundamentals.find(firm, options.first_year);
  const auto* last = fundamentals.find(firm, options.last_year);
  if (first == nullptr || last == nullptr || first->sales == 0.0) return std::nullopt;
  if (options.method == GrowthMethod::Span) {
    return ((last->sales - first->sales) / first->sales) / static_cast<double>(span);
  }
  double sum = 0.0;
  for (int y = options.first_year + 1; y <= options.last_year; ++y) {
    const auto* prev = fundamentals.find(firm, y - 1);
    const auto* cur = fundamentals.find(firm, y);
    if (prev == nullptr || cur == nullptr || prev->sales == 0.0) return std::nullopt;
    sum += (cur->sales - prev->sales) / prev->sales;
  }
  return sum / static_cast<double>(span);
}

double robust_sector_mean(std::span<const double> raw, const GrowthOptions& options) {
  if (raw.empty()) throw Error(ErrorCode::EmptySector, "no growth values to average");
  if (raw.size() < 3) return stats::mean(raw);
  std::vector<double> kept;
  if (options.outliers == OutlierRule::Percentile) {
    if (options.trim_pct < 0.0 || options.trim_pct >= 50.0) {
      throw Error(ErrorCode::InvalidArgument, "trim_pct must lie in [0, 50)");
    }
    const double lo = stats::percentile(raw, options.trim_pct);
    const double hi = stats::percentile(raw, 100.0 - options.trim_pct);
    for (double x : raw) {
      if (x >= lo && x <= hi) kept.push_back(x);
    }
  } else {
    const double med = stats::percentile(raw, 50.0);
    std::vector<double> dev;
    dev.reserve(raw.size());
    for (double x : raw) dev.push_back(std::abs(x - med));
    const double mad = stats::percentile(dev, 50.0);
    // MAD of 0 falls back to the mean absolute deviation scaled to the same normal consistency
    double scale = mad / 0.6745;
    if (mad == 0.0) scale = stats::mean(dev) * 1.2533141373155;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (scale == 0.0 || dev[i] / scale <= options.mad_cutoff) kept.push_back(raw[i]);
    }
  }
  if (kept.empty()) return stats::percentile(raw, 50.0);
  return stats::mean(kept);
}

SectorGrowth sector_growth(const Fundamentals& fundamentals, const std::map<std::string, std::string>& sectors,
                           const GrowthOptions& options) {
  std::map<std::string, std::vector<double>> raw;
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& [firm, sector] : sectors) {
    members[sector].push_back(firm);
    auto growth = raw_growth(fundamentals, firm, options);
    if (growth) raw[sector].push_back(*growth);
  }
  SectorGrowth out;
  for (const auto& [sector, firms] : members) {
    auto it = raw.find(sector);
    if (it == raw.end()) {
      if (options.skip_empty) continue;
      throw Error(ErrorCode::EmptySector, "sector " + sector + " has no firm with usable sales growth");
    }
    const double g = robust_sector_mean(it->second, options);
    out.by_sector.emplace(sector, g);
    for (const auto& firm : firms) out.by_firm.emplace(firm, g);
  }
  return out;
}

double pv(double r, double b, double g, const EpsTriple& eps) noexcept {
  const double d1 = 1.0 + r;
  const double d2 = d1 * d1;
  const double d3 = d2 * d1;
  return b * eps[0] / d1 + b * eps[1] / d2 + b * eps[2] / d3 + (1.0 + g) * b * eps[2] / ((r - g) * d3);
}

std::string_view to_string(DrStatus status) noexcept {
  switch (status) {
    case DrStatus::Solved: return "Solved";
    case DrStatus::NoRoot: return "NoRoot";
    case DrStatus::NonMonotone: return "NonMonotone";
    case DrStatus::MissingInput: return "MissingInput";
  }
  return "MissingInput";
}

namespace {

bool all_finite(const EpsTriple& eps) {
  return std::all_of(eps.begin(), eps.end(), [](double e) { return std::isfinite(e); });
}

}  // namespace

DrSolution implied_dr(double price, double b, double g, const EpsTriple& eps, const SolverOptions& options) {
  DrSolution out;
  if (!(std::isfinite(price) && price > 0.0) || !(b > 0.0 && b <= 1.0) || !std::isfinite(g) || !all_finite(eps)) {
    return out;
  }
  const double lo = g + options.epsilon;
  const double hi = options.r_max;
  if (!(lo > -1.0) || !(hi > lo)) {
    out.status = DrStatus::NoRoot;
    return out;
  }
  auto f = [&](double r) { return pv(r, b, g, eps) - price; };

  const bool mixed = *std::min_element(eps.begin(), eps.end()) < 0.0 && *std::max_element(eps.begin(), eps.end()) > 0.0;
  if (mixed) {
    const std::size_t n = std::max<std::size_t>(options.monotone_samples, 2);
    const double ratio = std::pow((hi - g) / options.epsilon, 1.0 / static_cast<double>(n - 1));
    int changes = 0;
    double prev = f(lo);
    double offset = options.epsilon;
    for (std::size_t k = 1; k < n; ++k) {
      offset *= ratio;
      const double cur = f(k + 1 == n ? hi : g + offset);
      if ((cur > 0.0) != (prev > 0.0)) ++changes;
      prev = cur;
    }
    if (changes > 1) {
      out.status = DrStatus::NonMonotone;
      return out;
    }
  }

  double a = lo;
  double fa = f(a);
  double bb = hi;
  double fb = f(bb);
  if (fa < 0.0 || fb > 0.0) {
    out.status = DrStatus::NoRoot;
    return out;
  }
  if (fa == 0.0) {
    out.status = DrStatus::Solved;
    out.r = a;
    return out;
  }

  const double ftol = price * options.rel_tol * 1e-3;
  double c = a;
  double fc = fa;
  double d = bb - a;
  double e = d;
  for (std::size_t iter = 1; iter <= 300; ++iter) {
    out.iterations = iter;
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = bb - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = bb;
      bb = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(bb) + 1e-300;
    const double xm = 0.5 * (c - bb);
    if (std::abs(xm) <= tol || std::abs(fb) <= ftol) break;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double rr = fb / fc;
        p = s * (2.0 * xm * qq * (qq - rr) - (bb - a) * (rr - 1.0));
        q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = bb;
    fa = fb;
    bb += std::abs(d) > tol ? d : std::copysign(tol, xm);
    fb = f(bb);
  }
  out.status = DrStatus::Solved;
  out.r = bb;
  return out;
}

std::string_view to_string(HorizonMap map) noexcept { return map == HorizonMap::Nearest ? "nearest" : "calendar"; }

HorizonMap parse_horizon_map(std::string_view text) {
  if (text == "nearest") return HorizonMap::Nearest;
  if (text == "calendar") return HorizonMap::Calendar;
  throw Error(ErrorCode::ConfigInvalid, "unknown horizon map '" + std::string(text) + "'");
}

namespace {

void fill_forecasts(ValuationRecord& rec, std::span<const ForecastEntry> entries, HorizonMap horizon) {
  // latest observation date inside the month
  const ForecastEntry* latest = nullptr;
  for (const auto& e : entries) {
    if (e.obs_date.year_month() == rec.month && (latest == nullptr || latest->obs_date < e.obs_date)) latest = &e;
  }
  if (latest == nullptr) return;
  std::vector<const ForecastEntry*> same_day;
  for (const auto& e : entries) {
    if (e.obs_date == latest->obs_date) same_day.push_back(&e);
  }
  const int base = rec.month.year;
  std::size_t filled = 0;
  for (const auto* e : same_day) {
    if (filled == 3) break;
    if (horizon == HorizonMap::Calendar) {
      const int h = e->fiscal_year - base;
      if (h >= 0 && h < 3) {
        rec.eps[static_cast<std::size_t>(h)] = e->eps;
        rec.fiscal_years[static_cast<std::size_t>(h)] = e->fiscal_year;
      }
    } else if (e->fiscal_year >= base) {
      rec.eps[filled] = e->eps;
      rec.fiscal_years[filled] = e->fiscal_year;
      ++filled;
    }
  }
}

void solve_one(ValuationRecord& rec, const ForecastPanel& forecasts, const std::map<std::string, double>& payouts,
               const std::map<std::string, double>& growths, const BatchOptions& options) {
  if (auto it = payouts.find(rec.firm); it != payouts.end()) rec.payout = it->second;
  if (auto it = growths.find(rec.firm); it != growths.end()) rec.growth = it->second;
  fill_forecasts(rec, forecasts.for_firm(rec.firm), options.horizon);
  if (!(rec.payout > 0.0) || std::isnan(rec.growth) || !all_finite(rec.eps)) {
    rec.status = DrStatus::MissingInput;
    return;
  }
  const DrSolution sol = implied_dr(rec.price, rec.payout, rec.growth, rec.eps, options.solver);
  rec.status = sol.status;
  rec.r = sol.r;
}

}  // namespace

std::vector<ValuationRecord> batch_solve(const PricePanel& prices, const ForecastPanel& forecasts,
                                         const std::map<std::string, double>& payouts,
                                         const std::map<std::string, double>& growths, const BatchOptions& options) {
  std::vector<ValuationRecord> out;
  out.reserve(prices.rows().size());
  for (const auto& row : prices.rows()) {
    ValuationRecord rec;
    rec.firm = row.firm;
    rec.month = row.month;
    rec.price = row.close;
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const ValuationRecord& x, const ValuationRecord& y) {
    return std::tie(x.firm, x.month) < std::tie(y.firm, y.month);
  });
  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(out.size(), 1));
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) solve_one(out[i], forecasts, payouts, growths, options);
  };
  if (workers == 1) {
    run(0, out.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (out.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(out.size(), begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

std::string format_dr_table(std::span<const ValuationRecord> records) {
  std::string out = "firm_id,month,r,status,b,g,e0,e1,e2,price\n";
  auto number = [&out](double v) {
    if (!std::isnan(v)) append_number(out, v);
  };
  for (const auto& rec : records) {
    out += rec.firm;
    out += ',';
    out += rec.month.to_string();
    out += ',';
    number(rec.r);
    out += ',';
    out += to_string(rec.status);
    out += ',';
    number(rec.payout);
    out += ',';
    number(rec.growth);
    for (double e : rec.eps) {
      out += ',';
      number(e);
    }
    out += ',';
    number(rec.price);
    out += '\n';
  }
  return out;
}

}  // namespace resilience
