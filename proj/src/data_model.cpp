#include "resilience/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

#include "resilience/error.hpp"

namespace resilience {

void validate(const FirmId& firm) {
  if (firm.id.empty()) throw Error(ErrorCode::MalformedRow, "empty firm id");
  const bool three_digits =
      firm.sector.size() == 3 &&
      std::all_of(firm.sector.begin(), firm.sector.end(),
                  [](unsigned char c) { return std::isdigit(c) != 0; });
  if (!three_digits) {
    throw Error(ErrorCode::MalformedRow,
                "sector of firm '" + firm.id + "' is not a 3-digit NAICS code: '" + firm.sector + "'");
  }
}

std::string_view to_string(PeriodLabel label) noexcept {
  return label == PeriodLabel::Before ? "Before" : "After";
}

std::string_view to_string(ResilienceLabel label) noexcept {
  switch (label) {
    case ResilienceLabel::High: return "High";
    case ResilienceLabel::Medium: return "Medium";
    case ResilienceLabel::Low: return "Low";
  }
  return "Medium";
}

Period Period::span(PeriodLabel label, YearMonth first, YearMonth last) {
  if (last < first) throw Error(ErrorCode::InvalidArgument, "period ends before it starts");
  Period p{label, {}};
  for (int o = first.ordinal(); o <= last.ordinal(); ++o) p.months.push_back(YearMonth::from_ordinal(o));
  return p;
}

Period Period::before_covid() { return span(PeriodLabel::Before, {2013, 1}, {2019, 12}); }
Period Period::after_covid() { return span(PeriodLabel::After, {2020, 1}, {2021, 12}); }

bool Period::contains(YearMonth ym) const {
  return std::binary_search(months.begin(), months.end(), ym);
}

RatioPanel::RatioPanel(std::vector<FirmId> firms, std::vector<std::string> ratios,
                       std::vector<YearMonth> months)
    : firms_(std::move(firms)), ratios_(std::move(ratios)), months_(std::move(months)) {
  if (!std::is_sorted(months_.begin(), months_.end()) ||
      std::adjacent_find(months_.begin(), months_.end()) != months_.end()) {
    throw Error(ErrorCode::InvalidArgument, "month grid must be strictly increasing");
  }
  for (std::size_t i = 0; i < firms_.size(); ++i) {
    if (!firm_lookup_.emplace(firms_[i].id, i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate firm '" + firms_[i].id + "'");
    }
  }
  for (std::size_t i = 0; i < ratios_.size(); ++i) {
    if (!ratio_lookup_.emplace(ratios_[i], i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate ratio code '" + ratios_[i] + "'");
    }
  }
  const std::size_t n = firms_.size() * ratios_.size() * months_.size();
  values_.assign(n, 0.0);
  present_.assign(n, 0);
}

std::optional<std::size_t> RatioPanel::firm_index(std::string_view id) const {
  auto it = firm_lookup_.find(std::string(id));
  if (it == firm_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RatioPanel::ratio_index(std::string_view code) const {
  auto it = ratio_lookup_.find(std::string(code));
  if (it == ratio_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RatioPanel::month_index(YearMonth ym) const {
  auto it = std::lower_bound(months_.begin(), months_.end(), ym);
  if (it == months_.end() || *it != ym) return std::nullopt;
  return static_cast<std::size_t>(it - months_.begin());
}

std::size_t RatioPanel::present_count() const noexcept {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), std::uint8_t{1}));
}

std::map<std::string, std::string> RatioPanel::sector_map() const {
  std::map<std::string, std::string> out;
  for (const auto& f : firms_) out.emplace(f.id, f.sector);
  return out;
}

std::optional<std::size_t> CrossSection::ratio_index(std::string_view code) const {
  auto it = std::find(ratios.begin(), ratios.end(), code);
  if (it == ratios.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ratios.begin());
}

CrossSection CrossSection::select(std::span<const std::string> codes) const {
  CrossSection out;
  out.firms = firms;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(codes.size()));
  out.present.resize(present.rows(), static_cast<Eigen::Index>(codes.size()));
  for (std::size_t k = 0; k < codes.size(); ++k) {
    auto j = ratio_index(codes[k]);
    if (!j) throw Error(ErrorCode::UnknownRatio, "ratio '" + codes[k] + "' not in cross-section");
    out.ratios.push_back(codes[k]);
    out.values.col(static_cast<Eigen::Index>(k)) = values.col(static_cast<Eigen::Index>(*j));
    out.present.col(static_cast<Eigen::Index>(k)) = present.col(static_cast<Eigen::Index>(*j));
  }
  return out;
}

CrossSection time_average(const RatioPanel& panel, const Period& period, double min_coverage) {
  std::vector<std::size_t> cols;
  for (const auto& ym : period.months) {
    if (auto m = panel.month_index(ym)) cols.push_back(*m);
  }
  if (cols.empty()) {
    throw Error(ErrorCode::EmptyPeriod,
                "period " + std::string(to_string(period.label)) + " has no months on the panel grid");
  }
  const auto n_f = static_cast<Eigen::Index>(panel.n_firms());
  const auto n_r = static_cast<Eigen::Index>(panel.n_ratios());
  CrossSection out;
  out.firms = panel.firms();
  out.ratios = panel.ratios();
  out.values = Eigen::MatrixXd::Zero(n_f, n_r);
  out.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_f, n_r, false);
  const double needed = min_coverage * static_cast<double>(cols.size());
  for (Eigen::Index f = 0; f < n_f; ++f) {
    for (Eigen::Index r = 0; r < n_r; ++r) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t m : cols) {
        if (panel.has(f, r, m)) {
          sum += panel.value(f, r, m);
          ++count;
        }
      }
      if (count > 0 && static_cast<double>(count) >= needed) {
        out.values(f, r) = sum / static_cast<double>(count);
        out.present(f, r) = true;
      }
    }
  }
  return out;
}

ForecastPanel::ForecastPanel(std::vector<ForecastEntry> entries,
                             std::map<std::string, double> realized_eps_2019)
    : entries_(std::move(entries)), realized_(std::move(realized_eps_2019)) {
  auto key = [](const ForecastEntry& e) { return std::tie(e.firm, e.obs_date, e.fiscal_year); };
  std::stable_sort(entries_.begin(), entries_.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.fiscal_year < e.obs_date.year) {
      throw Error(ErrorCode::OutOfRange, "fiscal year " + std::to_string(e.fiscal_year) +
                                             " precedes observation date " + e.obs_date.to_string() +
                                             " for firm '" + e.firm + "'");
    }
    if (i > 0 && key(entries_[i - 1]) == key(e)) {
      throw Error(ErrorCode::DuplicateCell, "duplicate forecast (" + e.firm + ", " +
                                                e.obs_date.to_string() + ", " +
                                                std::to_string(e.fiscal_year) + ")");
    }
    auto [it, inserted] = ranges_.try_emplace(e.firm, i, i + 1);
    if (!inserted) it->second.second = i + 1;
  }
}

std::optional<double> ForecastPanel::find(std::string_view firm, Date obs_date, int fiscal_year) const {
  for (const auto& e : for_firm(firm)) {
    if (e.obs_date == obs_date && e.fiscal_year == fiscal_year) return e.eps;
  }
  return std::nullopt;
}

std::span<const ForecastEntry> ForecastPanel::for_firm(std::string_view firm) const {
  auto it = ranges_.find(firm);
  if (it == ranges_.end()) return {};
  return std::span<const ForecastEntry>(entries_).subspan(it->second.first,
                                                          it->second.second - it->second.first);
}

std::optional<double> ForecastPanel::realized_2019(std::string_view firm) const {
  auto it = realized_.find(std::string(firm));
  if (it == realized_.end()) return std::nullopt;
  return it->second;
}

Fundamentals::Fundamentals(std::vector<FundamentalsRow> rows) : rows_(std::move(rows)) {
  std::stable_sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.firm, a.year) < std::tie(b.firm, b.year);
  });
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (i > 0 && rows_[i - 1].firm == rows_[i].firm && rows_[i - 1].year == rows_[i].year) {
      throw Error(ErrorCode::DuplicateCell,
                  "duplicate fundamentals row (" + rows_[i].firm + ", " + std::to_string(rows_[i].year) + ")");
    }
    auto [it, inserted] = ranges_.try_emplace(rows_[i].firm, i, i + 1);
    if (!inserted) it->second.second = i + 1;
  }
}

std::span<const FundamentalsRow> Fundamentals::for_firm(std::string_view firm) const {
  auto it = ranges_.find(firm);
  if (it == ranges_.end()) return {};
  return std::span<const FundamentalsRow>(rows_).subspan(it->second.first,
                                                         it->second.second - it->second.first);
}

const FundamentalsRow* Fundamentals::find(std::string_view firm, int year) const {
  for (const auto& row : for_firm(firm)) {
    if (row.year == year) return &row;
  }
  return nullptr;
}

std::vector<std::string> Fundamentals::firm_ids() const {
  std::vector<std::string> out;
  out.reserve(ranges_.size());
  for (const auto& [firm, range] : ranges_) out.push_back(firm);
  return out;
}

PricePanel::PricePanel(std::vector<PriceRow> rows) : rows_(std::move(rows)) {
  std::stable_sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.firm, a.month) < std::tie(b.firm, b.month);
  });
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(r.close > 0.0) || !std::isfinite(r.close)) {
      throw Error(ErrorCode::OutOfRange, "non-positive price for (" + r.firm + ", " + r.month.to_string() + ")");
    }
    if (i > 0 && rows_[i - 1].firm == r.firm && rows_[i - 1].month == r.month) {
      throw Error(ErrorCode::DuplicateCell, "duplicate price (" + r.firm + ", " + r.month.to_string() + ")");
    }
  }
}

std::optional<double> PricePanel::find(std::string_view firm, YearMonth month) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), std::tie(firm, month),
                             [](const PriceRow& row, const auto& key) {
                               return std::tie(row.firm, row.month) < key;
                             });
  if (it == rows_.end() || it->firm != firm || it->month != month) return std::nullopt;
  return it->close;
}

}  // namespace resilience
