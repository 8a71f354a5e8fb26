#include "resilience/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "resilience/error.hpp"
#include "resilience/ratio_catalog.hpp"

namespace resilience {

namespace {

/// Iterates the data lines of a CSV after checking its header.
class CsvReader {
 public:
  CsvReader(std::string_view content, std::string_view source, std::string_view header)
      : content_(content), source_(source) {
    std::string_view first;
    if (!next_line(first)) throw Error(ErrorCode::MalformedRow, std::string(source_) + ": missing header row");
    if (first != header) {
      throw Error(ErrorCode::MalformedRow, std::string(source_) + ": expected header '" +
                                               std::string(header) + "', got '" + std::string(first) + "'");
    }
  }

  /// Next non-empty data line split into exactly `n` fields.
  bool next(std::vector<std::string_view>& fields, std::size_t n) {
    std::string_view line;
    while (next_line(line)) {
      if (line.empty()) continue;
      fields.clear();
      std::size_t start = 0;
      while (true) {
        auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (fields.size() != n) fail("expected " + std::to_string(n) + " fields");
      for (auto f : fields) {
        if (f.empty()) fail("empty field");
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what, ErrorCode code = ErrorCode::MalformedRow) const {
    throw Error(code, std::string(source_) + ":" + std::to_string(line_no_) + ": " + what);
  }

  double number(std::string_view text) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
      fail("bad number '" + std::string(text) + "'");
    }
    return v;
  }

  int integer(std::string_view text) const {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) fail("bad integer '" + std::string(text) + "'");
    return v;
  }

  template <class Fn>
  auto wrap(Fn&& fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedRow) fail(e.what());
      throw;
    }
  }

 private:
  bool next_line(std::string_view& line) {
    if (pos_ >= content_.size()) return false;
    auto nl = content_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = content_.size();
    line = content_.substr(pos_, nl - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = nl + 1;
    ++line_no_;
    return true;
  }

  std::string_view content_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void append_number(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

std::string format_number(double value) {
  std::string s;
  append_number(s, value);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::string content;
  in.seekg(0, std::ios::end);
  content.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0, std::ios::beg);
  in.read(content.data(), static_cast<std::streamsize>(content.size()));
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read '" + path.string() + "'");
  return content;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

RatioPanel parse_ratio_panel(std::string_view content, const RatioLoadOptions& options,
                             std::string_view source) {
  const std::vector<std::string> schema = options.schema.empty() ? catalog_codes() : options.schema;
  std::unordered_map<std::string_view, std::size_t> schema_rank;
  for (std::size_t i = 0; i < schema.size(); ++i) schema_rank.emplace(schema[i], i);

  struct Cell {
    std::uint32_t firm;
    std::uint32_t ratio;
    int month;
    double value;
    std::size_t line;
  };
  std::vector<FirmId> firms;
  std::unordered_map<std::string_view, std::uint32_t> firm_lookup;
  std::vector<std::string_view> ratio_codes;
  std::unordered_map<std::string_view, std::uint32_t> ratio_lookup;
  std::vector<Cell> cells;

  CsvReader reader(content, source, "firm_id,sector,month,ratio_code,value");
  std::vector<std::string_view> f;
  std::size_t line = 1;
  while (reader.next(f, 5)) {
    ++line;
    auto firm_it = firm_lookup.find(f[0]);
    std::uint32_t firm_idx;
    if (firm_it == firm_lookup.end()) {
      FirmId firm{std::string(f[0]), std::string(f[1])};
      reader.wrap([&] { validate(firm); return 0; });
      firm_idx = static_cast<std::uint32_t>(firms.size());
      firms.push_back(std::move(firm));
      firm_lookup.emplace(f[0], firm_idx);
    } else {
      firm_idx = firm_it->second;
      if (firms[firm_idx].sector != f[1]) {
        reader.fail("firm '" + std::string(f[0]) + "' has conflicting sectors");
      }
    }
    auto ratio_it = ratio_lookup.find(f[3]);
    std::uint32_t ratio_idx;
    if (ratio_it == ratio_lookup.end()) {
      if (options.strict && !schema_rank.contains(f[3])) {
        reader.fail("ratio code '" + std::string(f[3]) + "' not in schema", ErrorCode::UnknownRatioCode);
      }
      ratio_idx = static_cast<std::uint32_t>(ratio_codes.size());
      ratio_codes.push_back(f[3]);
      ratio_lookup.emplace(f[3], ratio_idx);
    } else {
      ratio_idx = ratio_it->second;
    }
    const YearMonth ym = reader.wrap([&] { return YearMonth::parse(f[2]); });
    cells.push_back({firm_idx, ratio_idx, ym.ordinal(), reader.number(f[4]), line});
  }

  // Schema codes first (schema order), then extensions by first appearance.
  std::vector<std::uint32_t> order(ratio_codes.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rank = [&](std::uint32_t i) {
    auto it = schema_rank.find(ratio_codes[i]);
    return it == schema_rank.end() ? schema.size() + i : it->second;
  };
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rank(a) < rank(b); });
  std::vector<std::uint32_t> new_index(order.size());
  std::vector<std::string> ratios;
  for (std::uint32_t k = 0; k < order.size(); ++k) {
    new_index[order[k]] = k;
    ratios.emplace_back(ratio_codes[order[k]]);
  }

  std::vector<int> ordinals;
  ordinals.reserve(cells.size());
  for (const auto& c : cells) ordinals.push_back(c.month);
  std::sort(ordinals.begin(), ordinals.end());
  ordinals.erase(std::unique(ordinals.begin(), ordinals.end()), ordinals.end());
  std::vector<YearMonth> months;
  for (int o : ordinals) months.push_back(YearMonth::from_ordinal(o));
  const int first_ordinal = ordinals.empty() ? 0 : ordinals.front();
  std::vector<std::size_t> month_pos(ordinals.empty() ? 0 : ordinals.back() - first_ordinal + 1);
  for (std::size_t i = 0; i < ordinals.size(); ++i) month_pos[ordinals[i] - first_ordinal] = i;

  RatioPanel panel(std::move(firms), std::move(ratios), std::move(months));
  for (const auto& c : cells) {
    const std::size_t r = new_index[c.ratio];
    const std::size_t m = month_pos[c.month - first_ordinal];
    if (panel.has(c.firm, r, m)) {
      throw Error(ErrorCode::DuplicateCell,
                  std::string(source) + ":" + std::to_string(c.line) + ": duplicate cell (" +
                      panel.firms()[c.firm].id + ", " + panel.ratios()[r] + ", " +
                      panel.months()[m].to_string() + ")");
    }
    panel.set(c.firm, r, m, c.value);
  }
  return panel;
}

AffectedShareMap parse_affected_shares(std::string_view content, std::string_view source) {
  AffectedShareMap out;
  CsvReader reader(content, source, "firm_id,affected_share");
  std::vector<std::string_view> f;
  while (reader.next(f, 2)) {
    const double share = reader.number(f[1]);
    if (share < 0.0 || share > 100.0) {
      reader.fail("affected share " + std::string(f[1]) + " outside [0, 100]", ErrorCode::OutOfRange);
    }
    if (!out.emplace(std::string(f[0]), share).second) {
      reader.fail("duplicate firm '" + std::string(f[0]) + "'", ErrorCode::DuplicateCell);
    }
  }
  return out;
}

ForecastPanel parse_forecasts(std::string_view content, std::string_view source) {
  std::vector<ForecastEntry> entries;
  CsvReader reader(content, source, "firm_id,obs_date,fiscal_year,eps");
  std::vector<std::string_view> f;
  while (reader.next(f, 4)) {
    ForecastEntry e;
    e.firm = std::string(f[0]);
    e.obs_date = reader.wrap([&] { return Date::parse(f[1]); });
    e.fiscal_year = reader.integer(f[2]);
    e.eps = reader.number(f[3]);
    entries.push_back(std::move(e));
  }
  ForecastPanel panel(std::move(entries));
  std::map<std::string, double> realized;
  for (const auto& e : panel.entries()) {
    // Entries are sorted by obs_date within a firm, so the last one wins.
    if (e.fiscal_year == 2019) realized[e.firm] = e.eps;
  }
  panel.set_realized_2019(std::move(realized));
  return panel;
}

Fundamentals parse_fundamentals(std::string_view content, YearWindow years, std::string_view source) {
  std::vector<FundamentalsRow> rows;
  CsvReader reader(content, source, "firm_id,year,dividends,repurchases,net_income,sales");
  std::vector<std::string_view> f;
  while (reader.next(f, 6)) {
    FundamentalsRow row;
    row.firm = std::string(f[0]);
    row.year = reader.integer(f[1]);
    if (row.year < years.first || row.year > years.last) {
      reader.fail("year " + std::to_string(row.year) + " outside [" + std::to_string(years.first) + ", " +
                      std::to_string(years.last) + "]",
                  ErrorCode::OutOfRange);
    }
    row.dividends = reader.number(f[2]);
    row.repurchases = reader.number(f[3]);
    row.net_income = reader.number(f[4]);
    row.sales = reader.number(f[5]);
    rows.push_back(std::move(row));
  }
  return Fundamentals(std::move(rows));
}

PricePanel parse_prices(std::string_view content, std::string_view source) {
  std::vector<PriceRow> rows;
  CsvReader reader(content, source, "firm_id,month,close");
  std::vector<std::string_view> f;
  while (reader.next(f, 3)) {
    PriceRow row;
    row.firm = std::string(f[0]);
    row.month = reader.wrap([&] { return YearMonth::parse(f[1]); });
    row.close = reader.number(f[2]);
    if (!(row.close > 0.0)) reader.fail("price must be positive", ErrorCode::OutOfRange);
    rows.push_back(std::move(row));
  }
  return PricePanel(std::move(rows));
}

RatioPanel load_ratio_panel(const std::filesystem::path& path, const RatioLoadOptions& options) {
  const std::string content = read_file(path);
  return parse_ratio_panel(content, options, path.string());
}

AffectedShareMap load_affected_shares(const std::filesystem::path& path) {
  return parse_affected_shares(read_file(path), path.string());
}

ForecastPanel load_forecasts(const std::filesystem::path& path) {
  return parse_forecasts(read_file(path), path.string());
}

Fundamentals load_fundamentals(const std::filesystem::path& path, YearWindow years) {
  return parse_fundamentals(read_file(path), years, path.string());
}

PricePanel load_prices(const std::filesystem::path& path) {
  return parse_prices(read_file(path), path.string());
}

std::string format_ratio_panel(const RatioPanel& panel) {
  std::string out = "firm_id,sector,month,ratio_code,value\n";
  std::vector<std::string> month_text;
  for (const auto& m : panel.months()) month_text.push_back(m.to_string());
  for (std::size_t f = 0; f < panel.n_firms(); ++f) {
    const auto& firm = panel.firms()[f];
    for (std::size_t r = 0; r < panel.n_ratios(); ++r) {
      for (std::size_t m = 0; m < panel.n_months(); ++m) {
        if (!panel.has(f, r, m)) continue;
        out += firm.id;
        out += ',';
        out += firm.sector;
        out += ',';
        out += month_text[m];
        out += ',';
        out += panel.ratios()[r];
        out += ',';
        append_number(out, panel.value(f, r, m));
        out += '\n';
      }
    }
  }
  return out;
}

std::string format_affected_shares(const AffectedShareMap& shares) {
  std::string out = "firm_id,affected_share\n";
  for (const auto& [firm, share] : shares) {
    out += firm;
    out += ',';
    append_number(out, share);
    out += '\n';
  }
  return out;
}

std::string format_forecasts(const ForecastPanel& forecasts) {
  std::string out = "firm_id,obs_date,fiscal_year,eps\n";
  for (const auto& e : forecasts.entries()) {
    out += e.firm;
    out += ',';
    out += e.obs_date.to_string();
    out += ',';
    out += std::to_string(e.fiscal_year);
    out += ',';
    append_number(out, e.eps);
    out += '\n';
  }
  return out;
}

std::string format_fundamentals(const Fundamentals& fundamentals) {
  std::string out = "firm_id,year,dividends,repurchases,net_income,sales\n";
  for (const auto& r : fundamentals.rows()) {
    out += r.firm;
    out += ',';
    out += std::to_string(r.year);
    for (double v : {r.dividends, r.repurchases, r.net_income, r.sales}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

std::string format_prices(const PricePanel& prices) {
  std::string out = "firm_id,month,close\n";
  for (const auto& r : prices.rows()) {
    out += r.firm;
    out += ',';
    out += r.month.to_string();
    out += ',';
    append_number(out, r.close);
    out += '\n';
  }
  return out;
}

}  // namespace resilience
