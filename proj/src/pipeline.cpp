#include "resilience/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include "resilience/csv_io.hpp"
#include "resilience/diagnostics.hpp"
#include "resilience/error.hpp"
#include "resilience/hashing.hpp"
#include "resilience/mfpca_composite.hpp"
#include "resilience/report.hpp"

namespace resilience::app {

using nlohmann::json;

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Screen: return "screen";
    case Stage::FbIndex: return "fb-index";
    case Stage::CfIndex: return "cf-index";
    case Stage::DiscountRate: return "discount-rate";
    case Stage::Diagnose: return "diagnose";
  }
  return "screen";
}

namespace {

constexpr const char* kPublishedTriple[3] = {"opmad", "pe_op_basic", "quick_ratio"};

std::filesystem::path manifest_path(const std::filesystem::path& out, Stage stage) {
  return out / "manifests" / (std::string(to_string(stage)) + ".json");
}

/// Splits content into lines, checks the header and hands each data row's fields to `row`.
template <class F>
void for_each_row(std::string_view content, std::string_view header, std::string_view source, F&& row) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool seen_header = false;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) {
        throw Error(ErrorCode::MalformedRow, std::string(source) + ": expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    try {
      row(split_fields(line));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!seen_header) throw Error(ErrorCode::MalformedRow, std::string(source) + ": missing header");
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::MalformedRow, "bad number '" + std::string(text) + "'");
  }
  return v;
}

double parse_optional_double(std::string_view text) {
  return text.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(text);
}

ResilienceLabel parse_label(std::string_view text) {
  if (text == "High") return ResilienceLabel::High;
  if (text == "Medium") return ResilienceLabel::Medium;
  if (text == "Low") return ResilienceLabel::Low;
  throw Error(ErrorCode::MalformedRow, "bad label '" + std::string(text) + "'");
}

DrStatus parse_status(std::string_view text) {
  for (auto s : {DrStatus::Solved, DrStatus::NoRoot, DrStatus::NonMonotone, DrStatus::MissingInput}) {
    if (text == to_string(s)) return s;
  }
  throw Error(ErrorCode::MalformedRow, "bad status '" + std::string(text) + "'");
}

void expect_fields(const std::vector<std::string_view>& fields, std::size_t n) {
  if (fields.size() != n) {
    throw Error(ErrorCode::MalformedRow, "expected " + std::to_string(n) + " fields, got " + std::to_string(fields.size()));
  }
}

json eigen_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

template <std::size_t N>
json array_json(const std::array<double, N>& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

std::string format_fb_series(const FbSeries& series) {
  std::string out = "firm_id,month,fb\n";
  for (std::size_t f = 0; f < series.firms.size(); ++f) {
    for (std::size_t m = 0; m < series.months.size(); ++m) {
      const auto fi = static_cast<Eigen::Index>(f);
      const auto mi = static_cast<Eigen::Index>(m);
      if (!series.present(fi, mi)) continue;
      out += series.firms[f];
      out += ',';
      out += series.months[m].to_string();
      out += ',';
      append_number(out, series.values(fi, mi));
      out += '\n';
    }
  }
  return out;
}

FbSeries parse_fb_series(std::string_view content) {
  struct Cell {
    std::size_t firm;
    YearMonth month;
    double value;
  };
  std::vector<std::string> firms;
  std::map<std::string, std::size_t> firm_index;
  std::set<YearMonth> months;
  std::vector<Cell> cells;
  for_each_row(content, "firm_id,month,fb", "fb_series.csv", [&](const std::vector<std::string_view>& f) {
    expect_fields(f, 3);
    auto [it, inserted] = firm_index.emplace(std::string(f[0]), firms.size());
    if (inserted) firms.emplace_back(f[0]);
    const YearMonth ym = YearMonth::parse(f[1]);
    months.insert(ym);
    cells.push_back({it->second, ym, parse_double(f[2])});
  });
  FbSeries out;
  out.firms = firms;
  out.months.assign(months.begin(), months.end());
  std::map<YearMonth, Eigen::Index> month_index;
  for (std::size_t i = 0; i < out.months.size(); ++i) month_index.emplace(out.months[i], static_cast<Eigen::Index>(i));
  const auto n = static_cast<Eigen::Index>(firms.size());
  const auto t = static_cast<Eigen::Index>(out.months.size());
  out.values = Eigen::MatrixXd::Zero(n, t);
  out.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, t, false);
  for (const auto& c : cells) {
    const auto fi = static_cast<Eigen::Index>(c.firm);
    const auto mi = month_index.at(c.month);
    if (out.present(fi, mi)) throw Error(ErrorCode::DuplicateCell, "fb_series.csv repeats " + firms[c.firm]);
    out.values(fi, mi) = c.value;
    out.present(fi, mi) = true;
  }
  return out;
}

std::vector<RhoRow> parse_rho_table(std::string_view content) {
  std::vector<RhoRow> out;
  for_each_row(content, "firm_id,rho,label", "rho.csv", [&](const std::vector<std::string_view>& f) {
    expect_fields(f, 3);
    out.push_back({std::string(f[0]), parse_double(f[1]), parse_label(f[2])});
  });
  return out;
}

std::vector<ValuationRecord> parse_dr_table(std::string_view content) {
  std::vector<ValuationRecord> out;
  for_each_row(content, "firm_id,month,r,status,b,g,e0,e1,e2,price", "dr.csv",
               [&](const std::vector<std::string_view>& f) {
                 expect_fields(f, 10);
                 ValuationRecord rec;
                 rec.firm = std::string(f[0]);
                 rec.month = YearMonth::parse(f[1]);
                 rec.r = parse_optional_double(f[2]);
                 rec.status = parse_status(f[3]);
                 rec.payout = parse_optional_double(f[4]);
                 rec.growth = parse_optional_double(f[5]);
                 for (std::size_t k = 0; k < 3; ++k) rec.eps[k] = parse_optional_double(f[6 + k]);
                 rec.price = parse_double(f[9]);
                 out.push_back(std::move(rec));
               });
  return out;
}

json to_json(const FbLoadings& l) {
  json out;
  out["period"] = std::string(to_string(l.period));
  out["ratios"] = {{"profitability", l.ratios.profitability},
                   {"valuation", l.ratios.valuation},
                   {"liquidity", l.ratios.liquidity}};
  out["weights"] = array_json(l.weights);
  out["provenance"] = std::string(to_string(l.provenance));
  if (l.provenance == LoadingProvenance::Estimated) {
    out["corr_with_pc1"] = array_json(l.corr_with_pc1);
    out["eigenvalue1"] = l.eigenvalue1;
    out["explained1"] = l.explained1;
  }
  return out;
}

Workspace::Workspace(RunConfig config, bool force)
    : config_(std::move(config)), config_hash_(config_.config_hash()), force_(force) {
  validate(config_);
}

void Workspace::check_inputs(Stage stage) const {
  std::vector<std::filesystem::path> needed;
  const auto& in = config_.inputs;
  switch (stage) {
    case Stage::Screen:
    case Stage::FbIndex: needed = {in.ratios}; break;
    case Stage::CfIndex: needed = {in.affected}; break;
    case Stage::DiscountRate: needed = {in.ratios, in.fundamentals, in.forecasts, in.prices}; break;
    case Stage::Diagnose: needed = {in.affected, in.forecasts}; break;
  }
  for (const auto& p : needed) {
    if (!std::filesystem::is_regular_file(p)) throw Error(ErrorCode::ConfigInvalid, "missing input file: " + p.string());
  }
}

const Workspace::Loaded<RatioPanel>& Workspace::ratios() {
  if (!ratios_) {
    const std::string text = read_file(config_.inputs.ratios);
    ratios_.emplace(Loaded<RatioPanel>{parse_ratio_panel(text, {}, config_.inputs.ratios.string()), sha256_hex(text)});
  }
  return *ratios_;
}

const Workspace::Loaded<AffectedShareMap>& Workspace::affected() {
  if (!affected_) {
    const std::string text = read_file(config_.inputs.affected);
    affected_.emplace(Loaded<AffectedShareMap>{parse_affected_shares(text, config_.inputs.affected.string()), sha256_hex(text)});
  }
  return *affected_;
}

const Workspace::Loaded<ForecastPanel>& Workspace::forecasts() {
  if (!forecasts_) {
    const std::string text = read_file(config_.inputs.forecasts);
    forecasts_.emplace(Loaded<ForecastPanel>{parse_forecasts(text, config_.inputs.forecasts.string()), sha256_hex(text)});
  }
  return *forecasts_;
}

const Workspace::Loaded<Fundamentals>& Workspace::fundamentals() {
  if (!fundamentals_) {
    const std::string text = read_file(config_.inputs.fundamentals);
    fundamentals_.emplace(Loaded<Fundamentals>{
        parse_fundamentals(text, config_.valuation.payout_years, config_.inputs.fundamentals.string()), sha256_hex(text)});
  }
  return *fundamentals_;
}

const Workspace::Loaded<PricePanel>& Workspace::prices() {
  if (!prices_) {
    const std::string text = read_file(config_.inputs.prices);
    prices_.emplace(Loaded<PricePanel>{parse_prices(text, config_.inputs.prices.string()), sha256_hex(text)});
  }
  return *prices_;
}

std::string Workspace::require_artifact(Stage producer, const std::string& artifact) const {
  const auto mpath = manifest_path(config_.output_dir, producer);
  if (!std::filesystem::is_regular_file(mpath)) {
    throw Error(ErrorCode::ArtifactMismatch,
                "no " + std::string(to_string(producer)) + " manifest in " + config_.output_dir.string() +
                    "; run '" + std::string(to_string(producer)) + "' first");
  }
  json manifest;
  try {
    manifest = json::parse(read_file(mpath));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ArtifactMismatch, "unreadable manifest " + mpath.string());
  }
  const std::string recorded = manifest.value("config_hash", std::string());
  if (recorded != config_hash_ && !force_) {
    throw Error(ErrorCode::ArtifactMismatch, std::string(to_string(producer)) +
                                                 " artifacts were produced under config " + recorded +
                                                 ", current config is " + config_hash_ + " (use --force to override)");
  }
  const auto path = config_.output_dir / artifact;
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::ArtifactMismatch, "missing artifact " + path.string());
  }
  const std::string hash = sha256_file(path);
  const auto& listed = manifest.value("artifacts", json::object());
  if (listed.contains(artifact) && listed.at(artifact).get<std::string>() != hash && !force_) {
    throw Error(ErrorCode::ArtifactMismatch, "artifact " + path.string() + " changed since its manifest was written");
  }
  return hash;
}

std::string Workspace::write_artifact(const std::string& name, const std::string& content) {
  write_file(config_.output_dir / name, content);
  return sha256_hex(content);
}

void Workspace::write_manifest(Stage stage, const json& inputs, const json& upstream, const json& artifacts) {
  json m;
  m["stage"] = std::string(to_string(stage));
  m["version"] = kVersion;
  m["config_hash"] = config_hash_;
  m["inputs"] = inputs;
  m["upstream"] = upstream;
  m["artifacts"] = artifacts;
  write_file(manifest_path(config_.output_dir, stage), dump_json(m));
}

void Workspace::run(Stage stage) {
  check_inputs(stage);
  switch (stage) {
    case Stage::Screen: run_screen(); break;
    case Stage::FbIndex: run_fb_index(); break;
    case Stage::CfIndex: run_cf_index(); break;
    case Stage::DiscountRate: run_discount_rate(); break;
    case Stage::Diagnose: run_diagnose(); break;
  }
}

void Workspace::run_pipeline() {
  for (Stage s : {Stage::Screen, Stage::FbIndex, Stage::CfIndex, Stage::DiscountRate, Stage::Diagnose}) check_inputs(s);
  if (config_.fb_mode == FbMode::Estimate) run(Stage::Screen);
  for (Stage s : {Stage::FbIndex, Stage::CfIndex, Stage::DiscountRate, Stage::Diagnose}) run(s);
}

void Workspace::run_screen() {
  const auto& panel = ratios();
  CrossSection cross = time_average(panel.value, config_.periods.before(), config_.periods.min_coverage);
  if (config_.screening.trim_pct > 0.0) winsorize_columns(cross, config_.screening.trim_pct);
  const Step1Result step1 = screen_step1(cross, config_.screening);
  std::vector<std::string> survivors;
  for (const auto& s : step1.survivors) survivors.push_back(s.code);
  const Step2Result step2 = screen_step2(cross, survivors, config_.screening);

  json out;
  out["period"] = "Before";
  out["config_hash"] = config_hash_;
  json s1;
  s1["components"] = step1.components;
  s1["rule"] = config_.screening.step1_rule.to_string();
  s1["rows_used"] = step1.pca.kept_rows.size();
  s1["eigenvalues"] = eigen_json(step1.pca.eigenvalues);
  json ratios_json = json::array();
  const std::set<std::string> survived(survivors.begin(), survivors.end());
  for (const auto& r : step1.all) {
    ratios_json.push_back({{"code", r.code},
                           {"category", std::string(to_string(r.category))},
                           {"max_abs_corr", r.max_abs_corr},
                           {"component", r.component + 1},
                           {"p_value", r.p_value},
                           {"survived", survived.count(r.code) > 0}});
  }
  s1["ratios"] = ratios_json;
  s1["survivors"] = survivors;
  out["step1"] = s1;
  json s2;
  s2["candidates"] = step2.candidates;
  s2["eigenvalues"] = eigen_json(step2.pca.eigenvalues);
  json comps = json::array();
  for (const auto& c : step2.components) {
    comps.push_back({{"component", c.component + 1},
                     {"category", c.category ? json(std::string(to_string(*c.category))) : json(nullptr)},
                     {"correlated", c.correlated}});
  }
  s2["components"] = comps;
  out["step2"] = s2;
  out["triple"] = {{"profitability", step2.triple.profitability},
                   {"valuation", step2.triple.valuation},
                   {"liquidity", step2.triple.liquidity}};
  const std::string hash = write_artifact("screen.json", dump_json(out));
  write_manifest(Stage::Screen, {{"ratios", panel.hash}}, json::object(), {{"screen.json", hash}});
  std::cerr << "screen: " << survivors.size() << " survivors, triple " << step2.triple.profitability << " / "
            << step2.triple.valuation << " / " << step2.triple.liquidity << "\n";
}

void Workspace::run_fb_index() {
  const auto& panel = ratios();
  json upstream = json::object();
  FbTriple triple{kPublishedTriple[0], kPublishedTriple[1], kPublishedTriple[2]};
  FbLoadings before;
  FbLoadings after;
  const Period before_period = config_.periods.before();
  const Period after_period = config_.periods.after();
  if (config_.fb_mode == FbMode::Estimate) {
    upstream["screen.json"] = require_artifact(Stage::Screen, "screen.json");
    const json screen = json::parse(read_file(config_.output_dir / "screen.json"));
    const auto& t = screen.at("triple");
    triple = {t.at("profitability").get<std::string>(), t.at("valuation").get<std::string>(),
              t.at("liquidity").get<std::string>()};
    const auto codes = triple.codes();
    before = fit_fb_loadings(time_average(panel.value, before_period, config_.periods.min_coverage).select(codes),
                             PeriodLabel::Before);
    after = fit_fb_loadings(time_average(panel.value, after_period, config_.periods.min_coverage).select(codes),
                            PeriodLabel::After);
  } else {
    before = paper_loadings(PeriodLabel::Before);
    after = paper_loadings(PeriodLabel::After);
  }
  FbSeries series;
  if (config_.mfpca.regime_switching) {
    series = fb_index_regimes(panel.value, before, before_period, after, after_period, config_.periods.min_coverage);
  } else {
    const Period whole = Period::span(PeriodLabel::Before, config_.periods.before_first, config_.periods.after_last);
    series = fb_index(panel.value, before, whole, config_.periods.min_coverage);
  }
  json out;
  out["mode"] = std::string(to_string(config_.fb_mode));
  out["regime_switching"] = config_.mfpca.regime_switching;
  out["before"] = to_json(before);
  out["after"] = to_json(after);
  json std_json = json::array();
  for (const auto& s : series.standardization) {
    std_json.push_back({{"period", std::string(to_string(s.period))}, {"means", array_json(s.means)}, {"sds", array_json(s.sds)}});
  }
  out["standardization"] = std_json;
  out["config_hash"] = config_hash_;
  json artifacts;
  artifacts["fb_loadings.json"] = write_artifact("fb_loadings.json", dump_json(out));
  artifacts["fb_series.csv"] = write_artifact("fb_series.csv", format_fb_series(series));
  write_manifest(Stage::FbIndex, {{"ratios", panel.hash}}, upstream, artifacts);
  std::cerr << "fb-index: " << series.firms.size() << " firms x " << series.months.size() << " months\n";
}

void Workspace::run_cf_index() {
  json upstream;
  upstream["fb_series.csv"] = require_artifact(Stage::FbIndex, "fb_series.csv");
  const FbSeries fb_series = parse_fb_series(read_file(config_.output_dir / "fb_series.csv"));
  const auto& shares = affected();
  const VariateSeries fb = prepare_fb_variate(fb_series, config_.mfpca.fb_min_coverage);
  const double noise = config_.mfpca.kp_noise_sd ? *config_.mfpca.kp_noise_sd
                                                 : config_.mfpca.kp_noise_scale * fb_innovation_sd(fb);
  const VariateSeries kp = build_kp_series(shares.value, fb.grid, noise, config_.mfpca.seed);
  const auto [kp_a, fb_a] = align_variates(kp, fb);
  const std::size_t m = config_.mfpca.components;
  const UfpcaResult kp_fit = ufpca(kp_a, m);
  const UfpcaResult fb_fit = ufpca(fb_a, m);
  const CompositeResult cf = mfpca_combine(kp_fit, fb_fit, m);

  std::vector<double> rho(cf.rho.data(), cf.rho.data() + cf.rho.size());
  const auto labels = categorize_cf(rho, config_.diagnostics.cf_lo_pct, config_.diagnostics.cf_hi_pct);
  std::string rho_csv = "firm_id,rho,label\n";
  for (std::size_t i = 0; i < cf.firms.size(); ++i) {
    rho_csv += cf.firms[i];
    rho_csv += ',';
    append_number(rho_csv, rho[i]);
    rho_csv += ',';
    rho_csv += to_string(labels[i]);
    rho_csv += '\n';
  }
  auto shares_of = [](const Eigen::VectorXd& ev, std::size_t k) {
    json out = json::array();
    const double total = ev.sum();
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(ev.size(), static_cast<Eigen::Index>(k)); ++i) {
      out.push_back(total > 0.0 ? ev(i) / total : 0.0);
    }
    return out;
  };
  json scree;
  scree["nu"] = eigen_json(cf.nu);
  scree["explained"] = eigen_json(cf.explained);
  scree["m_used"] = cf.m_used;
  scree["n_firms"] = cf.firms.size();
  scree["n_months"] = kp_a.grid.size();
  scree["kp_noise_sd"] = noise;
  scree["kp_explained"] = shares_of(kp_fit.eigenvalues, 5);
  scree["fb_explained"] = shares_of(fb_fit.eigenvalues, 5);
  json zeta;
  json zk = json::array();
  json zf = json::array();
  for (std::size_t k = 0; k < m; ++k) {
    zk.push_back(cf.zeta(static_cast<Eigen::Index>(k)));
    zf.push_back(cf.zeta(static_cast<Eigen::Index>(m + k)));
  }
  zeta["KP"] = zk;
  zeta["FB"] = zf;
  zeta["m_used"] = cf.m_used;
  zeta["config_hash"] = config_hash_;
  scree["config_hash"] = config_hash_;
  json artifacts;
  artifacts["rho.csv"] = write_artifact("rho.csv", rho_csv);
  artifacts["scree.json"] = write_artifact("scree.json", dump_json(scree));
  artifacts["zeta.json"] = write_artifact("zeta.json", dump_json(zeta));
  write_manifest(Stage::CfIndex, {{"affected", shares.hash}}, upstream, artifacts);
  std::cerr << "cf-index: " << cf.firms.size() << " firms, first component explains " << cf.explained(0) << "\n";
}

void Workspace::run_discount_rate() {
  const auto& panel = ratios();
  const auto& fund = fundamentals();
  const auto& fc = forecasts();
  const auto& px = prices();
  const auto payouts = payout_ratios(fund.value, config_.valuation.payout_years);
  GrowthOptions growth = config_.valuation.growth;
  growth.skip_empty = true;
  const SectorGrowth sg = sector_growth(fund.value, panel.value.sector_map(), growth);
  BatchOptions options;
  options.solver = config_.valuation.solver;
  options.horizon = config_.valuation.horizon;
  options.threads = config_.threads;
  const auto records = batch_solve(px.value, fc.value, payouts, sg.by_firm, options);

  std::map<std::string, std::size_t> counts;
  for (auto s : {DrStatus::Solved, DrStatus::NoRoot, DrStatus::NonMonotone, DrStatus::MissingInput}) {
    counts[std::string(to_string(s))] = 0;
  }
  for (const auto& r : records) ++counts[std::string(to_string(r.status))];
  json summary;
  summary["status_counts"] = counts;
  summary["sector_growth"] = sg.by_sector;
  summary["firms_with_payout"] = payouts.size();
  summary["config_hash"] = config_hash_;
  json artifacts;
  artifacts["dr.csv"] = write_artifact("dr.csv", format_dr_table(records));
  artifacts["dr_summary.json"] = write_artifact("dr_summary.json", dump_json(summary));
  write_manifest(Stage::DiscountRate,
                 {{"ratios", panel.hash}, {"fundamentals", fund.hash}, {"forecasts", fc.hash}, {"prices", px.hash}},
                 json::object(), artifacts);
  std::cerr << "discount-rate: " << counts["Solved"] << " of " << records.size() << " firm-months solved\n";
}

void Workspace::run_diagnose() {
  json upstream;
  upstream["fb_series.csv"] = require_artifact(Stage::FbIndex, "fb_series.csv");
  upstream["rho.csv"] = require_artifact(Stage::CfIndex, "rho.csv");
  upstream["dr.csv"] = require_artifact(Stage::DiscountRate, "dr.csv");
  const auto& shares = affected();
  const auto& fc = forecasts();
  const auto& d = config_.diagnostics;

  const FbSeries fb = parse_fb_series(read_file(config_.output_dir / "fb_series.csv"));
  const auto fb_means = fb.firm_means(config_.periods.after());
  std::map<std::string, double> fb_avg;
  for (std::size_t i = 0; i < fb.firms.size(); ++i) {
    if (fb_means[i]) fb_avg.emplace(fb.firms[i], *fb_means[i]);
  }
  const auto rho_rows = parse_rho_table(read_file(config_.output_dir / "rho.csv"));
  std::vector<std::string> rho_firms;
  std::vector<double> rho;
  for (const auto& r : rho_rows) {
    rho_firms.push_back(r.firm);
    rho.push_back(r.rho);
  }
  const auto records = parse_dr_table(read_file(config_.output_dir / "dr.csv"));
  std::vector<FirmMonthValue> rates;
  for (const auto& r : records) {
    if (r.status == DrStatus::Solved) rates.push_back({r.firm, r.month, r.r});
  }

  std::map<IndexKind, GroupAssignment> groups;
  groups.emplace(IndexKind::KP, categorize_kp(shares.value, d.kp_low, d.kp_high));
  groups.emplace(IndexKind::FB, categorize_fb(fb_avg, d.fb_lo_pct, d.fb_hi_pct));
  groups.emplace(IndexKind::CF, categorize_cf_groups(rho_firms, rho, d.cf_lo_pct, d.cf_hi_pct));

  ReportBundle bundle;
  json rules = json::object();
  json sizes = json::object();
  for (const auto& [kind, g] : groups) {
    const std::string key(to_string(kind));
    bundle.growth[kind] = expectation_series(fc.value, g, ExpectationMeasure::Growth);
    bundle.revision[kind] = expectation_series(fc.value, g, ExpectationMeasure::Revision);
    bundle.dr_means[kind] = group_mean_series(rates, g);
    bundle.comparisons[kind] = compare_groups(rates, g, d.test, d.alpha);
    if (d.emit_pooled) bundle.pooled[kind] = compare_groups(rates, g, TestKind::Pooled, d.alpha);
    rules[key] = g.rule;
    sizes[key] = {{"High", g.members(ResilienceLabel::High).size()},
                  {"Medium", g.members(ResilienceLabel::Medium).size()},
                  {"Low", g.members(ResilienceLabel::Low).size()}};
  }
  bundle.goodness = goodness_curve(bundle.comparisons, d.alpha);
  bundle.metadata["config_hash"] = config_hash_;
  bundle.metadata["version"] = kVersion;
  bundle.metadata["seeds"] = {{"kp_noise", config_.mfpca.seed}};
  bundle.metadata["rules"] = rules;
  bundle.metadata["group_sizes"] = sizes;
  bundle.metadata["test"] = std::string(to_string(d.test));
  bundle.metadata["alpha"] = d.alpha;
  bundle.metadata["pooled_emitted"] = d.emit_pooled;
  emit_report(bundle, config_.output_dir / "report");

  json artifacts;
  for (const char* name : {"growth_series.csv", "revision_series.csv", "dr_means.csv", "goodness.csv", "metadata.json"}) {
    artifacts[std::string("report/") + name] = sha256_file(config_.output_dir / "report" / name);
  }
  write_manifest(Stage::Diagnose, {{"affected", shares.hash}, {"forecasts", fc.hash}}, upstream, artifacts);
  std::cerr << "diagnose: report written to " << (config_.output_dir / "report").string() << "\n";
}

}  // namespace resilience::app
