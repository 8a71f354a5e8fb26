#include "resilience/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <tuple>

#include "resilience/csv_io.hpp"
#include "resilience/error.hpp"
#include "resilience/hashing.hpp"
#include "resilience/ratio_catalog.hpp"
#include "resilience/report.hpp"

namespace resilience {

using nlohmann::json;

InputPaths InputPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "ratios.csv", dir / "affected.csv", dir / "forecasts.csv", dir / "fundamentals.csv",
          dir / "prices.csv"};
}

std::string_view to_string(FbMode mode) noexcept { return mode == FbMode::Estimate ? "estimate" : "paper"; }

FbMode parse_fb_mode(std::string_view text) {
  if (text == "estimate") return FbMode::Estimate;
  if (text == "paper" || text == "paper_loadings") return FbMode::Paper;
  throw Error(ErrorCode::ConfigInvalid, "unknown fb_mode '" + std::string(text) + "' (expected estimate or paper)");
}

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigInvalid, std::string(where) + " must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(ErrorCode::ConfigInvalid, "unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

json pair_json(double a, double b) { return json::array({a, b}); }

std::pair<double, double> read_pair(const json& obj, const char* key, std::pair<double, double> def) {
  if (!obj.contains(key)) return def;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::ConfigInvalid, std::string(key) + " must be a 2-element array");
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

YearMonth read_month(const json& v) { return YearMonth::parse(v.get<std::string>()); }

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

json screening_json(const ScreeningConfig& s) {
  json out;
  out["corr_threshold"] = s.corr_threshold;
  out["step1_rule"] = s.step1_rule.to_string();
  out["require_significance"] = s.require_significance;
  out["alpha"] = s.alpha;
  out["step2_components"] = s.step2_components;
  out["step2_target_count"] = s.step2_target_count ? json(*s.step2_target_count) : json(nullptr);
  json cats = json::object();
  for (const auto& [code, cat] : s.category_map) cats[code] = std::string(to_string(cat));
  out["category_map"] = cats;
  out["trim_pct"] = s.trim_pct;
  return out;
}

ScreeningConfig screening_from(const json& j) {
  check_keys(j,
             {"corr_threshold", "step1_rule", "require_significance", "alpha", "step2_components",
              "step2_target_count", "category_map", "trim_pct"},
             "screening");
  ScreeningConfig s;
  s.corr_threshold = j.value("corr_threshold", s.corr_threshold);
  if (j.contains("step1_rule")) s.step1_rule = ComponentRule::parse(j.at("step1_rule").get<std::string>());
  s.require_significance = j.value("require_significance", s.require_significance);
  s.alpha = j.value("alpha", s.alpha);
  s.step2_components = j.value("step2_components", s.step2_components);
  if (j.contains("step2_target_count") && !j.at("step2_target_count").is_null()) {
    s.step2_target_count = j.at("step2_target_count").get<std::size_t>();
  }
  if (j.contains("category_map")) {
    for (const auto& item : j.at("category_map").items()) {
      const auto cat = parse_category(item.value().get<std::string>());
      if (!cat) throw Error(ErrorCode::ConfigInvalid, "unknown category for ratio " + item.key());
      s.category_map.emplace(item.key(), *cat);
    }
  }
  s.trim_pct = j.value("trim_pct", s.trim_pct);
  return s;
}

}  // namespace

json RunConfig::parameters_json() const {
  json out;
  out["periods"] = {{"before", json::array({periods.before_first.to_string(), periods.before_last.to_string()})},
                    {"after", json::array({periods.after_first.to_string(), periods.after_last.to_string()})},
                    {"min_coverage", periods.min_coverage}};
  out["screening"] = screening_json(screening);
  out["fb_mode"] = std::string(to_string(fb_mode));
  out["mfpca"] = {{"kp_noise_sd", mfpca.kp_noise_sd ? json(*mfpca.kp_noise_sd) : json(nullptr)},
                  {"kp_noise_scale", mfpca.kp_noise_scale},
                  {"seed", mfpca.seed},
                  {"components", mfpca.components},
                  {"fb_min_coverage", mfpca.fb_min_coverage},
                  {"regime_switching", mfpca.regime_switching}};
  out["valuation"] = {{"epsilon", valuation.solver.epsilon},
                      {"r_max", valuation.solver.r_max},
                      {"growth_method", std::string(to_string(valuation.growth.method))},
                      {"outlier_rule", std::string(to_string(valuation.growth.outliers))},
                      {"trim_pct", valuation.growth.trim_pct},
                      {"mad_cutoff", valuation.growth.mad_cutoff},
                      {"growth_years", json::array({valuation.growth.first_year, valuation.growth.last_year})},
                      {"horizon_map", std::string(to_string(valuation.horizon))},
                      {"payout_years", json::array({valuation.payout_years.first, valuation.payout_years.last})}};
  out["diagnostics"] = {{"kp_cuts", pair_json(diagnostics.kp_low, diagnostics.kp_high)},
                        {"fb_percentiles", pair_json(diagnostics.fb_lo_pct, diagnostics.fb_hi_pct)},
                        {"cf_percentiles", pair_json(diagnostics.cf_lo_pct, diagnostics.cf_hi_pct)},
                        {"alpha", diagnostics.alpha},
                        {"test", std::string(to_string(diagnostics.test))},
                        {"emit_pooled", diagnostics.emit_pooled}};
  return out;
}

json RunConfig::to_json() const {
  json out = parameters_json();
  out["inputs"] = {{"ratios", inputs.ratios.generic_string()},
                   {"affected", inputs.affected.generic_string()},
                   {"forecasts", inputs.forecasts.generic_string()},
                   {"fundamentals", inputs.fundamentals.generic_string()},
                   {"prices", inputs.prices.generic_string()}};
  out["output_dir"] = output_dir.generic_string();
  out["threads"] = threads;
  return out;
}

std::string RunConfig::config_hash() const { return sha256_hex(dump_json(parameters_json())); }

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    check_keys(j,
               {"inputs", "periods", "screening", "fb_mode", "mfpca", "valuation", "diagnostics", "output_dir",
                "threads"},
               "config");
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      check_keys(in, {"ratios", "affected", "forecasts", "fundamentals", "prices"}, "inputs");
      auto path = [&](const char* key, std::filesystem::path& slot) {
        if (in.contains(key)) slot = in.at(key).get<std::string>();
      };
      path("ratios", c.inputs.ratios);
      path("affected", c.inputs.affected);
      path("forecasts", c.inputs.forecasts);
      path("fundamentals", c.inputs.fundamentals);
      path("prices", c.inputs.prices);
    }
    for (auto* p : {&c.inputs.ratios, &c.inputs.affected, &c.inputs.forecasts, &c.inputs.fundamentals,
                    &c.inputs.prices}) {
      *p = resolve(*p, base_dir);
    }
    if (j.contains("periods")) {
      const auto& p = j.at("periods");
      check_keys(p, {"before", "after", "min_coverage"}, "periods");
      auto span = [&](const char* key, YearMonth& first, YearMonth& last) {
        if (!p.contains(key)) return;
        const auto& v = p.at(key);
        if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::ConfigInvalid, std::string(key) + " must be [first, last]");
        first = read_month(v.at(0));
        last = read_month(v.at(1));
      };
      span("before", c.periods.before_first, c.periods.before_last);
      span("after", c.periods.after_first, c.periods.after_last);
      c.periods.min_coverage = p.value("min_coverage", c.periods.min_coverage);
    }
    if (j.contains("screening")) c.screening = screening_from(j.at("screening"));
    if (j.contains("fb_mode")) c.fb_mode = parse_fb_mode(j.at("fb_mode").get<std::string>());
    if (j.contains("mfpca")) {
      const auto& m = j.at("mfpca");
      check_keys(m, {"kp_noise_sd", "kp_noise_scale", "seed", "components", "fb_min_coverage", "regime_switching"},
                 "mfpca");
      if (m.contains("kp_noise_sd") && !m.at("kp_noise_sd").is_null()) c.mfpca.kp_noise_sd = m.at("kp_noise_sd").get<double>();
      c.mfpca.kp_noise_scale = m.value("kp_noise_scale", c.mfpca.kp_noise_scale);
      c.mfpca.seed = m.value("seed", c.mfpca.seed);
      c.mfpca.components = m.value("components", c.mfpca.components);
      c.mfpca.fb_min_coverage = m.value("fb_min_coverage", c.mfpca.fb_min_coverage);
      c.mfpca.regime_switching = m.value("regime_switching", c.mfpca.regime_switching);
    }
    if (j.contains("valuation")) {
      const auto& v = j.at("valuation");
      check_keys(v,
                 {"epsilon", "r_max", "growth_method", "outlier_rule", "trim_pct", "mad_cutoff", "growth_years",
                  "horizon_map", "payout_years"},
                 "valuation");
      c.valuation.solver.epsilon = v.value("epsilon", c.valuation.solver.epsilon);
      c.valuation.solver.r_max = v.value("r_max", c.valuation.solver.r_max);
      if (v.contains("growth_method")) c.valuation.growth.method = parse_growth_method(v.at("growth_method").get<std::string>());
      if (v.contains("outlier_rule")) c.valuation.growth.outliers = parse_outlier_rule(v.at("outlier_rule").get<std::string>());
      c.valuation.growth.trim_pct = v.value("trim_pct", c.valuation.growth.trim_pct);
      c.valuation.growth.mad_cutoff = v.value("mad_cutoff", c.valuation.growth.mad_cutoff);
      const auto gy = read_pair(v, "growth_years", {c.valuation.growth.first_year, c.valuation.growth.last_year});
      c.valuation.growth.first_year = static_cast<int>(gy.first);
      c.valuation.growth.last_year = static_cast<int>(gy.second);
      if (v.contains("horizon_map")) c.valuation.horizon = parse_horizon_map(v.at("horizon_map").get<std::string>());
      const auto py = read_pair(v, "payout_years", {c.valuation.payout_years.first, c.valuation.payout_years.last});
      c.valuation.payout_years = {static_cast<int>(py.first), static_cast<int>(py.second)};
    }
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      check_keys(d, {"kp_cuts", "fb_percentiles", "cf_percentiles", "alpha", "test", "emit_pooled"}, "diagnostics");
      std::tie(c.diagnostics.kp_low, c.diagnostics.kp_high) =
          read_pair(d, "kp_cuts", {c.diagnostics.kp_low, c.diagnostics.kp_high});
      std::tie(c.diagnostics.fb_lo_pct, c.diagnostics.fb_hi_pct) =
          read_pair(d, "fb_percentiles", {c.diagnostics.fb_lo_pct, c.diagnostics.fb_hi_pct});
      std::tie(c.diagnostics.cf_lo_pct, c.diagnostics.cf_hi_pct) =
          read_pair(d, "cf_percentiles", {c.diagnostics.cf_lo_pct, c.diagnostics.cf_hi_pct});
      c.diagnostics.alpha = d.value("alpha", c.diagnostics.alpha);
      if (d.contains("test")) c.diagnostics.test = parse_test_kind(d.at("test").get<std::string>());
      c.diagnostics.emit_pooled = d.value("emit_pooled", c.diagnostics.emit_pooled);
    }
    if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>(), base_dir);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigInvalid, "cannot read config '" + path.string() + "'");
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return RunConfig::from_json(j, std::filesystem::absolute(path).parent_path());
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
  if (c.periods.before_last < c.periods.before_first) fail("before period ends before it starts");
  if (c.periods.after_last < c.periods.after_first) fail("after period ends before it starts");
  if (!(c.periods.min_coverage > 0.0 && c.periods.min_coverage <= 1.0)) fail("periods.min_coverage must lie in (0, 1]");
  if (!(c.screening.corr_threshold >= 0.0 && c.screening.corr_threshold < 1.0)) {
    fail("screening.corr_threshold must lie in [0, 1)");
  }
  if (!(c.screening.alpha > 0.0 && c.screening.alpha < 1.0)) fail("screening.alpha must lie in (0, 1)");
  if (c.screening.step2_components < 3) fail("screening.step2_components must be at least 3");
  if (!(c.screening.trim_pct >= 0.0 && c.screening.trim_pct < 50.0)) fail("screening.trim_pct must lie in [0, 50)");
  if (c.mfpca.kp_noise_sd && !(*c.mfpca.kp_noise_sd >= 0.0)) fail("mfpca.kp_noise_sd must be >= 0");
  if (!(c.mfpca.kp_noise_scale >= 0.0)) fail("mfpca.kp_noise_scale must be >= 0");
  if (c.mfpca.components < 1) fail("mfpca.components must be at least 1");
  if (!(c.mfpca.fb_min_coverage > 0.0 && c.mfpca.fb_min_coverage <= 1.0)) fail("mfpca.fb_min_coverage must lie in (0, 1]");
  if (!(c.valuation.solver.epsilon > 0.0)) fail("valuation.epsilon must be > 0");
  if (!(c.valuation.growth.trim_pct >= 0.0 && c.valuation.growth.trim_pct < 50.0)) fail("valuation.trim_pct must lie in [0, 50)");
  if (!(c.valuation.growth.mad_cutoff > 0.0)) fail("valuation.mad_cutoff must be > 0");
  if (c.valuation.growth.last_year <= c.valuation.growth.first_year) fail("valuation.growth_years must span a year");
  if (c.valuation.payout_years.last < c.valuation.payout_years.first) fail("valuation.payout_years is empty");
  if (!(c.diagnostics.kp_low < c.diagnostics.kp_high)) fail("diagnostics.kp_cuts must be increasing");
  auto pct = [&](double lo, double hi, const char* name) {
    if (!(lo > 0.0 && lo < hi && hi < 100.0)) fail(std::string("diagnostics.") + name + " must satisfy 0 < lo < hi < 100");
  };
  pct(c.diagnostics.fb_lo_pct, c.diagnostics.fb_hi_pct, "fb_percentiles");
  pct(c.diagnostics.cf_lo_pct, c.diagnostics.cf_hi_pct, "cf_percentiles");
  if (!(c.diagnostics.alpha > 0.0 && c.diagnostics.alpha < 1.0)) fail("diagnostics.alpha must lie in (0, 1)");
  if (c.threads < 1) fail("threads must be at least 1");
}

}  // namespace resilience
