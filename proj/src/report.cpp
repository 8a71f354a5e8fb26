#include "resilience/report.hpp"

#include <cmath>

#include "resilience/csv_io.hpp"
#include "resilience/error.hpp"

namespace resilience {

namespace {

void number(std::string& out, double v) {
  if (!std::isnan(v)) append_number(out, v);
}

}  // namespace

std::string dump_json(const nlohmann::json& value) { return value.dump(2) + "\n"; }

std::string format_expectation_csv(const std::map<IndexKind, std::vector<ExpectationRow>>& rows) {
  std::string out = "index,group,month,fiscal_year,mean,n\n";
  for (const auto& [kind, list] : rows) {
    for (const auto& row : list) {
      out += to_string(kind);
      out += ',';
      out += to_string(row.group);
      out += ',';
      out += row.month.to_string();
      out += ',';
      out += std::to_string(row.fiscal_year);
      out += ',';
      number(out, row.mean);
      out += ',';
      out += std::to_string(row.n);
      out += '\n';
    }
  }
  return out;
}

std::string format_dr_means_csv(const ReportBundle& bundle) {
  const bool with_pooled = !bundle.pooled.empty();
  std::string out = "index,month,mean_high,mean_low,n_high,n_low,crossing,t_stat,dof,p_value,significant";
  if (with_pooled) out += ",pooled_t,pooled_p";
  out += '\n';
  for (const auto& [kind, means] : bundle.dr_means) {
    const auto cmp_it = bundle.comparisons.find(kind);
    const auto pooled_it = bundle.pooled.find(kind);
    for (std::size_t i = 0; i < means.size(); ++i) {
      const auto& row = means[i];
      const MeanComparison* cmp = nullptr;
      if (cmp_it != bundle.comparisons.end() && i < cmp_it->second.size() && cmp_it->second[i].month == row.month) {
        cmp = &cmp_it->second[i];
      }
      out += to_string(kind);
      out += ',';
      out += row.month.to_string();
      out += ',';
      number(out, row.mean_high);
      out += ',';
      number(out, row.mean_low);
      out += ',' + std::to_string(row.n_high) + ',' + std::to_string(row.n_low) + ',';
      out += row.crossing ? '1' : '0';
      out += ',';
      if (cmp != nullptr) number(out, cmp->t_stat);
      out += ',';
      if (cmp != nullptr) number(out, cmp->dof);
      out += ',';
      if (cmp != nullptr) number(out, cmp->p_value);
      out += ',';
      out += cmp != nullptr && cmp->significant ? '1' : '0';
      if (with_pooled) {
        const MeanComparison* pooled = nullptr;
        if (pooled_it != bundle.pooled.end() && i < pooled_it->second.size() &&
            pooled_it->second[i].month == row.month) {
          pooled = &pooled_it->second[i];
        }
        out += ',';
        if (pooled != nullptr) number(out, pooled->t_stat);
        out += ',';
        if (pooled != nullptr) number(out, pooled->p_value);
      }
      out += '\n';
    }
  }
  return out;
}

std::string format_goodness_csv(const GoodnessCurve& goodness) {
  std::string out = "index,month,p_value,significant\n";
  for (const auto& point : goodness.points) {
    out += to_string(point.kind);
    out += ',';
    out += point.month.to_string();
    out += ',';
    number(out, point.p_value);
    out += ',';
    out += point.significant ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string format_metadata(const ReportBundle& bundle) {
  nlohmann::json meta = bundle.metadata;
  nlohmann::json fractions = nlohmann::json::object();
  for (const auto& [kind, fraction] : bundle.goodness.fraction) fractions[std::string(to_string(kind))] = fraction;
  meta["goodness_fraction"] = fractions;
  return dump_json(meta);
}

void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  write_file(dir / "growth_series.csv", format_expectation_csv(bundle.growth));
  write_file(dir / "revision_series.csv", format_expectation_csv(bundle.revision));
  write_file(dir / "dr_means.csv", format_dr_means_csv(bundle));
  write_file(dir / "goodness.csv", format_goodness_csv(bundle.goodness));
  write_file(dir / "metadata.json", format_metadata(bundle));
}

}  // namespace resilience
