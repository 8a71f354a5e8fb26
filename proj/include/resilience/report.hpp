#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "resilience/diagnostics.hpp"

namespace resilience {

struct ReportBundle {
  std::map<IndexKind, std::vector<ExpectationRow>> growth;
  std::map<IndexKind, std::vector<ExpectationRow>> revision;
  std::map<IndexKind, std::vector<GroupMeanRow>> dr_means;
  std::map<IndexKind, std::vector<MeanComparison>> comparisons;
  /// Present only when the pooled test is requested alongside the primary one.
  std::map<IndexKind, std::vector<MeanComparison>> pooled;
  GoodnessCurve goodness;
  nlohmann::json metadata = nlohmann::json::object();
};

std::string format_expectation_csv(const std::map<IndexKind, std::vector<ExpectationRow>>& rows);
std::string format_dr_means_csv(const ReportBundle& bundle);
std::string format_goodness_csv(const GoodnessCurve& goodness);
std::string format_metadata(const ReportBundle& bundle);

/// Writes growth_series.csv, revision_series.csv, dr_means.csv, goodness.csv and metadata.json
/// under `dir`. Throws IoFailure.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Canonical JSON text (sorted keys, two-space indent, trailing newline).
std::string dump_json(const nlohmann::json& value);

}  // namespace resilience
