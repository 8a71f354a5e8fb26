#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace resilience {

enum class RatioCategory {
  Capitalization,
  Efficiency,
  FinancialSoundness,
  Liquidity,
  Other,
  Profitability,
  Solvency,
  Valuation,
};

std::string_view to_string(RatioCategory category) noexcept;
std::optional<RatioCategory> parse_category(std::string_view text) noexcept;

struct RatioInfo {
  std::string_view code;
  std::string_view name;
  RatioCategory category;
};

/// WRDS financial ratio suite (71 monthly ratios in eight categories).
std::span<const RatioInfo> ratio_catalog() noexcept;

const RatioInfo* find_ratio(std::string_view code) noexcept;

/// Codes of the whole catalog, in catalog order.
std::vector<std::string> catalog_codes();

}  // namespace resilience
