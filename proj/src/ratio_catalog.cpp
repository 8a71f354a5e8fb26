#include "resilience/ratio_catalog.hpp"

#include <array>

namespace resilience {

namespace {

using C = RatioCategory;

constexpr std::array kCatalog = {
    RatioInfo{"capital_ratio", "Capitalization Ratio", C::Capitalization},
    RatioInfo{"equity_invcap", "Common Equity/Invested Capital", C::Capitalization},
    RatioInfo{"debt_invcap", "Long-term Debt/Invested Capital", C::Capitalization},
    RatioInfo{"totdebt_invcap", "Total Debt/Invested Capital", C::Capitalization},

    RatioInfo{"at_turn", "Asset Turnover", C::Efficiency},
    RatioInfo{"inv_turn", "Inventory Turnover", C::Efficiency},
    RatioInfo{"pay_turn", "Payables Turnover", C::Efficiency},
    RatioInfo{"rect_turn", "Receivables Turnover", C::Efficiency},
    RatioInfo{"sale_equity", "Sales/Stockholders Equity", C::Efficiency},
    RatioInfo{"sale_invcap", "Sales/Invested Capital", C::Efficiency},
    RatioInfo{"sale_nwc", "Sales/Working Capital", C::Efficiency},

    RatioInfo{"invt_act", "Inventory/Current Assets", C::FinancialSoundness},
    RatioInfo{"rect_act", "Receivables/Current Assets", C::FinancialSoundness},
    RatioInfo{"fcf_ocf", "Free Cash Flow/Operating Cash Flow", C::FinancialSoundness},
    RatioInfo{"ocf_lct", "Operating CF/Current Liabilities", C::FinancialSoundness},
    RatioInfo{"cash_debt", "Cash Flow/Total Debt", C::FinancialSoundness},
    RatioInfo{"cash_lt", "Cash Balance/Total Liabilities", C::FinancialSoundness},
    RatioInfo{"cfm", "Cash Flow Margin", C::FinancialSoundness},
    RatioInfo{"short_debt", "Short-Term Debt/Total Debt", C::FinancialSoundness},
    RatioInfo{"profit_lct", "Profit Before Depreciation/Current Liabilities", C::FinancialSoundness},
    RatioInfo{"curr_debt", "Current Liabilities/Total Liabilities", C::FinancialSoundness},
    RatioInfo{"debt_ebitda", "Total Debt/EBITDA", C::FinancialSoundness},
    RatioInfo{"dltt_be", "Long-term Debt/Book Equity", C::FinancialSoundness},
    RatioInfo{"int_debt", "Interest/Average Long-term Debt", C::FinancialSoundness},
    RatioInfo{"int_totdebt", "Interest/Average Total Debt", C::FinancialSoundness},
    RatioInfo{"lt_debt", "Long-term Debt/Total Liabilities", C::FinancialSoundness},
    RatioInfo{"lt_ppent", "Total Liabilities/Total Tangible Assets", C::FinancialSoundness},

    RatioInfo{"cash_conversion", "Cash Conversion Cycle (Days)", C::Liquidity},
    RatioInfo{"cash_ratio", "Cash Ratio", C::Liquidity},
    RatioInfo{"curr_ratio", "Current Ratio", C::Liquidity},
    RatioInfo{"quick_ratio", "Quick Ratio (Acid Test)", C::Liquidity},

    RatioInfo{"accrual", "Accruals/Average Assets", C::Other},
    RatioInfo{"rd_sale", "Research and Development/Sales", C::Other},
    RatioInfo{"adv_sale", "Advertising Expenses/Sales", C::Other},
    RatioInfo{"staff_sale", "Labor Expenses/Sales", C::Other},

    RatioInfo{"efftax", "Effective Tax Rate", C::Profitability},
    RatioInfo{"GProf", "Gross Profit/Total Assets", C::Profitability},
    RatioInfo{"aftret_eq", "After-tax Return on Average Common Equity", C::Profitability},
    RatioInfo{"aftret_equity", "After-tax Return on Total Stockholders' Equity", C::Profitability},
    RatioInfo{"aftret_invcapx", "After-tax Return on Invested Capital", C::Profitability},
    RatioInfo{"gpm", "Gross Profit Margin", C::Profitability},
    RatioInfo{"npm", "Net Profit Margin", C::Profitability},
    RatioInfo{"opmad", "Operating Profit Margin After Depreciation", C::Profitability},
    RatioInfo{"opmbd", "Operating Profit Margin Before Depreciation", C::Profitability},
    RatioInfo{"pretret_earnat", "Pre-tax Return on Total Earning Assets", C::Profitability},
    RatioInfo{"pretret_noa", "Pre-tax Return on Net Operating Assets", C::Profitability},
    RatioInfo{"ptpm", "Pre-tax Profit Margin", C::Profitability},
    RatioInfo{"roa", "Return on Assets", C::Profitability},
    RatioInfo{"roce", "Return on Capital Employed", C::Profitability},
    RatioInfo{"roe", "Return on Equity", C::Profitability},

    RatioInfo{"de_ratio", "Total Debt/Equity", C::Solvency},
    RatioInfo{"debt_assets", "Total Debt/Total Assets", C::Solvency},
    RatioInfo{"debt_at", "Total Liabilities/Total Assets", C::Solvency},
    RatioInfo{"debt_capital", "Total Debt/Capital", C::Solvency},
    RatioInfo{"intcov", "After-tax Interest Coverage", C::Solvency},
    RatioInfo{"intcov_ratio", "Interest Coverage Ratio", C::Solvency},

    RatioInfo{"dpr", "Dividend Payout Ratio", C::Valuation},
    RatioInfo{"PEG_1yrforward", "Forward P/E to 1-year Growth (PEG) ratio", C::Valuation},
    RatioInfo{"PEG_ltgforward", "Forward P/E to Long-term Growth (PEG) ratio", C::Valuation},
    RatioInfo{"PEG_trailing", "Trailing P/E to Growth (PEG) ratio", C::Valuation},
    RatioInfo{"bm", "Book/Market", C::Valuation},
    RatioInfo{"capei", "Shillers Cyclically Adjusted P/E Ratio", C::Valuation},
    RatioInfo{"divyield", "Dividend Yield", C::Valuation},
    RatioInfo{"evm", "Enterprise Value Multiple", C::Valuation},
    RatioInfo{"pcf", "Price/Cash flow", C::Valuation},
    RatioInfo{"pe_exi", "P/E (Diluted, Excl. EI)", C::Valuation},
    RatioInfo{"pe_inc", "P/E (Diluted, Incl. EI)", C::Valuation},
    RatioInfo{"pe_op_basic", "Price/Operating Earnings (Basic, Excl. EI)", C::Valuation},
    RatioInfo{"pe_op_dil", "Price/Operating Earnings (Diluted, Excl. EI)", C::Valuation},
    RatioInfo{"ps", "Price/Sales", C::Valuation},
    RatioInfo{"ptb", "Price/Book", C::Valuation},
};

}  // namespace

std::string_view to_string(RatioCategory category) noexcept {
  switch (category) {
    case C::Capitalization: return "Capitalization";
    case C::Efficiency: return "Efficiency";
    case C::FinancialSoundness: return "FinancialSoundness";
    case C::Liquidity: return "Liquidity";
    case C::Other: return "Other";
    case C::Profitability: return "Profitability";
    case C::Solvency: return "Solvency";
    case C::Valuation: return "Valuation";
  }
  return "Other";
}

std::optional<RatioCategory> parse_category(std::string_view text) noexcept {
  for (auto c : {C::Capitalization, C::Efficiency, C::FinancialSoundness, C::Liquidity, C::Other,
                 C::Profitability, C::Solvency, C::Valuation}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::span<const RatioInfo> ratio_catalog() noexcept { return kCatalog; }

const RatioInfo* find_ratio(std::string_view code) noexcept {
  for (const auto& info : kCatalog) {
    if (info.code == code) return &info;
  }
  return nullptr;
}

std::vector<std::string> catalog_codes() {
  std::vector<std::string> out;
  out.reserve(kCatalog.size());
  for (const auto& info : kCatalog) out.emplace_back(info.code);
  return out;
}

}  // namespace resilience
