#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "incidence/accounts.h"
#include "incidence/delimited.h"
#include "incidence/engine.h"
#include "incidence/rates.h"

namespace incidence {

enum class NumberStyle {
  kPlain,    // 59917, 19.1
  kGrouped,  // 59.917, 19,1 (dot thousands separator, comma decimal)
};

enum class ReportFormat { kDelimited, kStructured, kBoth };

struct ReportOptions {
  std::vector<DemandComponent> components{kReportedComponents.begin(),
                                          kReportedComponents.end()};
  int money_precision = 0;
  int rate_precision = 1;
  NumberStyle style = NumberStyle::kPlain;
  char delimiter = ',';
  ReportFormat format = ReportFormat::kBoth;
};

inline constexpr std::string_view kNotDisplayed = "ND";

std::string FormatAmount(double value, int precision, NumberStyle style);

// First-stage layout: statutory, intermediate, then one column per selected
// component, with a TOTAL row.
DelimitedTable FirstStageTable(const CoefficientSystem& system,
                               const ReportOptions& options);
// Final-incidence layout: selected components plus the total-final-demand
// column (always the sum over all six components), with a TOTAL row.
DelimitedTable FinalIncidenceTable(const IncidenceResult& result,
                                   const ReportOptions& options);
// Effective-rate layout; masked cells hold "ND".
DelimitedTable RateTable(const RateReport& rates, const ReportOptions& options);

// Structured document with matrices, totals, rates, masks and audit
// metadata. `single_rate` is omitted when not available.
std::string ReportToJson(const IncidenceResult& result, const RateReport& rates,
                         std::optional<double> single_rate);

// Writes table2.csv / table3.csv / table4.csv and/or report.json into `dir`
// according to options.format. Returns the paths written.
std::vector<std::filesystem::path> RenderReport(
    const CoefficientSystem& system, const IncidenceResult& result,
    const RateReport& rates, std::optional<double> single_rate,
    const ReportOptions& options, const std::filesystem::path& dir);

class DiffError : public Error {
 public:
  using Error::Error;
};

// Entrywise comparison of two structured reports (activity x column,
// including the total column): incidence and rate deltas, percentage
// changes, and display-mask changes.
DelimitedTable DiffReports(const std::string& baseline_json,
                           const std::string& scenario_json);

}  // namespace incidence
