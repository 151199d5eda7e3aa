#include "incidence/report.h"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace incidence {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kReportFormat = "io-incidence-report/1";

json Number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(Number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json MaskToJson(const Mask& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(bool{m(i, j)});
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> HeaderFor(const ReportOptions& options) {
  std::vector<std::string> h;
  for (DemandComponent c : options.components) {
    h.emplace_back(ComponentLabel(c));
  }
  return h;
}

std::string Money(double v, const ReportOptions& o) {
  return FormatAmount(v, o.money_precision, o.style);
}

std::string Rate(double v, bool masked, const ReportOptions& o) {
  if (masked || !std::isfinite(v)) return std::string{kNotDisplayed};
  return FormatAmount(v, o.rate_precision, o.style);
}

void WriteTable(const fs::path& path, const DelimitedTable& t, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  WriteDelimited(out, t, delimiter);
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

// Parsed view of a structured report, enough for diffing.
struct ReportView {
  std::vector<std::string> codes;
  std::vector<std::string> columns;
  Matrix incidence;  // n x 7
  Matrix rates;      // n x 7, NaN when undefined
  Mask masked;
  Vector total_incidence;
  Vector total_rates;
  Mask total_masked;
};

double FromJson(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : v.get<double>();
}

ReportView ParseReport(const std::string& text, std::string_view which) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DiffError(fmt::format("{} report: {}", which, e.what()));
  }
  try {
    if (doc.value("format", "") != kReportFormat) {
      throw DiffError(fmt::format("{} report: not a structured incidence report",
                                  which));
    }
    ReportView v;
    for (const auto& a : doc.at("activities")) {
      v.codes.push_back(a.at("code").get<std::string>());
    }
    v.columns = doc.at("rates").at("columns").get<std::vector<std::string>>();
    const auto n = static_cast<Eigen::Index>(v.codes.size());
    const auto cols = static_cast<Eigen::Index>(v.columns.size());
    const json& fi = doc.at("final_incidence");
    const json& rates = doc.at("rates");
    v.incidence = Matrix::Zero(n, cols);
    v.rates = Matrix::Zero(n, cols);
    v.masked = Mask::Constant(n, cols, true);
    v.total_incidence = Vector::Zero(cols);
    v.total_rates = Vector::Zero(cols);
    v.total_masked = Mask::Constant(cols, 1, true);
    for (Eigen::Index i = 0; i < n; ++i) {
      double row_total = 0.0;
      for (Eigen::Index c = 0; c + 1 < cols; ++c) {
        v.incidence(i, c) = FromJson(fi.at(i).at(c));
        row_total += v.incidence(i, c);
      }
      v.incidence(i, cols - 1) = row_total;
      for (Eigen::Index c = 0; c < cols; ++c) {
        v.rates(i, c) = FromJson(rates.at("values").at(i).at(c));
        v.masked(i, c) = rates.at("masked").at(i).at(c).get<bool>();
      }
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      v.total_incidence(c) = v.incidence.col(c).sum();
      v.total_rates(c) = FromJson(rates.at("totals").at("values").at(c));
      v.total_masked(c) = rates.at("totals").at("masked").at(c).get<bool>();
    }
    return v;
  } catch (const json::exception& e) {
    throw DiffError(fmt::format("{} report: {}", which, e.what()));
  }
}

std::string Opt(double v) {
  return std::isfinite(v) ? FormatRoundTrip(v) : std::string{};
}

std::string PercentChange(double base, double next) {
  if (!std::isfinite(base) || !std::isfinite(next) || base == 0.0) return {};
  return FormatRoundTrip(100.0 * (next - base) / base);
}

}  // namespace

std::string FormatAmount(double value, int precision, NumberStyle style) {
  if (!std::isfinite(value)) return "NaN";
  std::string s = fmt::format("{:.{}f}", value, std::max(precision, 0));
  bool negative = !s.empty() && s.front() == '-';
  if (negative) s.erase(0, 1);
  if (s.find_first_not_of("0.") == std::string::npos) negative = false;
  if (style == NumberStyle::kGrouped) {
    const auto dot = s.find('.');
    std::string int_part = s.substr(0, dot);
    std::string frac =
        dot == std::string::npos ? std::string{} : s.substr(dot + 1);
    std::string grouped;
    for (std::size_t i = 0; i < int_part.size(); ++i) {
      if (i > 0 && (int_part.size() - i) % 3 == 0) grouped.push_back('.');
      grouped.push_back(int_part[i]);
    }
    s = frac.empty() ? grouped : grouped + "," + frac;
  }
  return negative ? "-" + s : s;
}

DelimitedTable FirstStageTable(const CoefficientSystem& system,
                               const ReportOptions& options) {
  DelimitedTable t;
  t.header = {"Code", "Activity", "Statutory incidence",
              "Intermediate demand"};
  const auto comp = HeaderFor(options);
  t.header.insert(t.header.end(), comp.begin(), comp.end());
  const auto n = static_cast<Eigen::Index>(system.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& act = system.activities[static_cast<std::size_t>(i)];
    std::vector<std::string> row{act.code, act.label,
                                 Money(system.statutory(i), options),
                                 Money(system.idi(i), options)};
    for (DemandComponent c : options.components) {
      row.push_back(
          Money(system.fsf(i, static_cast<Eigen::Index>(Index(c))), options));
    }
    t.rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"TOTAL", "Total",
                                 Money(system.statutory.sum(), options),
                                 Money(system.idi.sum(), options)};
  for (DemandComponent c : options.components) {
    total.push_back(
        Money(system.fsf.col(static_cast<Eigen::Index>(Index(c))).sum(),
              options));
  }
  t.rows.push_back(std::move(total));
  return t;
}

DelimitedTable FinalIncidenceTable(const IncidenceResult& result,
                                   const ReportOptions& options) {
  DelimitedTable t;
  t.header = {"Code", "Activity"};
  const auto comp = HeaderFor(options);
  t.header.insert(t.header.end(), comp.begin(), comp.end());
  t.header.emplace_back("Total final demand");
  const Matrix& fi = result.final_incidence;
  for (Eigen::Index i = 0; i < fi.rows(); ++i) {
    const auto& act = result.activities[static_cast<std::size_t>(i)];
    std::vector<std::string> row{act.code, act.label};
    for (DemandComponent c : options.components) {
      row.push_back(Money(fi(i, static_cast<Eigen::Index>(Index(c))), options));
    }
    row.push_back(Money(fi.row(i).sum(), options));
    t.rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"TOTAL", "Total"};
  for (DemandComponent c : options.components) {
    total.push_back(Money(result.totals.per_component[Index(c)], options));
  }
  total.push_back(Money(result.totals.grand_total, options));
  t.rows.push_back(std::move(total));
  return t;
}

DelimitedTable RateTable(const RateReport& rates,
                         const ReportOptions& options) {
  DelimitedTable t;
  t.header = {"Code", "Activity"};
  const auto comp = HeaderFor(options);
  t.header.insert(t.header.end(), comp.begin(), comp.end());
  t.header.emplace_back("Total final demand");
  for (Eigen::Index i = 0; i < rates.rates.rows(); ++i) {
    const auto& act = rates.activities[static_cast<std::size_t>(i)];
    std::vector<std::string> row{act.code, act.label};
    for (DemandComponent c : options.components) {
      const auto col = static_cast<Eigen::Index>(Index(c));
      row.push_back(Rate(rates.rates(i, col), rates.masked(i, col), options));
    }
    row.push_back(Rate(rates.rates(i, kTotalColumn),
                       rates.masked(i, kTotalColumn), options));
    t.rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"TOTAL", "Total"};
  for (DemandComponent c : options.components) {
    const auto col = static_cast<Eigen::Index>(Index(c));
    total.push_back(
        Rate(rates.total_rates(col), rates.total_masked(col), options));
  }
  total.push_back(Rate(rates.total_rates(kTotalColumn),
                       rates.total_masked(kTotalColumn), options));
  t.rows.push_back(std::move(total));
  return t;
}

std::string ReportToJson(const IncidenceResult& result, const RateReport& rates,
                         std::optional<double> single_rate) {
  json activities = json::array();
  for (const auto& a : result.activities) {
    activities.push_back({{"code", a.code}, {"label", a.label}});
  }
  json components = json::array();
  json per_component = json::object();
  json shares = json::object();
  for (DemandComponent c : kAllComponents) {
    const std::string key{ComponentKey(c)};
    components.push_back(key);
    per_component[key] = result.totals.per_component[Index(c)];
    shares[key] = rates.component_shares[Index(c)];
  }
  json columns = components;
  columns.push_back("total");

  const MethodInfo& m = result.method;
  json method{{"name", MethodName(m.method)},
              {"conservation_tol", m.conservation_tol}};
  if (m.method == PropagationMethod::kTruncated) {
    method["stages"] = m.stages;
    method["residual_mass"] = m.residual_mass;
    method["tol"] = m.tol;
    method["converged"] = m.converged;
  } else {
    method["condition_estimate"] = Number(m.condition_estimate);
  }

  const IncidenceTotals& t = result.totals;
  json totals{{"per_component", per_component},
              {"grand_total", t.grand_total},
              {"first_stage_total", t.first_stage_total},
              {"statutory_total", t.statutory_total},
              {"conservation_residual", t.conservation_residual},
              {"relative_residual", t.relative_residual},
              {"conserved", t.conserved}};

  json total_values = json::array();
  json total_masked = json::array();
  for (Eigen::Index c = 0; c < rates.total_rates.size(); ++c) {
    total_values.push_back(Number(rates.total_rates(c)));
    total_masked.push_back(bool{rates.total_masked(c)});
  }
  json rate_doc{{"threshold", rates.threshold},
                {"columns", columns},
                {"values", MatrixToJson(rates.rates)},
                {"masked", MaskToJson(rates.masked)},
                {"expenditure", MatrixToJson(rates.expenditure)},
                {"totals", {{"values", total_values}, {"masked", total_masked}}},
                {"diagnostics", rates.diagnostics}};

  json doc{{"format", kReportFormat},
           {"activities", activities},
           {"components", components},
           {"method", method},
           {"totals", totals},
           {"fsf", MatrixToJson(result.fsf)},
           {"ies", MatrixToJson(result.ies)},
           {"final_incidence", MatrixToJson(result.final_incidence)},
           {"rates", rate_doc},
           {"component_shares", shares},
           {"single_rate_equivalent",
            single_rate ? Number(*single_rate) : json(nullptr)},
           {"warnings", result.warnings}};
  return doc.dump(2) + "\n";
}

std::vector<fs::path> RenderReport(const CoefficientSystem& system,
                                   const IncidenceResult& result,
                                   const RateReport& rates,
                                   std::optional<double> single_rate,
                                   const ReportOptions& options,
                                   const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  if (options.format != ReportFormat::kStructured) {
    const std::pair<const char*, DelimitedTable> tables[] = {
        {"table2.csv", FirstStageTable(system, options)},
        {"table3.csv", FinalIncidenceTable(result, options)},
        {"table4.csv", RateTable(rates, options)},
    };
    for (const auto& [name, table] : tables) {
      WriteTable(dir / name, table, options.delimiter);
      written.push_back(dir / name);
    }
  }
  if (options.format != ReportFormat::kDelimited) {
    const fs::path path = dir / "report.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << ReportToJson(result, rates, single_rate);
    written.push_back(path);
  }
  return written;
}

DelimitedTable DiffReports(const std::string& baseline_json,
                           const std::string& scenario_json) {
  const ReportView base = ParseReport(baseline_json, "baseline");
  const ReportView next = ParseReport(scenario_json, "scenario");
  if (base.codes != next.codes || base.columns != next.columns) {
    throw DiffError(fmt::format(
        "reports differ in shape: {} vs {} activities, {} vs {} columns",
        base.codes.size(), next.codes.size(), base.columns.size(),
        next.columns.size()));
  }
  DelimitedTable t;
  t.header = {"code",          "column",        "baseline_incidence",
              "scenario_incidence", "delta_incidence", "pct_change_incidence",
              "baseline_rate", "scenario_rate", "delta_rate",
              "baseline_masked", "scenario_masked", "mask_changed"};
  auto emit = [&](const std::string& code, const std::string& column,
                  double bi, double si, double br, double sr, bool bm,
                  bool sm) {
    t.rows.push_back({code, column, Opt(bi), Opt(si), Opt(si - bi),
                      PercentChange(bi, si), Opt(br), Opt(sr), Opt(sr - br),
                      bm ? "1" : "0", sm ? "1" : "0", bm != sm ? "1" : "0"});
  };
  const auto cols = static_cast<Eigen::Index>(base.columns.size());
  for (std::size_t i = 0; i < base.codes.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = 0; c < cols; ++c) {
      emit(base.codes[i], base.columns[static_cast<std::size_t>(c)],
           base.incidence(r, c), next.incidence(r, c), base.rates(r, c),
           next.rates(r, c), base.masked(r, c), next.masked(r, c));
    }
  }
  for (Eigen::Index c = 0; c < cols; ++c) {
    emit("TOTAL", base.columns[static_cast<std::size_t>(c)],
         base.total_incidence(c), next.total_incidence(c), base.total_rates(c),
         next.total_rates(c), base.total_masked(c), next.total_masked(c));
  }
  return t;
}

}  // namespace incidence
