#include "incidence/bundle.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "incidence/delimited.h"

namespace incidence {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// |residual| <= tol * max(1, |scale|), plus a few ulps of the magnitudes
// involved so that a residual sitting exactly on the boundary in decimal is
// not rejected because of binary rounding.
bool WithinTolerance(double residual, double scale, double magnitude) {
  const double limit = kBalanceTolerance * std::max(1.0, std::abs(scale)) +
                       8.0 * kEps * magnitude;
  return std::abs(residual) <= limit;
}

ValidationCheck MakeCheck(std::string check, std::string subject, bool passed,
                          double residual, std::string detail = {}) {
  return ValidationCheck{std::move(check), std::move(subject), passed,
                         residual, std::move(detail)};
}

struct TableSpec {
  std::string name;
  std::vector<std::string> columns;
};

// Reads an activity-by-column table, aligning rows by activity code and
// columns by header name.
Matrix ReadActivityTable(const fs::path& path, char delimiter,
                         const TableSpec& spec, const IOAccounts& accounts) {
  if (!fs::exists(path)) {
    throw BundleError(fmt::format("{}: missing file '{}'", spec.name,
                                  path.string()));
  }
  DelimitedTable table;
  try {
    table = ReadDelimited(path, delimiter);
  } catch (const Error& e) {
    throw BundleError(fmt::format("{}: {}", spec.name, e.what()));
  }
  const std::size_t want_cols = spec.columns.size();
  if (table.header.size() != want_cols + 1) {
    throw BundleError(
        fmt::format("{}: dimension mismatch, header has {} value columns, "
                    "expected {}",
                    spec.name, table.header.size() - std::min<std::size_t>(
                                                         table.header.size(), 1),
                    want_cols));
  }
  std::map<std::string, std::size_t> wanted;
  for (std::size_t k = 0; k < want_cols; ++k) wanted[spec.columns[k]] = k;
  std::vector<std::size_t> column_of(want_cols);
  std::set<std::string> seen_cols;
  for (std::size_t k = 0; k < want_cols; ++k) {
    const std::string& name = table.header[k + 1];
    auto it = wanted.find(name);
    if (it == wanted.end()) {
      throw BundleError(
          fmt::format("{}: unexpected column '{}'", spec.name, name));
    }
    if (!seen_cols.insert(name).second) {
      throw BundleError(
          fmt::format("{}: duplicate column '{}'", spec.name, name));
    }
    column_of[k] = it->second;
  }

  const auto n = static_cast<Eigen::Index>(accounts.size());
  Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(want_cols));
  std::vector<bool> row_seen(accounts.size(), false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != want_cols + 1) {
      throw BundleError(fmt::format(
          "{}: dimension mismatch on line {}, {} fields, expected {}",
          spec.name, r + 2, row.size(), want_cols + 1));
    }
    const auto idx = accounts.FindActivity(row[0]);
    if (!idx) {
      throw BundleError(
          fmt::format("{}: unknown activity code '{}'", spec.name, row[0]));
    }
    if (row_seen[*idx]) {
      throw BundleError(
          fmt::format("{}: duplicate activity code '{}'", spec.name, row[0]));
    }
    row_seen[*idx] = true;
    for (std::size_t k = 0; k < want_cols; ++k) {
      try {
        out(static_cast<Eigen::Index>(*idx),
            static_cast<Eigen::Index>(column_of[k])) =
            ParseNumber(row[k + 1], fmt::format("{} [{}, {}]", spec.name,
                                                row[0], table.header[k + 1]));
      } catch (const BundleError&) {
        throw;
      } catch (const Error& e) {
        throw BundleError(e.what());
      }
    }
  }
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (!row_seen[i]) {
      throw BundleError(fmt::format("{}: dimension mismatch, no row for "
                                    "activity '{}'",
                                    spec.name, accounts.activities[i].code));
    }
  }
  return out;
}

std::vector<std::string> ActivityCodes(const IOAccounts& accounts) {
  std::vector<std::string> codes;
  codes.reserve(accounts.size());
  for (const auto& a : accounts.activities) codes.push_back(a.code);
  return codes;
}

std::vector<std::string> ComponentKeys(
    const std::vector<DemandComponent>& order) {
  std::vector<std::string> keys;
  for (DemandComponent c : order) keys.emplace_back(ComponentKey(c));
  return keys;
}

Metadata ParseMetadata(const json& j) {
  Metadata m;
  m.year = j.value("year", 0);
  m.currency = j.value("currency", std::string{});
  m.source = j.value("source", std::string{});
  m.margins_applied = j.value("margins_applied", false);
  if (j.contains("tax_revenue")) {
    for (const auto& t : j.at("tax_revenue")) {
      m.tax_revenue.push_back(
          TaxRevenue{t.at("tax").get<std::string>(), t.at("amount").get<double>()});
    }
  }
  return m;
}

json MetadataToJson(const Metadata& m) {
  json j;
  j["year"] = m.year;
  j["currency"] = m.currency;
  j["source"] = m.source;
  j["margins_applied"] = m.margins_applied;
  json revenue = json::array();
  for (const auto& t : m.tax_revenue) {
    revenue.push_back({{"tax", t.tax}, {"amount", t.amount}});
  }
  j["tax_revenue"] = revenue;
  return j;
}

char ParseDelimiter(const json& manifest) {
  const std::string d = manifest.value("delimiter", std::string{","});
  if (d == ",") return ',';
  if (d == ";") return ';';
  if (d == "\\t" || d == "\t") return '\t';
  throw BundleError(fmt::format("unsupported delimiter '{}'", d));
}

}  // namespace

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

std::vector<ValidationCheck> ValidationReport::failures() const {
  std::vector<ValidationCheck> out;
  std::copy_if(checks.begin(), checks.end(), std::back_inserter(out),
               [](const ValidationCheck& c) { return !c.passed; });
  return out;
}

std::string ValidationReport::ToJson() const {
  json records = json::array();
  for (const auto& c : checks) {
    records.push_back({{"check", c.check},
                       {"subject", c.subject},
                       {"passed", c.passed},
                       {"residual", c.residual},
                       {"detail", c.detail}});
  }
  json doc{{"ok", ok()}, {"checks", records}};
  return doc.dump(2) + "\n";
}

ValidationReport Validate(const IOAccounts& accounts) {
  ValidationReport report;
  auto& checks = report.checks;
  try {
    CheckShapes(accounts);
  } catch (const Error& e) {
    checks.push_back(MakeCheck("shape", "*", false, 0.0, e.what()));
    return report;
  }
  checks.push_back(MakeCheck("shape", "*", true, 0.0));

  std::set<std::string> codes;
  bool unique = true;
  std::string duplicate;
  for (const auto& a : accounts.activities) {
    if (!codes.insert(a.code).second) {
      unique = false;
      duplicate = a.code;
    }
  }
  checks.push_back(MakeCheck("unique_codes", "*", unique, 0.0,
                             unique ? "" : "duplicate code " + duplicate));

  const bool finite = accounts.flows.allFinite() &&
                      accounts.finaldemand.allFinite() &&
                      accounts.supply.allFinite() &&
                      accounts.taxdest.dest.allFinite() &&
                      accounts.taxdest.statutory.allFinite() &&
                      accounts.marginshares.allFinite() &&
                      accounts.expenditure.allFinite();
  checks.push_back(MakeCheck("finite", "*", finite, 0.0,
                             finite ? "" : "non-finite value in tables"));
  if (!finite) return report;

  const auto inventory = static_cast<Eigen::Index>(
      Index(DemandComponent::kInventoryChange));
  const auto n = static_cast<Eigen::Index>(accounts.size());

  auto min_excluding_inventory = [&](const Matrix& m, Eigen::Index i) {
    double lowest = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c != inventory) lowest = std::min(lowest, m(i, c));
    }
    return lowest;
  };

  double total_statutory = 0.0;
  double total_dest = 0.0;
  double total_dest_abs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& act = accounts.activities[static_cast<std::size_t>(i)];
    const std::string& code = act.code;

    const double s = accounts.supply(i);
    const double row = accounts.flows.row(i).sum() +
                       accounts.finaldemand.row(i).sum();
    const double magnitude = std::abs(s) +
                             accounts.flows.row(i).cwiseAbs().sum() +
                             accounts.finaldemand.row(i).cwiseAbs().sum();
    const double balance = s - row;
    checks.push_back(MakeCheck(
        "row_balance", code, WithinTolerance(balance, s, magnitude), balance,
        fmt::format("supply {} vs row total {}", s, row)));

    const double min_flow = std::min(0.0, accounts.flows.row(i).minCoeff());
    checks.push_back(MakeCheck("sign_flows", code, min_flow >= 0.0, min_flow));
    const double min_fd = min_excluding_inventory(accounts.finaldemand, i);
    checks.push_back(MakeCheck("sign_finaldemand", code, min_fd >= 0.0, min_fd,
                               min_fd < 0.0 ? "negative entry outside "
                                              "inventory change"
                                            : ""));
    checks.push_back(
        MakeCheck("sign_supply", code, s >= 0.0, std::min(0.0, s)));

    const double stat = accounts.taxdest.statutory(i);
    const double dest = accounts.taxdest.dest.row(i).sum();
    const double dest_abs = accounts.taxdest.dest.row(i).cwiseAbs().sum();
    checks.push_back(MakeCheck(
        "statutory_balance", code,
        WithinTolerance(stat - dest, stat, std::abs(stat) + dest_abs),
        stat - dest, fmt::format("statutory {} vs destinations {}", stat, dest)));
    total_statutory += stat;
    total_dest += dest;
    total_dest_abs += dest_abs;

    const double mu = accounts.marginshares(i);
    const bool in_range = mu >= 0.0 && mu <= 1.0;
    checks.push_back(MakeCheck("margin_share_range", code, in_range,
                               in_range ? 0.0 : (mu < 0.0 ? mu : mu - 1.0)));
    checks.push_back(MakeCheck(
        "margin_share_flag", code, mu <= 0.0 || act.margin, 0.0,
        (mu > 0.0 && !act.margin) ? "positive share on non-margin activity"
                                  : ""));

    if (accounts.expenditure.size() != 0) {
      const double min_exp = min_excluding_inventory(accounts.expenditure, i);
      checks.push_back(
          MakeCheck("sign_expenditure", code, min_exp >= 0.0, min_exp));
    }
  }
  checks.push_back(MakeCheck(
      "statutory_total", "*",
      WithinTolerance(total_statutory - total_dest, total_statutory,
                      std::abs(total_statutory) + total_dest_abs),
      total_statutory - total_dest,
      fmt::format("statutory {} vs destinations {}", total_statutory,
                  total_dest)));
  return report;
}

IOAccounts ReadBundle(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) {
    throw BundleError(
        fmt::format("manifest '{}' not found", manifest_path.string()));
  }
  json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw BundleError(fmt::format("manifest '{}': {}", manifest_path.string(),
                                  e.what()));
  }
  const fs::path base = manifest_path.parent_path();
  const char delimiter = ParseDelimiter(manifest);

  IOAccounts accounts;
  try {
    if (!manifest.contains("activities") || manifest["activities"].empty()) {
      throw BundleError("manifest lists no activities");
    }
    std::set<std::string> codes;
    for (const auto& a : manifest.at("activities")) {
      Activity act;
      act.index = accounts.activities.size();
      act.code = a.at("code").get<std::string>();
      act.label = a.value("label", act.code);
      if (act.code.empty()) throw BundleError("empty activity code");
      if (!codes.insert(act.code).second) {
        throw BundleError(
            fmt::format("duplicate activity code '{}'", act.code));
      }
      accounts.activities.push_back(std::move(act));
    }

    // The declared component list is checked for completeness; table
    // columns are matched by header name and stored in canonical order.
    if (manifest.contains("components")) {
      std::vector<DemandComponent> order;
      for (const auto& k : manifest.at("components")) {
        const auto c = ParseComponent(k.get<std::string>());
        if (!c) {
          throw BundleError(fmt::format("unknown component '{}'",
                                        k.get<std::string>()));
        }
        if (std::find(order.begin(), order.end(), *c) != order.end()) {
          throw BundleError(fmt::format("duplicate component '{}'",
                                        k.get<std::string>()));
        }
        order.push_back(*c);
      }
      if (order.size() != kNumComponents) {
        throw BundleError(fmt::format(
            "dimension mismatch, manifest lists {} components, expected {}",
            order.size(), kNumComponents));
      }
    }
    const auto component_keys = ComponentKeys(
        std::vector<DemandComponent>(kAllComponents.begin(),
                                     kAllComponents.end()));

    const json& tables = manifest.at("tables");
    auto table_path = [&](const std::string& name) -> fs::path {
      if (!tables.contains(name)) {
        throw BundleError(fmt::format("manifest has no '{}' table", name));
      }
      return base / tables.at(name).get<std::string>();
    };

    const auto codes_list = ActivityCodes(accounts);
    accounts.flows = ReadActivityTable(table_path("flows"), delimiter,
                                       {"flows", codes_list}, accounts);
    accounts.finaldemand =
        ReadActivityTable(table_path("finaldemand"), delimiter,
                          {"finaldemand", component_keys}, accounts);
    accounts.supply = ReadActivityTable(table_path("supply"), delimiter,
                                        {"supply", {"supply"}}, accounts)
                          .col(0);

    std::vector<std::string> tax_cols = codes_list;
    tax_cols.insert(tax_cols.end(), component_keys.begin(),
                    component_keys.end());
    tax_cols.emplace_back("statutory");
    const Matrix tax = ReadActivityTable(table_path("taxdest"), delimiter,
                                         {"taxdest", tax_cols}, accounts);
    accounts.taxdest.dest = tax.leftCols(tax.cols() - 1);
    accounts.taxdest.statutory = tax.col(tax.cols() - 1);

    accounts.marginshares =
        ReadActivityTable(table_path("marginshares"), delimiter,
                          {"marginshares", {"share"}}, accounts)
            .col(0);

    if (tables.contains("expenditure")) {
      accounts.expenditure =
          ReadActivityTable(table_path("expenditure"), delimiter,
                            {"expenditure", component_keys}, accounts);
    }

    if (manifest.contains("margin_activities")) {
      for (const auto& code : manifest.at("margin_activities")) {
        const auto idx = accounts.FindActivity(code.get<std::string>());
        if (!idx) {
          throw BundleError(fmt::format("margin_activities: unknown code '{}'",
                                        code.get<std::string>()));
        }
        accounts.activities[*idx].margin = true;
      }
    } else {
      for (auto& a : accounts.activities) {
        a.margin = accounts.marginshares(static_cast<Eigen::Index>(a.index)) > 0;
      }
    }

    if (tables.contains("metadata")) {
      const fs::path meta_path = table_path("metadata");
      std::ifstream in(meta_path);
      if (!in) {
        throw BundleError(
            fmt::format("metadata: missing file '{}'", meta_path.string()));
      }
      accounts.metadata = ParseMetadata(json::parse(in));
    } else if (manifest.contains("metadata")) {
      accounts.metadata = ParseMetadata(manifest.at("metadata"));
    }
  } catch (const json::exception& e) {
    throw BundleError(fmt::format("manifest '{}': {}", manifest_path.string(),
                                  e.what()));
  }
  return accounts;
}

IOAccounts LoadBundle(const fs::path& manifest_path) {
  IOAccounts accounts = ReadBundle(manifest_path);
  const ValidationReport report = Validate(accounts);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "bundle '" << manifest_path.string() << "' failed validation:";
    for (const auto& f : report.failures()) {
      msg << "\n  " << f.check << " [" << f.subject
          << "] residual=" << FormatRoundTrip(f.residual);
      if (!f.detail.empty()) msg << " (" << f.detail << ")";
    }
    throw BundleError(msg.str());
  }
  return accounts;
}

void SaveBundle(const IOAccounts& accounts, const fs::path& dir,
                char delimiter) {
  CheckShapes(accounts);
  fs::create_directories(dir);
  const auto codes = ActivityCodes(accounts);
  const auto keys = ComponentKeys(std::vector<DemandComponent>(
      kAllComponents.begin(), kAllComponents.end()));

  auto write_table = [&](const std::string& file,
                         const std::vector<std::string>& columns,
                         const auto& value_at) {
    DelimitedTable t;
    t.header.push_back("code");
    t.header.insert(t.header.end(), columns.begin(), columns.end());
    for (std::size_t i = 0; i < accounts.size(); ++i) {
      std::vector<std::string> row{codes[i]};
      for (std::size_t k = 0; k < columns.size(); ++k) {
        row.push_back(FormatRoundTrip(value_at(i, k)));
      }
      t.rows.push_back(std::move(row));
    }
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", (dir / file).string()));
    WriteDelimited(out, t, delimiter);
  };
  auto at = [](const auto& m) {
    return [&m](std::size_t i, std::size_t k) {
      return m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    };
  };

  write_table("flows.csv", codes, at(accounts.flows));
  write_table("finaldemand.csv", keys, at(accounts.finaldemand));
  write_table("supply.csv", {"supply"}, [&](std::size_t i, std::size_t) {
    return accounts.supply(static_cast<Eigen::Index>(i));
  });
  std::vector<std::string> tax_cols = codes;
  tax_cols.insert(tax_cols.end(), keys.begin(), keys.end());
  tax_cols.emplace_back("statutory");
  const auto n = accounts.size();
  write_table("taxdest.csv", tax_cols, [&](std::size_t i, std::size_t k) {
    const auto r = static_cast<Eigen::Index>(i);
    return k < n + kNumComponents
               ? accounts.taxdest.dest(r, static_cast<Eigen::Index>(k))
               : accounts.taxdest.statutory(r);
  });
  write_table("marginshares.csv", {"share"}, [&](std::size_t i, std::size_t) {
    return accounts.marginshares(static_cast<Eigen::Index>(i));
  });

  json tables{{"flows", "flows.csv"},
              {"finaldemand", "finaldemand.csv"},
              {"supply", "supply.csv"},
              {"taxdest", "taxdest.csv"},
              {"marginshares", "marginshares.csv"}};
  if (accounts.expenditure.size() != 0) {
    write_table("expenditure.csv", keys, at(accounts.expenditure));
    tables["expenditure"] = "expenditure.csv";
  }

  json activities = json::array();
  json margin = json::array();
  for (const auto& a : accounts.activities) {
    activities.push_back({{"code", a.code}, {"label", a.label}});
    if (a.margin) margin.push_back(a.code);
  }
  json manifest{{"delimiter", std::string(1, delimiter)},
                {"activities", activities},
                {"margin_activities", margin},
                {"components", keys},
                {"tables", tables},
                {"metadata", MetadataToJson(accounts.metadata)}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write manifest");
  out << manifest.dump(2) << "\n";
}

}  // namespace incidence
