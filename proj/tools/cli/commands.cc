#include "cli/commands.h"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "incidence/bundle.h"
#include "incidence/delimited.h"
#include "incidence/digest.h"
#include "incidence/margins.h"
#include "incidence/rates.h"

namespace incidence::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

fs::path DefaultOutDir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "incidence-out";
}

// Digests of the manifest and every table it references, keyed by logical
// table name.
json InputDigests(const fs::path& manifest_path) {
  json digests;
  digests["manifest"] = FileSha256(manifest_path);
  std::ifstream in(manifest_path);
  const json manifest = json::parse(in);
  if (manifest.contains("tables")) {
    for (const auto& [name, file] : manifest.at("tables").items()) {
      digests[name] =
          FileSha256(manifest_path.parent_path() / file.get<std::string>());
    }
  }
  return digests;
}

double MaxRowSumDeviation(const CoefficientSystem& system) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < system.a.rows(); ++i) {
    const double s = system.a.row(i).sum() + system.z.row(i).sum();
    if (s != 0.0) worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

std::vector<DemandComponent> ParseComponentList(const std::string& list) {
  if (list == "all") return {kAllComponents.begin(), kAllComponents.end()};
  std::vector<DemandComponent> out;
  std::stringstream ss(list);
  std::string key;
  while (std::getline(ss, key, ',')) {
    const auto c = ParseComponent(key);
    if (!c) throw CLI::ValidationError("--components", "unknown component '" + key + "'");
    out.push_back(*c);
  }
  if (out.empty()) throw CLI::ValidationError("--components", "empty list");
  return out;
}

}  // namespace

Vector ReadScenario(const fs::path& path, const IOAccounts& accounts) {
  const DelimitedTable table = ReadDelimited(path, ',');
  if (table.header.size() != 2) {
    throw Error(fmt::format("scenario '{}': expected columns code,scale",
                            path.string()));
  }
  Vector scale = Vector::Constant(static_cast<Eigen::Index>(accounts.size()),
                                  std::numeric_limits<double>::quiet_NaN());
  for (const auto& row : table.rows) {
    if (row.size() != 2) {
      throw Error(fmt::format("scenario '{}': malformed row", path.string()));
    }
    const auto idx = accounts.FindActivity(row[0]);
    if (!idx) {
      throw Error(fmt::format("scenario '{}': unknown activity code '{}'",
                              path.string(), row[0]));
    }
    const auto r = static_cast<Eigen::Index>(*idx);
    if (!std::isnan(scale(r))) {
      throw Error(fmt::format("scenario '{}': duplicate activity code '{}'",
                              path.string(), row[0]));
    }
    scale(r) = ParseNumber(row[1], "scenario " + row[0]);
  }
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (std::isnan(scale(i))) {
      throw Error(fmt::format("scenario '{}': no factor for activity '{}'",
                              path.string(),
                              accounts.activities[static_cast<std::size_t>(i)].code));
    }
  }
  return scale;
}

int CmdValidate(const fs::path& manifest,
                const std::optional<fs::path>& out_dir, std::ostream& out,
                std::ostream& err) {
  if (!fs::exists(manifest)) {
    err << "error: manifest '" << manifest.string() << "' not found\n"
        << "usage: ioincidence validate --manifest <manifest.json> [--out DIR]\n";
    return kExitUsage;
  }
  IOAccounts accounts;
  try {
    accounts = ReadBundle(manifest);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  const ValidationReport report = Validate(accounts);
  const std::string text = report.ToJson();
  if (out_dir) {
    fs::create_directories(*out_dir);
    WriteFile(*out_dir / "validation.json", text);
  } else {
    out << text;
  }
  for (const auto& f : report.failures()) {
    err << "FAIL " << f.check << " [" << f.subject
        << "] residual=" << FormatRoundTrip(f.residual);
    if (!f.detail.empty()) err << " (" << f.detail << ")";
    err << "\n";
  }
  return report.ok() ? kExitOk : kExitFailure;
}

int CmdCompute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (!fs::exists(config.manifest)) {
    err << "error: manifest '" << config.manifest.string() << "' not found\n"
        << "usage: ioincidence compute --manifest <manifest.json> [options]\n";
    return kExitUsage;
  }
  if (config.scenario && !fs::exists(*config.scenario)) {
    err << "error: scenario file '" << config.scenario->string()
        << "' not found\n";
    return kExitUsage;
  }
  try {
    IOAccounts accounts = LoadBundle(config.manifest);
    json audit;
    audit["manifest"] = config.manifest.generic_string();
    audit["inputs"] = InputDigests(config.manifest);
    if (config.scenario) {
      const Vector scale = ReadScenario(*config.scenario, accounts);
      accounts = ApplyScenario(accounts, scale);
      audit["scenario"] = {{"file", config.scenario->generic_string()},
                           {"sha256", FileSha256(*config.scenario)}};
    }

    fs::create_directories(config.out_dir);
    std::vector<std::string> outputs;

    BuildOptions build;
    if (config.skip_margins) {
      build.allow_unredistributed_margins = true;
    } else {
      const MarginResult margins = RedistributeMargins(accounts);
      std::ofstream audit_file(config.out_dir / "margin_adjustment.csv",
                               std::ios::binary);
      WriteMarginAudit(audit_file, accounts, margins.adjustment);
      outputs.push_back("margin_adjustment.csv");
      accounts = margins.accounts;
      SaveBundle(accounts, config.out_dir / "post_margin");
      outputs.push_back("post_margin/manifest.json");
    }
    audit["skip_margins"] = config.skip_margins;

    const CoefficientSystem system = BuildSystem(accounts, build);
    const std::string digest = SystemDigest(system);
    const json system_doc{{"sha256", digest},
                          {"activities", system.size()},
                          {"components", kNumComponents},
                          {"max_row_sum_deviation", MaxRowSumDeviation(system)},
                          {"idi_total", system.idi.sum()},
                          {"fsf_total", system.fsf.sum()},
                          {"warnings", system.warnings}};
    WriteFile(config.out_dir / "system_digest.json", system_doc.dump(2) + "\n");
    outputs.push_back("system_digest.json");

    const IncidenceResult result = Propagate(system, config.propagation);
    const Matrix& expenditure = accounts.expenditure.size() != 0
                                    ? accounts.expenditure
                                    : accounts.finaldemand;
    const RateReport rates =
        EffectiveRates(result, expenditure, config.threshold);
    std::optional<double> single_rate;
    try {
      single_rate = SingleRateEquivalent(result, expenditure);
    } catch (const RateError&) {
    }

    ReportOptions report = config.report;
    report.components = config.components;
    for (const auto& p : RenderReport(system, result, rates, single_rate,
                                      report, config.out_dir)) {
      outputs.push_back(p.filename().generic_string());
    }

    const PropagationOptions& po = config.propagation;
    const bool truncated = po.method == PropagationMethod::kTruncated;
    audit["method"] = MethodName(po.method);
    audit["tolerances"] = {{"truncation_tol", po.tol},
                           {"max_stages", po.max_stages},
                           {"conservation_tol", po.conservation_tol},
                           {"condition_limit", po.condition_limit},
                           {"display_threshold", config.threshold}};
    audit["propagation"] = {
        {"stages", truncated ? json(result.method.stages) : json(nullptr)},
        {"residual_mass",
         truncated ? json(result.method.residual_mass) : json(nullptr)},
        {"converged", result.method.converged},
        {"condition_estimate",
         truncated ? json(nullptr) : json(result.method.condition_estimate)}};
    audit["conservation"] = {
        {"grand_total", result.totals.grand_total},
        {"first_stage_total", result.totals.first_stage_total},
        {"statutory_total", result.totals.statutory_total},
        {"residual", result.totals.conservation_residual},
        {"relative_residual", result.totals.relative_residual},
        {"conserved", result.totals.conserved}};
    audit["system_sha256"] = digest;
    audit["warnings"] = result.warnings;
    audit["rate_diagnostics"] = rates.diagnostics;
    outputs.push_back("audit.json");
    audit["outputs"] = outputs;
    WriteFile(config.out_dir / "audit.json", audit.dump(2) + "\n");

    out << fmt::format(
        "method={} grand_total={} first_stage_total={} residual={} "
        "converged={}\n",
        MethodName(po.method), FormatRoundTrip(result.totals.grand_total),
        FormatRoundTrip(result.totals.first_stage_total),
        FormatRoundTrip(result.totals.conservation_residual),
        result.method.converged ? "yes" : "no");
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";

    if (!(result.method.converged && result.totals.conserved) &&
        !config.allow_residual) {
      err << "error: propagation left unallocated tax; rerun with "
             "--allow-residual to accept\n";
      return kExitFailure;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int CmdDiff(const fs::path& baseline, const fs::path& scenario,
            const std::optional<fs::path>& out_file, std::ostream& out,
            std::ostream& err) {
  for (const auto& p : {baseline, scenario}) {
    if (!fs::exists(p)) {
      err << "error: report '" << p.string() << "' not found\n"
          << "usage: ioincidence diff --baseline <report.json> --scenario "
             "<report.json> [--out FILE]\n";
      return kExitUsage;
    }
  }
  try {
    const DelimitedTable delta = DiffReports(ReadFile(baseline), ReadFile(scenario));
    if (out_file) {
      if (out_file->has_parent_path()) fs::create_directories(out_file->parent_path());
      std::ofstream f(*out_file, std::ios::binary);
      if (!f) throw Error("cannot write " + out_file->string());
      WriteDelimited(f, delta, ',');
    } else {
      WriteDelimited(out, delta, ',');
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Final incidence of indirect taxes from input-output accounts",
               "ioincidence"};
  app.require_subcommand(1);

  std::string manifest;
  std::string out_dir;

  auto* validate = app.add_subcommand("validate", "Check a bundle's invariants");
  validate->add_option("--manifest", manifest, "Bundle manifest (JSON)")
      ->required();
  validate->add_option("--out", out_dir,
                       "Directory for validation.json (default: stdout)");

  RunConfig config;
  std::string method = "closed-form";
  std::string components = "exports,government,households,gfcf";
  std::string format = "both";
  std::string style = "plain";
  std::string scenario;
  auto* compute = app.add_subcommand("compute", "Run the incidence pipeline");
  compute->add_option("--manifest", manifest, "Bundle manifest (JSON)")
      ->required();
  compute->add_option("--method", method, "closed-form | truncated")
      ->check(CLI::IsMember({"closed-form", "truncated"}));
  compute->add_option("--tol", config.propagation.tol,
                      "Truncation tolerance (relative residual mass)")
      ->check(CLI::PositiveNumber);
  compute->add_option("--maxstages", config.propagation.max_stages,
                      "Maximum series terms for the truncated method")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  compute->add_option("--conservation-tol", config.propagation.conservation_tol,
                      "Relative conservation tolerance");
  compute->add_option("--threshold", config.threshold,
                      "Display threshold for rates (currency units)");
  compute->add_option("--scenario", scenario,
                      "Per-activity tax scale file (code,scale)");
  compute->add_flag("--skip-margins", config.skip_margins,
                    "Do not redistribute margin services");
  compute->add_flag("--allow-residual", config.allow_residual,
                    "Exit 0 even if tax is left unallocated");
  compute->add_option("--components", components,
                      "Comma-separated component keys, or 'all'");
  compute->add_option("--out", out_dir, "Output directory");
  compute->add_option("--format", format, "csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  compute->add_option("--precision", config.report.money_precision,
                      "Decimals for monetary tables")
      ->check(CLI::Range(0, 12));
  compute->add_option("--rate-precision", config.report.rate_precision,
                      "Decimals for rate tables")
      ->check(CLI::Range(0, 12));
  compute->add_option("--style", style, "plain | grouped")
      ->check(CLI::IsMember({"plain", "grouped"}));

  std::string baseline;
  std::string scenario_report;
  auto* diff = app.add_subcommand("diff", "Compare two structured reports");
  diff->add_option("--baseline", baseline, "Baseline report.json")->required();
  diff->add_option("--scenario", scenario_report, "Scenario report.json")
      ->required();
  diff->add_option("--out", out_dir, "Output file (default: stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (compute->parsed()) {
      config.components = ParseComponentList(components);
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = validate->parsed()  ? validate
                          : compute->parsed() ? compute
                          : diff->parsed()    ? diff
                                              : &app;
    err << sub->help();
    return kExitUsage;
  }

  if (validate->parsed()) {
    std::optional<fs::path> dir;
    if (!out_dir.empty()) {
      dir = out_dir;
    } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
      dir = env;
    }
    return CmdValidate(manifest, dir, out, err);
  }
  if (compute->parsed()) {
    config.manifest = manifest;
    config.propagation.method = method == "truncated"
                                    ? PropagationMethod::kTruncated
                                    : PropagationMethod::kClosedForm;
    if (!scenario.empty()) config.scenario = scenario;
    config.out_dir = out_dir.empty() ? DefaultOutDir() : fs::path{out_dir};
    config.report.format = format == "csv"    ? ReportFormat::kDelimited
                           : format == "json" ? ReportFormat::kStructured
                                              : ReportFormat::kBoth;
    config.report.style =
        style == "grouped" ? NumberStyle::kGrouped : NumberStyle::kPlain;
    config.report.delimiter = style == "grouped" ? ';' : ',';
    return CmdCompute(config, out, err);
  }
  std::optional<fs::path> target;
  if (!out_dir.empty()) target = out_dir;
  return CmdDiff(baseline, scenario_report, target, out, err);
}

}  // namespace incidence::cli
