#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "incidence/accounts.h"
#include "incidence/engine.h"
#include "incidence/report.h"

namespace incidence::cli {

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // validation or convergence failure, bad data
  kExitUsage = 2,
};

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "IOINCIDENCE_OUT";

struct RunConfig {
  std::filesystem::path manifest;
  PropagationOptions propagation;
  double threshold = 1000.0;
  std::vector<DemandComponent> components{kReportedComponents.begin(),
                                          kReportedComponents.end()};
  std::optional<std::filesystem::path> scenario;
  bool skip_margins = false;
  bool allow_residual = false;
  std::filesystem::path out_dir;
  ReportOptions report;
};

int CmdValidate(const std::filesystem::path& manifest,
                const std::optional<std::filesystem::path>& out_dir,
                std::ostream& out, std::ostream& err);

int CmdCompute(const RunConfig& config, std::ostream& out, std::ostream& err);

int CmdDiff(const std::filesystem::path& baseline,
            const std::filesystem::path& scenario,
            const std::optional<std::filesystem::path>& out_file,
            std::ostream& out, std::ostream& err);

// Reads a scenario scale file (code,scale) aligned to the accounts.
Vector ReadScenario(const std::filesystem::path& path,
                    const IOAccounts& accounts);

// Parses argv-style arguments (args[0] is the program name) and dispatches.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace incidence::cli
