#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "incidence/accounts.h"

namespace incidence {

// Relative tolerance for the supply row identity and the statutory total.
inline constexpr double kBalanceTolerance = 1e-6;

class BundleError : public Error {
 public:
  using Error::Error;
};

struct ValidationCheck {
  std::string check;    // e.g. "row_balance"
  std::string subject;  // activity code, or "*" for global checks
  bool passed = true;
  double residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  std::vector<ValidationCheck> failures() const;
  // JSON document: {"ok": bool, "checks": [{...}, ...]}.
  std::string ToJson() const;
};

// Runs every accounts invariant. Never throws on data problems; shape
// problems are reported as a failed "shape" check.
ValidationReport Validate(const IOAccounts& accounts);

// Parses a manifest and its tables without checking numeric invariants.
// Throws BundleError on structural problems: missing files, unknown or
// duplicate activity codes, dimension mismatches, unparsable numbers.
IOAccounts ReadBundle(const std::filesystem::path& manifest_path);

// ReadBundle followed by Validate; throws BundleError listing every failed
// check (with residuals) if the accounts are not valid.
IOAccounts LoadBundle(const std::filesystem::path& manifest_path);

// Writes manifest.json plus one table per logical name into `dir`.
// Numbers are written in shortest round-trip form, so SaveBundle followed by
// ReadBundle reproduces the numeric payload bit for bit.
void SaveBundle(const IOAccounts& accounts, const std::filesystem::path& dir,
                char delimiter = ',');

}  // namespace incidence
