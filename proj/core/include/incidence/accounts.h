#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace incidence {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Final-demand components in canonical column order.
enum class DemandComponent : std::size_t {
  kExports = 0,
  kGovernmentConsumption,
  kHouseholdConsumption,
  kISFLSFConsumption,
  kGrossFixedCapitalFormation,
  kInventoryChange,
};

inline constexpr std::size_t kNumComponents = 6;

inline constexpr std::array<DemandComponent, kNumComponents> kAllComponents = {
    DemandComponent::kExports,
    DemandComponent::kGovernmentConsumption,
    DemandComponent::kHouseholdConsumption,
    DemandComponent::kISFLSFConsumption,
    DemandComponent::kGrossFixedCapitalFormation,
    DemandComponent::kInventoryChange,
};

// Components shown in published tables: ISFLSF and inventory change are kept
// internally but left out of the default layout.
inline constexpr std::array<DemandComponent, 4> kReportedComponents = {
    DemandComponent::kExports,
    DemandComponent::kGovernmentConsumption,
    DemandComponent::kHouseholdConsumption,
    DemandComponent::kGrossFixedCapitalFormation,
};

constexpr std::size_t Index(DemandComponent c) {
  return static_cast<std::size_t>(c);
}

// Short machine key used in file headers ("exports", "households", ...).
std::string_view ComponentKey(DemandComponent c);
// Human-readable column heading.
std::string_view ComponentLabel(DemandComponent c);
std::optional<DemandComponent> ParseComponent(std::string_view key);

struct Activity {
  std::size_t index = 0;
  std::string code;
  std::string label;
  bool margin = false;  // flagged as a margin-service supplier
};

struct TaxRevenue {
  std::string tax;
  double amount = 0.0;
};

struct Metadata {
  int year = 0;
  std::string currency;
  std::string source;
  std::vector<TaxRevenue> tax_revenue;
  // Set on accounts produced by margin redistribution.
  bool margins_applied = false;
};

// Tax (net of subsidies) by supplying activity and destination.
// dest has n + 6 columns: n intermediate users followed by the six
// components in canonical order.
struct TaxDestinationTable {
  Matrix dest;
  Vector statutory;

  std::size_t size() const { return static_cast<std::size_t>(dest.rows()); }
  auto intermediate() const { return dest.leftCols(dest.rows()); }
  auto final_demand() const { return dest.rightCols(kNumComponents); }
};

// Input-output accounts at a single level of aggregation (activities).
// Monetary values are in the bundle's currency unit (typically millions).
struct IOAccounts {
  std::vector<Activity> activities;
  Matrix flows;        // n x n, flows(i, j) = supply of i used by j
  Matrix finaldemand;  // n x 6, canonical component order
  Vector supply;       // n
  TaxDestinationTable taxdest;
  Vector marginshares;  // n, in [0, 1]
  // Optional gross (tax-inclusive) expenditure base, n x 6. Empty when the
  // bundle does not carry one.
  Matrix expenditure;
  Metadata metadata;

  std::size_t size() const { return activities.size(); }

  // n x (n + 6) concatenation of flows and final demand.
  Matrix SupplyByDestination() const;
  std::optional<std::size_t> FindActivity(std::string_view code) const;
  bool HasMarginShares() const;
};

// Throws Error if the matrix shapes are inconsistent with activities.size().
void CheckShapes(const IOAccounts& accounts);

}  // namespace incidence
