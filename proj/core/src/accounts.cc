#include "incidence/accounts.h"

#include <fmt/format.h>

namespace incidence {

std::string_view ComponentKey(DemandComponent c) {
  switch (c) {
    case DemandComponent::kExports:
      return "exports";
    case DemandComponent::kGovernmentConsumption:
      return "government";
    case DemandComponent::kHouseholdConsumption:
      return "households";
    case DemandComponent::kISFLSFConsumption:
      return "isflsf";
    case DemandComponent::kGrossFixedCapitalFormation:
      return "gfcf";
    case DemandComponent::kInventoryChange:
      return "inventory";
  }
  return "?";
}

std::string_view ComponentLabel(DemandComponent c) {
  switch (c) {
    case DemandComponent::kExports:
      return "Exports";
    case DemandComponent::kGovernmentConsumption:
      return "Government consumption";
    case DemandComponent::kHouseholdConsumption:
      return "Household consumption";
    case DemandComponent::kISFLSFConsumption:
      return "ISFLSF consumption";
    case DemandComponent::kGrossFixedCapitalFormation:
      return "Gross fixed capital formation";
    case DemandComponent::kInventoryChange:
      return "Inventory change";
  }
  return "?";
}

std::optional<DemandComponent> ParseComponent(std::string_view key) {
  for (DemandComponent c : kAllComponents) {
    if (ComponentKey(c) == key) return c;
  }
  return std::nullopt;
}

Matrix IOAccounts::SupplyByDestination() const {
  const auto n = static_cast<Eigen::Index>(size());
  Matrix out(n, n + static_cast<Eigen::Index>(kNumComponents));
  out << flows, finaldemand;
  return out;
}

std::optional<std::size_t> IOAccounts::FindActivity(
    std::string_view code) const {
  for (const Activity& a : activities) {
    if (a.code == code) return a.index;
  }
  return std::nullopt;
}

bool IOAccounts::HasMarginShares() const {
  return (marginshares.array() != 0.0).any();
}

void CheckShapes(const IOAccounts& accounts) {
  const auto n = static_cast<Eigen::Index>(accounts.size());
  const auto k = static_cast<Eigen::Index>(kNumComponents);
  auto expect = [](bool ok, std::string_view what, Eigen::Index rows,
                   Eigen::Index cols, Eigen::Index want_rows,
                   Eigen::Index want_cols) {
    if (!ok) {
      throw Error(fmt::format("{} is {}x{}, expected {}x{}", what, rows, cols,
                              want_rows, want_cols));
    }
  };
  const auto& a = accounts;
  expect(a.flows.rows() == n && a.flows.cols() == n, "flows", a.flows.rows(),
         a.flows.cols(), n, n);
  expect(a.finaldemand.rows() == n && a.finaldemand.cols() == k,
         "finaldemand", a.finaldemand.rows(), a.finaldemand.cols(), n, k);
  expect(a.supply.size() == n, "supply", a.supply.size(), 1, n, 1);
  expect(a.taxdest.dest.rows() == n && a.taxdest.dest.cols() == n + k,
         "taxdest", a.taxdest.dest.rows(), a.taxdest.dest.cols(), n, n + k);
  expect(a.taxdest.statutory.size() == n, "statutory",
         a.taxdest.statutory.size(), 1, n, 1);
  expect(a.marginshares.size() == n, "marginshares", a.marginshares.size(), 1,
         n, 1);
  expect(a.expenditure.size() == 0 ||
             (a.expenditure.rows() == n && a.expenditure.cols() == k),
         "expenditure", a.expenditure.rows(), a.expenditure.cols(), n, k);
  for (std::size_t i = 0; i < a.activities.size(); ++i) {
    if (a.activities[i].index != i) {
      throw Error(fmt::format("activity '{}' has index {}, expected {}",
                              a.activities[i].code, a.activities[i].index, i));
    }
  }
}

}  // namespace incidence
