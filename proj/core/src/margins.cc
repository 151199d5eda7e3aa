#include "incidence/margins.h"

#include <ostream>
#include <vector>

#include <fmt/format.h>

#include "incidence/delimited.h"

namespace incidence {
namespace {

std::string DestinationName(const IOAccounts& accounts, Eigen::Index d) {
  const auto n = static_cast<Eigen::Index>(accounts.size());
  if (d < n) return accounts.activities[static_cast<std::size_t>(d)].code;
  return std::string{
      ComponentKey(kAllComponents[static_cast<std::size_t>(d - n)])};
}

}  // namespace

MarginResult RedistributeMargins(const IOAccounts& accounts) {
  CheckShapes(accounts);
  const auto n = static_cast<Eigen::Index>(accounts.size());
  const auto cols = n + static_cast<Eigen::Index>(kNumComponents);

  MarginResult result{accounts, {}};
  MarginAdjustment& adj = result.adjustment;
  adj.reallocated_flows = Matrix::Zero(n, cols);
  adj.removed_from_margin = Matrix::Zero(n, cols);
  adj.reallocated_tax = Matrix::Zero(n, cols);
  adj.removed_tax = Matrix::Zero(n, cols);

  if (!accounts.HasMarginShares()) return result;
  if (accounts.metadata.margins_applied) {
    throw MarginError(
        "margin shares are nonzero on accounts that were already "
        "redistributed");
  }

  std::vector<bool> source(static_cast<std::size_t>(n), false);
  std::vector<bool> target(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& act = accounts.activities[static_cast<std::size_t>(i)];
    const double mu = accounts.marginshares(i);
    if (!(mu >= 0.0 && mu <= 1.0)) {
      throw MarginError(fmt::format("margin share {} of '{}' is outside [0, 1]",
                                    mu, act.code));
    }
    if (mu > 0.0 && accounts.supply(i) == 0.0) {
      throw MarginError(fmt::format(
          "margin share {} on zero-supply activity '{}'", mu, act.code));
    }
    source[static_cast<std::size_t>(i)] = mu > 0.0;
    target[static_cast<std::size_t>(i)] = mu == 0.0 && !act.margin;
  }

  const Matrix supply_by_dest = accounts.SupplyByDestination();
  const Matrix& tax = accounts.taxdest.dest;
  for (Eigen::Index m = 0; m < n; ++m) {
    if (!source[static_cast<std::size_t>(m)]) continue;
    const double mu = accounts.marginshares(m);
    adj.removed_from_margin.row(m) = mu * supply_by_dest.row(m);
    adj.removed_tax.row(m) = mu * tax.row(m);
  }

  for (Eigen::Index d = 0; d < cols; ++d) {
    const double margin_flow = adj.removed_from_margin.col(d).sum();
    const double margin_tax = adj.removed_tax.col(d).sum();
    if (margin_flow == 0.0 && margin_tax == 0.0) continue;
    double goods = 0.0;
    for (Eigen::Index g = 0; g < n; ++g) {
      if (target[static_cast<std::size_t>(g)]) goods += supply_by_dest(g, d);
    }
    if (goods == 0.0) {
      throw MarginError(fmt::format(
          "destination '{}' receives margin flow {} and margin tax {} but no "
          "goods supply to allocate them over",
          DestinationName(accounts, d), margin_flow, margin_tax));
    }
    for (Eigen::Index g = 0; g < n; ++g) {
      if (!target[static_cast<std::size_t>(g)]) continue;
      const double weight = supply_by_dest(g, d) / goods;
      adj.reallocated_flows(g, d) = weight * margin_flow;
      adj.reallocated_tax(g, d) = weight * margin_tax;
    }
  }

  IOAccounts& out = result.accounts;
  const Matrix flow_delta = adj.reallocated_flows - adj.removed_from_margin;
  const Matrix tax_delta = adj.reallocated_tax - adj.removed_tax;
  const Matrix adjusted = supply_by_dest + flow_delta;
  out.flows = adjusted.leftCols(n);
  out.finaldemand = adjusted.rightCols(kNumComponents);
  out.supply = accounts.supply + flow_delta.rowwise().sum();
  out.taxdest.dest = tax + tax_delta;
  out.taxdest.statutory = accounts.taxdest.statutory + tax_delta.rowwise().sum();
  out.marginshares = Vector::Zero(n);
  out.metadata.margins_applied = true;
  return result;
}

void WriteMarginAudit(std::ostream& out, const IOAccounts& original,
                      const MarginAdjustment& adjustment, char delimiter) {
  DelimitedTable table;
  table.header = {"code", "destination", "kind", "delta"};
  const auto n = static_cast<Eigen::Index>(original.size());
  const Matrix flow_delta =
      adjustment.reallocated_flows - adjustment.removed_from_margin;
  const Matrix tax_delta = adjustment.reallocated_tax - adjustment.removed_tax;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string& code =
        original.activities[static_cast<std::size_t>(i)].code;
    for (Eigen::Index d = 0; d < flow_delta.cols(); ++d) {
      if (flow_delta(i, d) != 0.0) {
        table.rows.push_back({code, DestinationName(original, d), "flow",
                              FormatRoundTrip(flow_delta(i, d))});
      }
      if (tax_delta(i, d) != 0.0) {
        table.rows.push_back({code, DestinationName(original, d), "tax",
                              FormatRoundTrip(tax_delta(i, d))});
      }
    }
  }
  WriteDelimited(out, table, delimiter);
}

}  // namespace incidence
