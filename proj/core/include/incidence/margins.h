#pragma once

#include <iosfwd>

#include "incidence/accounts.h"

namespace incidence {

class MarginError : public Error {
 public:
  using Error::Error;
};

// Monetary deltas of a margin redistribution. Every matrix is n x (n + 6):
// columns are the n intermediate users followed by the six components.
// reallocated_* hold amounts added to non-margin rows, removed_* hold
// amounts (as positive quantities of the original sign) taken off margin
// rows.
struct MarginAdjustment {
  Matrix reallocated_flows;
  Matrix removed_from_margin;
  Matrix reallocated_tax;
  Matrix removed_tax;
};

struct MarginResult {
  IOAccounts accounts;
  MarginAdjustment adjustment;
};

// Moves the margin fraction of each margin activity's supply row and
// tax-destination row onto the non-margin (goods) activities, column by
// column, in proportion to each goods activity's supply into that column.
// The result carries zero margin shares and metadata.margins_applied.
//
// Throws MarginError when a column carries margin flow or tax but no goods
// supply to weight it by, when a positive share sits on a zero-supply
// activity, or when shares are nonzero on accounts already redistributed.
MarginResult RedistributeMargins(const IOAccounts& accounts);

// Audit listing: one line per nonzero delta,
// code,destination,kind,delta (kind = flow | tax; delta signed).
void WriteMarginAudit(std::ostream& out, const IOAccounts& original,
                      const MarginAdjustment& adjustment, char delimiter = ',');

}  // namespace incidence
