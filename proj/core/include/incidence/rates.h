#pragma once

#include <array>
#include <string>
#include <vector>

#include "incidence/accounts.h"
#include "incidence/engine.h"

namespace incidence {

class RateError : public Error {
 public:
  using Error::Error;
};

// Rates are not displayed where the gross expenditure is at or below this
// amount (currency millions).
inline constexpr double kDefaultDisplayThreshold = 1000.0;

// Column index of the total-final-demand column in RateReport matrices.
inline constexpr Eigen::Index kTotalColumn =
    static_cast<Eigen::Index>(kNumComponents);

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Tax-exclusive effective rates, in percent:
//   rate = incidence / (expenditure - incidence) * 100.
// Matrices are n x 7: six components then the total-final-demand column.
// `rates` holds the computed value wherever the denominator is positive
// (NaN otherwise) independent of the threshold; `masked` is the display
// mask.
struct RateReport {
  std::vector<Activity> activities;
  Matrix incidence;
  Matrix expenditure;
  Matrix rates;
  Mask masked;

  // Totals over activities, length 7.
  Vector total_incidence;
  Vector total_expenditure;
  Vector total_rates;
  Mask total_masked;

  double threshold = kDefaultDisplayThreshold;
  std::array<double, kNumComponents> component_shares{};
  std::vector<std::string> diagnostics;
};

// Percent rate for one cell, or NaN when expenditure - incidence <= 0.
double TaxExclusiveRate(double incidence, double expenditure);

// `expenditure` is n x 6, gross of tax, in the result's activity order.
RateReport EffectiveRates(const IncidenceResult& result,
                          const Matrix& expenditure,
                          double threshold = kDefaultDisplayThreshold);

// Share of grand-total final incidence borne by each component, percent.
std::array<double, kNumComponents> ComponentShares(
    const IncidenceResult& result);

// Share of first-stage tax that lands on intermediate demand, percent.
double IntermediateShare(const CoefficientSystem& system);

// Rate a tax levied on household consumption alone would need to raise the
// same total revenue: grand total / household net-of-tax base, percent.
double SingleRateEquivalent(const IncidenceResult& result,
                            const Matrix& expenditure);

}  // namespace incidence
