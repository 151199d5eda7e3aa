#include "incidence/rates.h"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace incidence {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Appends the total-final-demand column (row sums over all six components).
Matrix WithTotalColumn(const Matrix& m) {
  Matrix out(m.rows(), m.cols() + 1);
  out << m, m.rowwise().sum();
  return out;
}

std::string ColumnName(Eigen::Index c) {
  if (c == kTotalColumn) return "total";
  return std::string{ComponentKey(kAllComponents[static_cast<std::size_t>(c)])};
}

}  // namespace

double TaxExclusiveRate(double incidence, double expenditure) {
  const double base = expenditure - incidence;
  if (!(base > 0.0)) return kNaN;
  return 100.0 * incidence / base;
}

RateReport EffectiveRates(const IncidenceResult& result,
                          const Matrix& expenditure, double threshold) {
  const Matrix& fi = result.final_incidence;
  if (expenditure.rows() != fi.rows() || expenditure.cols() != fi.cols()) {
    throw RateError(fmt::format(
        "expenditure is {}x{}, incidence is {}x{}", expenditure.rows(),
        expenditure.cols(), fi.rows(), fi.cols()));
  }
  RateReport report;
  report.activities = result.activities;
  report.threshold = threshold;
  report.incidence = WithTotalColumn(fi);
  report.expenditure = WithTotalColumn(expenditure);

  const Eigen::Index n = report.incidence.rows();
  const Eigen::Index cols = report.incidence.cols();
  report.rates = Matrix::Constant(n, cols, kNaN);
  report.masked = Mask::Constant(n, cols, true);

  auto evaluate = [&](double inc, double exp, const std::string& where,
                      double& rate, bool& masked) {
    rate = TaxExclusiveRate(inc, exp);
    const bool below = !(exp > threshold);
    masked = below || std::isnan(rate);
    if (!below && std::isnan(rate)) {
      report.diagnostics.push_back(fmt::format(
          "{}: expenditure {} does not exceed incidence {}; rate not defined",
          where, exp, inc));
    }
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      bool masked = true;
      evaluate(report.incidence(i, c), report.expenditure(i, c),
               fmt::format("{}/{}",
                           report.activities[static_cast<std::size_t>(i)].code,
                           ColumnName(c)),
               report.rates(i, c), masked);
      report.masked(i, c) = masked;
    }
  }

  report.total_incidence = report.incidence.colwise().sum().transpose();
  report.total_expenditure = report.expenditure.colwise().sum().transpose();
  report.total_rates = Vector::Constant(cols, kNaN);
  report.total_masked = Mask::Constant(cols, 1, true);
  for (Eigen::Index c = 0; c < cols; ++c) {
    bool masked = true;
    evaluate(report.total_incidence(c), report.total_expenditure(c),
             "total/" + ColumnName(c), report.total_rates(c), masked);
    report.total_masked(c) = masked;
  }

  if (result.totals.grand_total != 0.0) {
    report.component_shares = ComponentShares(result);
  }
  return report;
}

std::array<double, kNumComponents> ComponentShares(
    const IncidenceResult& result) {
  const double grand = result.totals.grand_total;
  if (grand == 0.0) {
    throw RateError("grand-total incidence is zero; shares undefined");
  }
  std::array<double, kNumComponents> shares{};
  for (std::size_t c = 0; c < kNumComponents; ++c) {
    shares[c] = 100.0 * result.totals.per_component[c] / grand;
  }
  return shares;
}

double IntermediateShare(const CoefficientSystem& system) {
  const double intermediate = system.idi.sum();
  const double total = intermediate + system.fsf.sum();
  if (total == 0.0) throw RateError("first-stage total is zero");
  return 100.0 * intermediate / total;
}

double SingleRateEquivalent(const IncidenceResult& result,
                            const Matrix& expenditure) {
  const auto households = static_cast<Eigen::Index>(
      Index(DemandComponent::kHouseholdConsumption));
  if (expenditure.rows() != result.final_incidence.rows() ||
      expenditure.cols() != result.final_incidence.cols()) {
    throw RateError("expenditure shape does not match incidence");
  }
  const double base = expenditure.col(households).sum() -
                      result.final_incidence.col(households).sum();
  if (!(base > 0.0)) {
    throw RateError(fmt::format("household net-of-tax base {} is not positive",
                                base));
  }
  return 100.0 * result.totals.grand_total / base;
}

}  // namespace incidence
