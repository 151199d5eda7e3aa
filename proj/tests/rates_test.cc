#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "incidence/engine.h"
#include "incidence/rates.h"
#include "support/test_support.h"

namespace incidence {
namespace {

constexpr Eigen::Index kHouseholds =
    static_cast<Eigen::Index>(Index(DemandComponent::kHouseholdConsumption));

// A result carrying only final incidence and its totals, which is all the
// rate layer reads.
IncidenceResult ResultFrom(const Matrix& final_incidence) {
  IncidenceResult r;
  for (Eigen::Index i = 0; i < final_incidence.rows(); ++i) {
    r.activities.push_back(Activity{static_cast<std::size_t>(i),
                                    "A" + std::to_string(i), "", false});
  }
  r.final_incidence = final_incidence;
  r.fsf = final_incidence;
  r.ies = Matrix::Zero(final_incidence.rows(), final_incidence.cols());
  for (std::size_t c = 0; c < kNumComponents; ++c) {
    r.totals.per_component[c] =
        final_incidence.col(static_cast<Eigen::Index>(c)).sum();
  }
  r.totals.grand_total = final_incidence.sum();
  return r;
}

TEST(TaxExclusiveRate, Basics) {
  EXPECT_NEAR(TaxExclusiveRate(638367, 638367 + 638367 / 0.191), 19.1, 1e-9);
  EXPECT_DOUBLE_EQ(TaxExclusiveRate(0, 5000), 0.0);
  EXPECT_DOUBLE_EQ(TaxExclusiveRate(20, 120), 20.0);
  EXPECT_TRUE(std::isnan(TaxExclusiveRate(10, 10)));
  EXPECT_TRUE(std::isnan(TaxExclusiveRate(10, 5)));
}

TEST(EffectiveRates, MaskAndTotals) {
  Matrix fi = Matrix::Zero(3, 6);
  Matrix exp = Matrix::Zero(3, 6);
  fi(0, kHouseholds) = 100;
  exp(0, kHouseholds) = 1100;  // 10%
  fi(1, kHouseholds) = 50;
  exp(1, kHouseholds) = 999;  // below threshold
  exp(2, kHouseholds) = 2000;  // zero incidence, 0%
  fi(2, 0) = 30;
  exp(2, 0) = 20;  // expenditure below incidence
  const RateReport r = EffectiveRates(ResultFrom(fi), exp);
  EXPECT_EQ(r.rates.cols(), 7);
  EXPECT_NEAR(r.rates(0, kHouseholds), 10.0, 1e-12);
  EXPECT_FALSE(r.masked(0, kHouseholds));
  EXPECT_TRUE(r.masked(1, kHouseholds));
  EXPECT_NEAR(r.rates(1, kHouseholds), 100.0 * 50 / 949, 1e-12);
  EXPECT_DOUBLE_EQ(r.rates(2, kHouseholds), 0.0);
  EXPECT_FALSE(r.masked(2, kHouseholds));
  EXPECT_TRUE(std::isnan(r.rates(2, 0)));
  EXPECT_TRUE(r.masked(2, 0));
  EXPECT_TRUE(r.masked(0, 0));  // zero expenditure

  // Total column: row sums over all six components.
  EXPECT_DOUBLE_EQ(r.incidence(2, kTotalColumn), 30);
  EXPECT_DOUBLE_EQ(r.expenditure(2, kTotalColumn), 2020);
  EXPECT_NEAR(r.total_rates(kHouseholds), 100.0 * 150 / (4099 - 150), 1e-12);
  EXPECT_FALSE(r.total_masked(kHouseholds));
  EXPECT_NEAR(r.component_shares[Index(DemandComponent::kHouseholdConsumption)],
              100.0 * 150 / 180, 1e-12);
}

TEST(EffectiveRates, InvalidDenominatorAboveThresholdIsDiagnosed) {
  Matrix fi = Matrix::Zero(1, 6);
  Matrix exp = Matrix::Zero(1, 6);
  fi(0, 0) = 5000;
  exp(0, 0) = 4000;
  const RateReport r = EffectiveRates(ResultFrom(fi), exp);
  EXPECT_TRUE(r.masked(0, 0));
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_NE(r.diagnostics.front().find("A0/exports"), std::string::npos)
      << r.diagnostics.front();
}

TEST(EffectiveRates, DimensionMismatchIsAnError) {
  EXPECT_THROW(EffectiveRates(ResultFrom(Matrix::Ones(3, 6)), Matrix::Ones(2, 6)),
               RateError);
  EXPECT_THROW(SingleRateEquivalent(ResultFrom(Matrix::Ones(3, 6)),
                                    Matrix::Ones(3, 5)),
               RateError);
}

TEST(ComponentShares, SumToHundredAndZeroIsAnError) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix fi(5, 6);
    for (Eigen::Index k = 0; k < fi.size(); ++k) fi.data()[k] = u(rng);
    const auto s = ComponentShares(ResultFrom(fi));
    EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 100.0, 1e-9);
  }
  EXPECT_THROW(ComponentShares(ResultFrom(Matrix::Zero(2, 6))), RateError);
}

TEST(IntermediateShare, FromSystem) {
  CoefficientSystem sys;
  sys.idi = Vector::Constant(2, 10);
  sys.fsf = Matrix::Zero(2, 6);
  sys.fsf(0, 2) = 60;
  EXPECT_DOUBLE_EQ(IntermediateShare(sys), 25.0);
}

TEST(SingleRateEquivalent, GrandTotalOverHouseholdBase) {
  Matrix fi = Matrix::Zero(2, 6);
  fi(0, kHouseholds) = 100;
  fi(1, 0) = 151;  // borne elsewhere but still counted in the numerator
  Matrix exp = Matrix::Zero(2, 6);
  exp(0, kHouseholds) = 600;
  exp(1, kHouseholds) = 500;
  // 251 / (1100 - 100) = 25.1%
  EXPECT_NEAR(SingleRateEquivalent(ResultFrom(fi), exp), 25.1, 1e-12);
  exp.setZero();
  EXPECT_THROW(SingleRateEquivalent(ResultFrom(fi), exp), RateError);
}

// inc = r / (100 + r) * exp inverts the rate definition.
TEST(Properties, RateRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rate(0, 80), base(1001, 1e6);
  for (int trial = 0; trial < 500; ++trial) {
    const double r = rate(rng), e = base(rng);
    const double inc = r / (100.0 + r) * e;
    EXPECT_NEAR(TaxExclusiveRate(inc, e), r, 1e-9 * (1 + r));
  }
}

TEST(Properties, MonotoneInIncidence) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const double e = 1000 + 1e5 * u(rng);
    const double a = e * 0.9 * u(rng), b = e * 0.9 * u(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    EXPECT_LE(TaxExclusiveRate(lo, e), TaxExclusiveRate(hi, e));
  }
}

// Changing the threshold changes only the mask, never the computed values.
TEST(Properties, ThresholdIsDisplayOnly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix fi(6, 6), exp(6, 6);
    for (Eigen::Index k = 0; k < fi.size(); ++k) {
      exp.data()[k] = 3000 * u(rng);
      fi.data()[k] = 0.3 * exp.data()[k] * u(rng);
    }
    const IncidenceResult res = ResultFrom(fi);
    const RateReport a = EffectiveRates(res, exp, 1000);
    const RateReport b = EffectiveRates(res, exp, 0);
    ASSERT_EQ(a.rates.size(), b.rates.size());
    for (Eigen::Index k = 0; k < a.rates.size(); ++k) {
      const double x = a.rates.data()[k], y = b.rates.data()[k];
      EXPECT_TRUE((std::isnan(x) && std::isnan(y)) || x == y);
    }
    EXPECT_TRUE(a.total_rates.isApprox(b.total_rates));
    EXPECT_GE(a.masked.count(), b.masked.count());
  }
}

}  // namespace
}  // namespace incidence
