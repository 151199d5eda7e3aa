#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "incidence/bundle.h"
#include "incidence/margins.h"
#include "support/test_support.h"

namespace incidence {
namespace {

constexpr Eigen::Index kHouseholds =
    static_cast<Eigen::Index>(Index(DemandComponent::kHouseholdConsumption));

// Machine-precision comparison scaled by the magnitudes involved.
void ExpectConserved(double before, double after, double scale) {
  EXPECT_NEAR(before, after, 64 * std::numeric_limits<double>::epsilon() *
                                 std::max(1.0, scale));
}

TEST(RedistributeMargins, ZeroSharesIsIdentity) {
  std::mt19937_64 rng(1);
  const IOAccounts acc = testing::RandomAccounts(rng, 5);
  const MarginResult r = RedistributeMargins(acc);
  EXPECT_TRUE(r.accounts.flows == acc.flows);
  EXPECT_TRUE(r.accounts.finaldemand == acc.finaldemand);
  EXPECT_TRUE(r.accounts.supply == acc.supply);
  EXPECT_TRUE(r.accounts.taxdest.dest == acc.taxdest.dest);
  EXPECT_TRUE(r.accounts.taxdest.statutory == acc.taxdest.statutory);
  EXPECT_EQ(r.adjustment.removed_from_margin.cwiseAbs().sum(), 0.0);
  EXPECT_EQ(r.adjustment.reallocated_tax.cwiseAbs().sum(), 0.0);
}

// Pure margin activity supplying 10 to households; goods activities supply
// 30 and 10 there, so weights are 30/40 and 10/40.
TEST(RedistributeMargins, ProportionalToGoodsSupplyInColumn) {
  Matrix flows = Matrix::Zero(3, 3);
  Matrix fd = Matrix::Zero(3, 6);
  fd(0, kHouseholds) = 30;
  fd(1, kHouseholds) = 10;
  fd(2, kHouseholds) = 10;
  Matrix tax = Matrix::Zero(3, 9);
  tax(2, 3 + kHouseholds) = 2.0;
  Vector mu(3);
  mu << 0, 0, 1;
  const IOAccounts acc = testing::MakeAccounts(flows, fd, tax, mu);

  const MarginResult r = RedistributeMargins(acc);
  EXPECT_DOUBLE_EQ(r.accounts.finaldemand(0, kHouseholds), 37.5);
  EXPECT_DOUBLE_EQ(r.accounts.finaldemand(1, kHouseholds), 12.5);
  EXPECT_DOUBLE_EQ(r.accounts.finaldemand(2, kHouseholds), 0.0);
  EXPECT_DOUBLE_EQ(r.adjustment.reallocated_flows(0, 3 + kHouseholds), 7.5);
  EXPECT_DOUBLE_EQ(r.adjustment.reallocated_flows(1, 3 + kHouseholds), 2.5);
  // Tax on the margin service follows the same weights.
  EXPECT_DOUBLE_EQ(r.accounts.taxdest.dest(0, 3 + kHouseholds), 1.5);
  EXPECT_DOUBLE_EQ(r.accounts.taxdest.dest(1, 3 + kHouseholds), 0.5);
  EXPECT_DOUBLE_EQ(r.accounts.supply(0), 37.5);
  EXPECT_DOUBLE_EQ(r.accounts.supply(2), 0.0);
  EXPECT_DOUBLE_EQ(r.accounts.taxdest.statutory(0), 1.5);
  EXPECT_TRUE(r.accounts.metadata.margins_applied);
  EXPECT_EQ(r.accounts.marginshares.cwiseAbs().sum(), 0.0);
  EXPECT_TRUE(Validate(r.accounts).ok());
}

TEST(RedistributeMargins, CommerceShareLeavesResidualRow) {
  Matrix flows(3, 3);
  flows << 5, 10, 4, 8, 2, 6, 10, 20, 0;
  Matrix fd(3, 6);
  fd << 20, 0, 50, 0, 10, 1,  //
      0, 15, 30, 2, 5, 0,     //
      3, 1, 60, 0, 6, 0;
  Matrix tax(3, 9);
  tax << 1, 2, 0, 0, 0, 5, 0, 1, 0,  //
      0, 1, 1, 0, 1, 2, 0, 0, 0,     //
      2, 3, 0, 0, 0, 4, 0, 1, -1;
  Vector mu(3);
  mu << 0, 0, 0.895;
  const IOAccounts acc = testing::MakeAccounts(flows, fd, tax, mu);
  const MarginResult r = RedistributeMargins(acc);
  const Matrix before = acc.SupplyByDestination();
  const Matrix after = r.accounts.SupplyByDestination();
  for (Eigen::Index d = 0; d < before.cols(); ++d) {
    EXPECT_NEAR(r.adjustment.removed_from_margin(2, d), 0.895 * before(2, d),
                1e-12);
    EXPECT_NEAR(after(2, d), 0.105 * before(2, d), 1e-12);
    EXPECT_NEAR(r.accounts.taxdest.dest(2, d), 0.105 * acc.taxdest.dest(2, d),
                1e-12);
  }
  EXPECT_NEAR(r.accounts.supply(2), 0.105 * acc.supply(2), 1e-12);
}

TEST(RedistributeMargins, NegativeTaxKeepsSign) {
  Matrix flows = Matrix::Zero(2, 2);
  Matrix fd = Matrix::Zero(2, 6);
  fd(0, 0) = 10;
  fd(1, 0) = 10;
  Matrix tax = Matrix::Zero(2, 8);
  tax(1, 2) = -4;  // net subsidy on the margin service
  Vector mu(2);
  mu << 0, 0.5;
  const MarginResult r =
      RedistributeMargins(testing::MakeAccounts(flows, fd, tax, mu));
  EXPECT_DOUBLE_EQ(r.accounts.taxdest.dest(0, 2), -2);
  EXPECT_DOUBLE_EQ(r.accounts.taxdest.dest(1, 2), -2);
}

TEST(RedistributeMargins, ColumnWithoutGoodsSupplyIsAnError) {
  Matrix flows = Matrix::Zero(2, 2);
  Matrix fd = Matrix::Zero(2, 6);
  fd(0, 0) = 10;
  fd(1, kHouseholds) = 4;  // only the margin activity sells to households
  Matrix tax = Matrix::Zero(2, 8);
  Vector mu(2);
  mu << 0, 0.3;
  const IOAccounts acc = testing::MakeAccounts(flows, fd, tax, mu);
  try {
    RedistributeMargins(acc);
    FAIL();
  } catch (const MarginError& e) {
    EXPECT_NE(std::string(e.what()).find("households"), std::string::npos)
        << e.what();
  }
}

TEST(RedistributeMargins, ShareOnZeroSupplyIsAnError) {
  Matrix flows = Matrix::Zero(2, 2);
  Matrix fd = Matrix::Zero(2, 6);
  fd(0, 0) = 10;
  Vector mu(2);
  mu << 0, 0.3;
  EXPECT_THROW(RedistributeMargins(testing::MakeAccounts(
                   flows, fd, Matrix::Zero(2, 8), mu)),
               MarginError);
}

TEST(RedistributeMargins, SecondApplicationWithSharesIsAnError) {
  std::mt19937_64 rng(3);
  const IOAccounts acc = testing::RandomAccounts(rng, 6, 0.8, 2);
  MarginResult once = RedistributeMargins(acc);
  // Applying again to the output (shares zeroed) is a no-op.
  const MarginResult twice = RedistributeMargins(once.accounts);
  EXPECT_TRUE(twice.accounts.flows == once.accounts.flows);
  EXPECT_TRUE(twice.accounts.taxdest.dest == once.accounts.taxdest.dest);
  // Restoring the original shares on redistributed accounts is rejected.
  once.accounts.marginshares = acc.marginshares;
  EXPECT_THROW(RedistributeMargins(once.accounts), MarginError);
}

// Supply, per-destination column totals and tax are conserved; the
// reallocated amounts in each column equal the amounts removed.
TEST(RedistributeMargins, ConservationOnRandomBundles) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4 + trial % 9;
    const int margins = 1 + trial % 3;
    const IOAccounts acc = testing::RandomAccounts(rng, n, 0.85, margins);
    const MarginResult r = RedistributeMargins(acc);
    const Matrix before = acc.SupplyByDestination();
    const Matrix after = r.accounts.SupplyByDestination();
    const double scale = before.cwiseAbs().sum();
    ExpectConserved(acc.supply.sum(), r.accounts.supply.sum(), scale);
    ExpectConserved(acc.taxdest.statutory.sum(),
                    r.accounts.taxdest.statutory.sum(),
                    acc.taxdest.dest.cwiseAbs().sum());
    ExpectConserved(acc.taxdest.dest.sum(), r.accounts.taxdest.dest.sum(),
                    acc.taxdest.dest.cwiseAbs().sum());
    for (Eigen::Index d = 0; d < before.cols(); ++d) {
      ExpectConserved(before.col(d).sum(), after.col(d).sum(), scale);
      ExpectConserved(acc.taxdest.dest.col(d).sum(),
                      r.accounts.taxdest.dest.col(d).sum(), scale);
      ExpectConserved(r.adjustment.reallocated_flows.col(d).sum(),
                      r.adjustment.removed_from_margin.col(d).sum(), scale);
    }
    EXPECT_TRUE(Validate(r.accounts).ok()) << "trial " << trial;
  }
}

TEST(MarginAudit, ListsSignedDeltas) {
  Matrix flows = Matrix::Zero(3, 3);
  Matrix fd = Matrix::Zero(3, 6);
  fd(0, kHouseholds) = 30;
  fd(1, kHouseholds) = 10;
  fd(2, kHouseholds) = 10;
  Vector mu(3);
  mu << 0, 0, 1;
  const IOAccounts acc =
      testing::MakeAccounts(flows, fd, Matrix::Zero(3, 9), mu);
  const MarginResult r = RedistributeMargins(acc);
  std::ostringstream out;
  WriteMarginAudit(out, acc, r.adjustment);
  EXPECT_EQ(out.str(),
            "code,destination,kind,delta\n"
            "A0,households,flow,7.5\n"
            "A1,households,flow,2.5\n"
            "A2,households,flow,-10\n");
}

}  // namespace
}  // namespace incidence
