#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "incidence/accounts.h"

namespace incidence {

class EngineError : public Error {
 public:
  using Error::Error;
};

// Coefficients of the cascading-tax model.
//
// NOTE: `a` is ROW-normalised: a(i, j) is the share of activity i's total
// supply that goes to intermediate user j. This is the supplier-side share
// matrix, not the column-normalised Leontief technical-coefficient matrix.
// Conservation of tax relies on every row of [a | z] summing to one.
struct CoefficientSystem {
  std::vector<Activity> activities;
  Matrix a;            // n x n
  Matrix z;            // n x 6, final-demand shares
  Vector idi;          // n, first-stage tax on intermediate demand
  Matrix fsf;          // n x 6, first-stage tax on final demand
  Vector statutory;    // n, as recorded in the accounts
  std::vector<std::string> warnings;

  std::size_t size() const { return static_cast<std::size_t>(a.rows()); }
};

struct BuildOptions {
  // Build from accounts that still carry margin shares.
  bool allow_unredistributed_margins = false;
};

enum class PropagationMethod { kClosedForm, kTruncated };

struct PropagationOptions {
  PropagationMethod method = PropagationMethod::kClosedForm;
  double tol = 1e-12;                   // truncated: relative residual mass
  std::size_t max_stages = 100000;      // truncated
  double conservation_tol = 1e-9;       // relative
  double condition_limit = 1e12;        // closed form: max estimated cond(I - A)
};

struct IncidenceTotals {
  std::array<double, kNumComponents> per_component{};
  double grand_total = 0.0;
  double first_stage_total = 0.0;  // sum(idi) + sum(fsf)
  double statutory_total = 0.0;
  double conservation_residual = 0.0;  // grand_total - first_stage_total
  double relative_residual = 0.0;
  bool conserved = true;
};

struct MethodInfo {
  PropagationMethod method = PropagationMethod::kClosedForm;
  std::size_t stages = 0;        // truncated: number of series terms summed
  double residual_mass = 0.0;    // truncated: sum(idi' a^stages), signed
  double tol = 0.0;
  bool converged = true;
  double condition_estimate = 0.0;  // closed form: 1 / rcond of (I - A)
  double conservation_tol = 0.0;
};

struct IncidenceResult {
  std::vector<Activity> activities;
  Matrix ies;              // n x 6, subsequent-stage incidence
  Matrix fsf;              // n x 6, first-stage incidence on final demand
  Matrix final_incidence;  // fsf + ies
  IncidenceTotals totals;
  MethodInfo method;
  std::vector<std::string> warnings;
};

CoefficientSystem BuildSystem(const IOAccounts& accounts,
                              const BuildOptions& options = {});

// v' = idi' (I - a)^-1 via an LU solve of (I - a)' v = idi, then
// ies(i, c) = v(i) z(i, c). Throws EngineError when I - a is singular or its
// estimated condition number exceeds options.condition_limit.
IncidenceResult PropagateClosedForm(const CoefficientSystem& system,
                                    const PropagationOptions& options = {});

// Sums (idi' a^k)' # z for k = 0, 1, ... until the tax still sitting on
// intermediate demand falls to tol * sum|idi| or max_stages terms have been
// added. A non-converged result is returned flagged, not thrown.
IncidenceResult PropagateTruncated(const CoefficientSystem& system, double tol,
                                   std::size_t max_stages,
                                   double conservation_tol = 1e-9);

// Dispatches on options.method.
IncidenceResult Propagate(const CoefficientSystem& system,
                          const PropagationOptions& options = {});

// Multiplies every tax-destination entry of activity i by scale[i] and
// recomputes statutory; flows and supply are untouched.
IOAccounts ApplyScenario(const IOAccounts& accounts, const Vector& scale);

std::string_view MethodName(PropagationMethod method);

}  // namespace incidence
