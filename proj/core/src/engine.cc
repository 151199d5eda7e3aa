#include "incidence/engine.h"

#include <cmath>

#include <Eigen/LU>
#include <fmt/format.h>

namespace incidence {
namespace {

void Finalize(IncidenceResult& result, const CoefficientSystem& system,
              double conservation_tol) {
  result.activities = system.activities;
  result.fsf = system.fsf;
  result.final_incidence = system.fsf + result.ies;
  result.warnings = system.warnings;

  IncidenceTotals& t = result.totals;
  for (std::size_t c = 0; c < kNumComponents; ++c) {
    t.per_component[c] =
        result.final_incidence.col(static_cast<Eigen::Index>(c)).sum();
  }
  t.grand_total = result.final_incidence.sum();
  t.first_stage_total = system.idi.sum() + system.fsf.sum();
  t.statutory_total = system.statutory.sum();
  t.conservation_residual = t.grand_total - t.first_stage_total;
  const double scale =
      system.idi.cwiseAbs().sum() + system.fsf.cwiseAbs().sum();
  t.relative_residual =
      scale > 0.0 ? std::abs(t.conservation_residual) / scale : 0.0;
  t.conserved = std::abs(t.conservation_residual) <= conservation_tol * scale;
  result.method.conservation_tol = conservation_tol;
  if (!t.conserved) {
    result.warnings.push_back(fmt::format(
        "conservation residual {} exceeds {} relative to first-stage mass {}",
        t.conservation_residual, conservation_tol, scale));
  }
}

// Activities whose output never reaches final demand directly. When I - A is
// singular, tax is trapped in a closed loop among some of these.
std::string AbsorbingActivities(const CoefficientSystem& system) {
  std::string names;
  for (Eigen::Index i = 0; i < system.z.rows(); ++i) {
    if (std::abs(system.z.row(i).sum()) <= 1e-12 &&
        system.a.row(i).cwiseAbs().sum() > 0.0) {
      if (!names.empty()) names += ", ";
      names += system.activities[static_cast<std::size_t>(i)].code;
    }
  }
  return names.empty() ? "none found" : names;
}

}  // namespace

std::string_view MethodName(PropagationMethod method) {
  return method == PropagationMethod::kClosedForm ? "closed-form"
                                                  : "truncated";
}

CoefficientSystem BuildSystem(const IOAccounts& accounts,
                              const BuildOptions& options) {
  CheckShapes(accounts);
  if (accounts.HasMarginShares() && !options.allow_unredistributed_margins) {
    throw EngineError(
        "accounts still carry margin shares; redistribute margins first or "
        "opt out explicitly");
  }
  const auto n = static_cast<Eigen::Index>(accounts.size());
  CoefficientSystem sys;
  sys.activities = accounts.activities;
  sys.a = Matrix::Zero(n, n);
  sys.z = Matrix::Zero(n, static_cast<Eigen::Index>(kNumComponents));
  sys.idi = accounts.taxdest.intermediate().rowwise().sum();
  sys.fsf = accounts.taxdest.final_demand();
  sys.statutory = accounts.taxdest.statutory;

  std::vector<bool> zero_row(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    // The row total equals supply(i) within the ingestion tolerance; using it
    // makes every row of [a | z] sum to one exactly.
    const double total =
        accounts.flows.row(i).sum() + accounts.finaldemand.row(i).sum();
    if (accounts.supply(i) == 0.0 || total == 0.0) {
      zero_row[static_cast<std::size_t>(i)] = true;
      continue;
    }
    sys.a.row(i) = accounts.flows.row(i) / total;
    sys.z.row(i) = accounts.finaldemand.row(i) / total;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!zero_row[static_cast<std::size_t>(i)]) continue;
    const auto& code = accounts.activities[static_cast<std::size_t>(i)].code;
    if (sys.idi(i) != 0.0) {
      sys.warnings.push_back(fmt::format(
          "activity '{}' has zero supply but intermediate tax {}; it cannot "
          "be routed to final demand",
          code, sys.idi(i)));
    }
    if (sys.a.col(i).cwiseAbs().sum() > 0.0) {
      sys.warnings.push_back(fmt::format(
          "activity '{}' has zero supply but buys intermediates; tax passed "
          "to it cannot reach final demand",
          code));
    }
  }
  return sys;
}

IncidenceResult PropagateClosedForm(const CoefficientSystem& system,
                                    const PropagationOptions& options) {
  const auto n = static_cast<Eigen::Index>(system.size());
  IncidenceResult result;
  result.method.method = PropagationMethod::kClosedForm;

  const Matrix leontief_t = (Matrix::Identity(n, n) - system.a).transpose();
  const Eigen::PartialPivLU<Matrix> lu(leontief_t);
  const double rcond = n == 0 ? 1.0 : lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  result.method.condition_estimate = cond;
  Vector v = n == 0 ? Vector{} : Vector{lu.solve(system.idi)};
  if (!std::isfinite(cond) || cond > options.condition_limit ||
      !v.allFinite()) {
    throw EngineError(fmt::format(
        "I - A is singular or near-singular (condition estimate {:g}, limit "
        "{:g}); tax may be trapped in a closed intermediate loop. Activities "
        "with no final-demand outlet: {}. Use the truncated method to "
        "inspect the residual.",
        cond, options.condition_limit, AbsorbingActivities(system)));
  }
  result.ies = v.asDiagonal() * system.z;
  Finalize(result, system, options.conservation_tol);
  return result;
}

IncidenceResult PropagateTruncated(const CoefficientSystem& system, double tol,
                                   std::size_t max_stages,
                                   double conservation_tol) {
  if (!(tol > 0.0)) throw EngineError("truncation tolerance must be positive");
  if (max_stages < 1) throw EngineError("max_stages must be at least 1");

  IncidenceResult result;
  MethodInfo& info = result.method;
  info.method = PropagationMethod::kTruncated;
  info.tol = tol;
  info.converged = false;

  const Matrix a_t = system.a.transpose();
  const double threshold = tol * system.idi.cwiseAbs().sum();
  result.ies = Matrix::Zero(system.z.rows(), system.z.cols());
  Vector stage = system.idi;  // idi' a^k, as a column
  for (std::size_t k = 0; k < max_stages; ++k) {
    result.ies += stage.asDiagonal() * system.z;
    stage = a_t * stage;
    info.stages = k + 1;
    if (stage.cwiseAbs().sum() <= threshold) {
      info.converged = true;
      break;
    }
  }
  info.residual_mass = stage.sum();
  Finalize(result, system, conservation_tol);
  if (!info.converged) {
    result.warnings.push_back(fmt::format(
        "truncated series did not converge in {} stages; residual mass {} "
        "still on intermediate demand",
        info.stages, info.residual_mass));
  }
  return result;
}

IncidenceResult Propagate(const CoefficientSystem& system,
                          const PropagationOptions& options) {
  if (options.method == PropagationMethod::kClosedForm) {
    return PropagateClosedForm(system, options);
  }
  return PropagateTruncated(system, options.tol, options.max_stages,
                            options.conservation_tol);
}

IOAccounts ApplyScenario(const IOAccounts& accounts, const Vector& scale) {
  CheckShapes(accounts);
  if (scale.size() != static_cast<Eigen::Index>(accounts.size())) {
    throw EngineError(fmt::format("scenario has {} factors for {} activities",
                                  scale.size(), accounts.size()));
  }
  IOAccounts out = accounts;
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (!(scale(i) >= 0.0) || !std::isfinite(scale(i))) {
      throw EngineError(fmt::format(
          "scale factor {} for '{}' must be finite and nonnegative", scale(i),
          accounts.activities[static_cast<std::size_t>(i)].code));
    }
    out.taxdest.dest.row(i) *= scale(i);
    out.taxdest.statutory(i) *= scale(i);
  }
  return out;
}

}  // namespace incidence
