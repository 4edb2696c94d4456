#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "gkw/functional.hpp"
#include "gkw/poisson.hpp"

namespace gkw {

template <typename Scalar>
struct SolveOptions {
  /// Residual sup-norm stopping threshold; unset means 1e-10 * (1 + max|w|).
  std::optional<Scalar> tol_residual;
  int max_newton = 100;
  /// Inexact-Newton forcing: CG stops at min(cg_forcing_cap, sqrt(|R|)) * |R|.
  Scalar cg_forcing_cap = Scalar(0.5);
  int cg_max_iters = 400;
  Scalar armijo_c1 = Scalar(1e-4);
  Scalar backtrack_factor = Scalar(0.5);
  int max_backtracks = 40;
  /// Iterate sup-norm that triggers the non-existence diagnosis.
  Scalar divergence_norm = Scalar(1e3);
  /// Audit mode keeps minimizing on Outside certificates to exhibit the
  /// unbounded descent; it must also shed at least this much energy.
  bool audit = false;
  Scalar audit_energy_drop = Scalar(1e3);
  /// Margins within this multiple of tau_cone refuse strict solves.
  Scalar near_boundary_factor = Scalar(10);
  Scalar tau_cone = Scalar(-1);  // negative: default rule
  /// Consumed by callers that build random initial states.
  unsigned long long seed = 0;
};

enum class SolveStatus { Solution, NoSolutionCertified, MaxIterations, Diverged };

template <typename Scalar>
struct IterationRecord {
  int iteration = 0;
  Scalar energy = Scalar(0);
  Scalar residual_inf = Scalar(0);
  Scalar step_length = Scalar(0);
  int cg_iters = 0;
};

template <typename Scalar>
struct SolveOutcome {
  SolveStatus status = SolveStatus::Diverged;
  Field<Scalar> xi;
  std::vector<IterationRecord<Scalar>> diagnostics;
  ConeCertificate<Scalar> certificate;
  Scalar residual_inf = std::numeric_limits<Scalar>::infinity();
  Scalar energy_value = std::numeric_limits<Scalar>::infinity();
  Scalar tolerance = Scalar(0);

  bool solved() const { return status == SolveStatus::Solution; }
};

namespace detail {

/// Removes the volume-average component along each kernel direction; these
/// constant shifts are exactly the gauge freedom of the problem.
template <typename Scalar>
void remove_kernel_constants(Field<Scalar>& f, const MatrixX<Scalar>& basis) {
  if (basis.cols() == 0) return;
  const VectorX<Scalar> mean = f.values().rowwise().mean();
  const VectorX<Scalar> shift = basis * (basis.transpose() * mean);
  f.values().colwise() -= shift.array();
}

/// Preconditioned CG on the Hessian action restricted to the orthogonal
/// complement of the kernel constants. Truncation (iteration cap or a
/// semidefinite breakdown) still returns a descent direction.
template <typename Scalar>
std::pair<Field<Scalar>, int> newton_direction(const ProblemInstance<Scalar>& inst,
                                               const HessianOperator<Scalar>& hess,
                                               const Field<Scalar>& minus_residual,
                                               const MatrixX<Scalar>& kernel,
                                               Scalar forcing_cap, int max_iters) {
  const Scalar shift = std::max(hess.mean_mass(), Scalar(1e-8));
  auto precondition = [&](const Field<Scalar>& r) {
    Field<Scalar> z = r;
    remove_kernel_constants(z, kernel);
    z = shifted_poisson_solve(z, shift);
    remove_kernel_constants(z, kernel);
    return z;
  };

  Field<Scalar> b = minus_residual;
  remove_kernel_constants(b, kernel);
  const Scalar b_norm = weighted_norm(b);
  if (b_norm == Scalar(0)) return {Field<Scalar>(inst.grid, inst.ambient_dim()), 0};
  const Scalar target = std::min(forcing_cap, std::sqrt(b_norm)) * b_norm;

  Field<Scalar> x(inst.grid, inst.ambient_dim());
  Field<Scalar> r = b;
  Field<Scalar> z = precondition(r);
  Field<Scalar> p = z;
  Scalar rho = weighted_inner(r, z);
  int iters = 0;
  for (; iters < max_iters; ++iters) {
    Field<Scalar> hp = hess.apply(p);
    remove_kernel_constants(hp, kernel);
    const Scalar curvature = weighted_inner(p, hp);
    if (!(curvature > Scalar(1e-300))) {
      if (iters == 0) x = z;  // fall back to the preconditioned gradient
      break;
    }
    const Scalar alpha = rho / curvature;
    x += alpha * p;
    r -= alpha * hp;
    if (weighted_norm(r) <= target) {
      ++iters;
      break;
    }
    z = precondition(r);
    const Scalar rho_next = weighted_inner(r, z);
    p = z + (rho_next / rho) * p;
    rho = rho_next;
  }
  return {x, iters};
}

}  // namespace detail

/// Normal form: subtracts the kernel component of the volume average, so the
/// returned field has zero mean along every gauge direction. The residual is
/// unchanged.
template <typename Scalar>
Field<Scalar> normalize(const Field<Scalar>& xi, const WeightSystem<Scalar>& ws,
                        const ActiveSet<Scalar>& active) {
  if (!xi.all_finite()) throw NonFiniteField("normalize: input has non-finite entries");
  Field<Scalar> out = xi;
  detail::remove_kernel_constants(out, kernel_basis(ws, active));
  return out;
}

/// Damped Newton on the convex energy. Existence is decided by the cone
/// certificate before any iteration: Outside data returns
/// NoSolutionCertified immediately in strict mode, or after the descent has
/// demonstrably diverged in audit mode. Margins too close to the boundary
/// refuse strict mode (NearBoundaryRefusal).
template <typename Scalar>
SolveOutcome<Scalar> solve(const ProblemInstance<Scalar>& inst, const SolveOptions<Scalar>& opts = {},
                           std::optional<Field<Scalar>> initial = std::nullopt) {
  SolveOutcome<Scalar> outcome;
  outcome.certificate = cone_membership(inst.W, inst.ws, inst.active, opts.tau_cone);
  outcome.tolerance = opts.tol_residual.value_or(Scalar(1e-10) * (Scalar(1) + linf_norm(inst.w)));

  if (std::abs(outcome.certificate.margin) <=
          opts.near_boundary_factor * outcome.certificate.tau_cone &&
      !opts.audit)
    throw NearBoundaryRefusal(
        "certificate margin is within the near-boundary band; rerun in audit mode");

  if (!outcome.certificate.inside() && !opts.audit) {
    outcome.status = SolveStatus::NoSolutionCertified;
    return outcome;
  }

  const MatrixX<Scalar> kernel = kernel_basis(inst.ws, inst.active);
  Field<Scalar> xi = initial.value_or(Field<Scalar>(inst.grid, inst.ambient_dim()));
  if (xi.grid() != inst.grid || xi.components() != inst.ambient_dim())
    throw InvalidArgument("initial state does not fit the instance");

  const bool auditing = !outcome.certificate.inside();
  const int iteration_cap = auditing ? 10 * opts.max_newton : opts.max_newton;

  Scalar e = energy(inst, xi);
  const Scalar e_start = e;
  Field<Scalar> r;
  try {
    r = residual(inst, xi);
  } catch (const ExponentOverflow&) {
    outcome.status = SolveStatus::Diverged;
    return outcome;
  }
  Scalar r_inf = linf_norm(r);
  outcome.diagnostics.push_back({0, e, r_inf, Scalar(0), 0});

  for (int iter = 1; iter <= iteration_cap; ++iter) {
    if (!auditing && r_inf <= outcome.tolerance) break;
    if (auditing && linf_norm(xi) > opts.divergence_norm &&
        e_start - e > opts.audit_energy_drop)
      break;
    if (!auditing && linf_norm(xi) > opts.divergence_norm) {
      outcome.status = SolveStatus::Diverged;
      outcome.xi = xi;
      outcome.residual_inf = r_inf;
      outcome.energy_value = e;
      return outcome;
    }

    HessianOperator<Scalar> hess(inst, xi);
    auto [delta, cg_iters] =
        detail::newton_direction(inst, hess, Scalar(-1) * r, kernel, opts.cg_forcing_cap,
                                 opts.cg_max_iters);
    Scalar slope = weighted_inner(r, delta);
    if (!(slope < Scalar(0))) {
      // The truncated direction lost descent; fall back to the plain
      // preconditioned gradient.
      delta = Scalar(-1) * r;
      detail::remove_kernel_constants(delta, kernel);
      slope = weighted_inner(r, delta);
      if (!(slope < Scalar(0))) break;
    }

    Scalar step = Scalar(1);
    Scalar e_next = std::numeric_limits<Scalar>::infinity();
    Field<Scalar> xi_next;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      xi_next = xi + step * delta;
      e_next = energy(inst, xi_next);
      if (e_next <= e + opts.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.backtrack_factor;
    }
    if (!accepted) break;

    xi = std::move(xi_next);
    e = e_next;
    try {
      r = residual(inst, xi);
    } catch (const ExponentOverflow&) {
      outcome.status = SolveStatus::Diverged;
      outcome.xi = xi;
      outcome.energy_value = e;
      return outcome;
    }
    r_inf = linf_norm(r);
    outcome.diagnostics.push_back({iter, e, r_inf, step, cg_iters});
  }

  outcome.energy_value = e;
  if (auditing) {
    const bool diverged =
        linf_norm(xi) > opts.divergence_norm && e_start - e > opts.audit_energy_drop;
    outcome.status = diverged ? SolveStatus::NoSolutionCertified : SolveStatus::MaxIterations;
    outcome.xi = xi;
    outcome.residual_inf = r_inf;
    return outcome;
  }

  if (r_inf <= outcome.tolerance) {
    outcome.status = SolveStatus::Solution;
    outcome.xi = normalize(xi, inst.ws, inst.active);
    outcome.residual_inf = linf_norm(residual(inst, outcome.xi));
    return outcome;
  }
  outcome.status = SolveStatus::MaxIterations;
  outcome.xi = xi;
  outcome.residual_inf = r_inf;
  return outcome;
}

/// Post-solve checks: residual norm, the integrated-weight identity
/// sum_j c_j u_j = W with c_j = int a_j exp(<u_j, xi>), positivity of the
/// active c_j, and the kernel component of xi (zero in normal form).
template <typename Scalar>
struct VerificationReport {
  Scalar residual_inf = Scalar(0);
  VectorX<Scalar> integrated_weights;  // c_j, one per weight
  Scalar identity_defect = Scalar(0);
  bool active_weights_positive = false;
  Scalar kernel_component_inf = Scalar(0);
  VectorX<Scalar> W;
};

template <typename Scalar>
VerificationReport<Scalar> verify_solution(const ProblemInstance<Scalar>& inst,
                                           const Field<Scalar>& xi) {
  if (!xi.all_finite()) throw NonFiniteField("verify_solution: input has non-finite entries");
  VerificationReport<Scalar> report;
  report.W = inst.W;
  report.residual_inf = linf_norm(residual(inst, xi));

  const MatrixX<Scalar> pairings = detail::weight_pairings(inst, xi);
  MatrixX<Scalar> weights;
  if (!detail::exponential_weights(inst, pairings, weights))
    throw ExponentOverflow("verify_solution: a pointwise exponent exceeds the guard");
  report.integrated_weights = weights.rowwise().sum() * inst.grid.cell_volume();
  report.identity_defect =
      (inst.ws.u * report.integrated_weights - inst.W).template lpNorm<Eigen::Infinity>();

  report.active_weights_positive = true;
  for (Index j : inst.active.indices)
    if (!(report.integrated_weights(j) > Scalar(0))) report.active_weights_positive = false;

  const MatrixX<Scalar> kernel = kernel_basis(inst.ws, inst.active);
  if (kernel.cols() > 0) {
    const VectorX<Scalar> mean = xi.values().rowwise().mean();
    report.kernel_component_inf =
        (kernel.transpose() * mean).template lpNorm<Eigen::Infinity>();
  }
  return report;
}

}  // namespace gkw
