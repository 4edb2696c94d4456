#pragma once

#include <limits>
#include <vector>

#include "gkw/cone.hpp"
#include "gkw/operators.hpp"

namespace gkw {

/// Pointwise exponents above this are treated as diverging iterates.
inline constexpr double kExponentGuard = 700.0;

/// The full discretized problem: grid, weight system, nonnegative scalar
/// coefficients a_1..a_d, and the n-vector right-hand side w. The active set
/// and W = integral of w are computed on construction, as is the d x V
/// coefficient matrix used by the nodewise exponential sums.
template <typename Scalar>
struct ProblemInstance {
  PeriodicGrid<Scalar> grid;
  WeightSystem<Scalar> ws;
  std::vector<Field<Scalar>> a;
  Field<Scalar> w;
  ActiveSet<Scalar> active;
  VectorX<Scalar> W;
  MatrixX<Scalar> coefficients;  // a stacked row-per-weight; cached

  Index ambient_dim() const { return ws.ambient_dim(); }
  Index weight_count() const { return ws.count(); }
};

template <typename Scalar>
ProblemInstance<Scalar> make_problem(PeriodicGrid<Scalar> grid, WeightSystem<Scalar> ws,
                                     std::vector<Field<Scalar>> a, Field<Scalar> w,
                                     Scalar tau_active = Scalar(0)) {
  if (static_cast<Index>(a.size()) != ws.count())
    throw InvalidArgument("coefficient count must match the weight count");
  if (w.components() != ws.ambient_dim())
    throw InvalidArgument("right-hand side must have one component per ambient dimension");
  if (w.grid() != grid) throw InvalidArgument("right-hand side lives on a different grid");
  if (!w.all_finite()) throw NonFiniteField("right-hand side has non-finite entries");
  for (const auto& field : a)
    if (field.grid() != grid) throw InvalidArgument("coefficient lives on a different grid");

  ProblemInstance<Scalar> inst{std::move(grid), std::move(ws), std::move(a), std::move(w),
                               {},          {},            {}};
  inst.active = active_set(inst.a, tau_active);  // also rejects negative coefficients
  inst.W = integrate(inst.w);
  inst.coefficients.resize(inst.ws.count(), inst.grid.node_count());
  for (Index j = 0; j < inst.ws.count(); ++j)
    inst.coefficients.row(j) = inst.a[static_cast<std::size_t>(j)].values().row(0).matrix();
  return inst;
}

namespace detail {

/// Pointwise pairings <u_j, xi_p> for all weights at once (d x V).
template <typename Scalar>
MatrixX<Scalar> weight_pairings(const ProblemInstance<Scalar>& inst, const Field<Scalar>& xi) {
  if (xi.components() != inst.ambient_dim() || xi.grid() != inst.grid)
    throw InvalidArgument("state field does not fit the problem instance");
  return inst.ws.u.transpose() * xi.values().matrix();
}

/// exp(<u_j, xi>) masked by the coefficients: entries where a_j vanishes are
/// zero, so inactive weights can never overflow. Returns false on overflow.
template <typename Scalar>
bool exponential_weights(const ProblemInstance<Scalar>& inst, const MatrixX<Scalar>& pairings,
                         MatrixX<Scalar>& out) {
  const auto mask = (inst.coefficients.array() != Scalar(0));
  if ((mask && pairings.array() > Scalar(kExponentGuard)).any()) return false;
  out = mask.select(inst.coefficients.array() * pairings.array().exp(), Scalar(0)).matrix();
  return true;
}

}  // namespace detail

/// Residual of the discrete equation:
///   R(xi) = laplacian(xi) + sum_j a_j exp(<u_j, xi>) u_j - w.
/// xi solves the equation iff the sup norm of the residual is at tolerance.
template <typename Scalar>
Field<Scalar> residual(const ProblemInstance<Scalar>& inst, const Field<Scalar>& xi) {
  const MatrixX<Scalar> pairings = detail::weight_pairings(inst, xi);
  MatrixX<Scalar> weights;
  if (!detail::exponential_weights(inst, pairings, weights))
    throw ExponentOverflow("residual: a pointwise exponent exceeds the guard");
  Field<Scalar> out = laplacian(xi);
  out.values().matrix() += inst.ws.u * weights;
  out.values() -= inst.w.values();
  return out;
}

/// Convex energy whose first variation is the residual:
///   E(xi) = dirichlet_energy(xi) + sum_j int a_j exp(<u_j, xi>) - int <w, xi>.
/// Returns +infinity when an active exponent overflows.
template <typename Scalar>
Scalar energy(const ProblemInstance<Scalar>& inst, const Field<Scalar>& xi) {
  const MatrixX<Scalar> pairings = detail::weight_pairings(inst, xi);
  MatrixX<Scalar> weights;
  if (!detail::exponential_weights(inst, pairings, weights))
    return std::numeric_limits<Scalar>::infinity();
  return dirichlet_energy(xi) + weights.sum() * inst.grid.cell_volume() -
         weighted_inner(inst.w, xi);
}

/// Action of the linearization at xi:
///   H(xi) eta = laplacian(eta) + sum_j a_j exp(<u_j, xi>) <u_j, eta> u_j.
template <typename Scalar>
Field<Scalar> hessian_apply(const ProblemInstance<Scalar>& inst, const Field<Scalar>& xi,
                            const Field<Scalar>& eta) {
  const MatrixX<Scalar> pairings = detail::weight_pairings(inst, xi);
  MatrixX<Scalar> weights;
  if (!detail::exponential_weights(inst, pairings, weights))
    throw ExponentOverflow("hessian_apply: a pointwise exponent exceeds the guard");
  const MatrixX<Scalar> eta_pairings = detail::weight_pairings(inst, eta);
  Field<Scalar> out = laplacian(eta);
  out.values().matrix() += inst.ws.u * weights.cwiseProduct(eta_pairings);
  return out;
}

/// Cached exponential mass for repeated Hessian actions at a fixed state.
template <typename Scalar>
class HessianOperator {
 public:
  HessianOperator(const ProblemInstance<Scalar>& inst, const Field<Scalar>& xi) : inst_(inst) {
    const MatrixX<Scalar> pairings = detail::weight_pairings(inst, xi);
    if (!detail::exponential_weights(inst, pairings, weights_))
      throw ExponentOverflow("hessian: a pointwise exponent exceeds the guard");
  }

  Field<Scalar> apply(const Field<Scalar>& eta) const {
    const MatrixX<Scalar> eta_pairings = detail::weight_pairings(inst_, eta);
    Field<Scalar> out = laplacian(eta);
    out.values().matrix() += inst_.ws.u * weights_.cwiseProduct(eta_pairings);
    return out;
  }

  /// Mean diagonal mass of the exponential term; a reasonable identity shift
  /// for the Fourier preconditioner.
  Scalar mean_mass() const {
    Scalar total = Scalar(0);
    for (Index j = 0; j < inst_.ws.count(); ++j)
      total += weights_.row(j).sum() * inst_.ws.u.col(j).squaredNorm();
    return total / (Scalar(inst_.grid.node_count()) * Scalar(inst_.ambient_dim()));
  }

 private:
  const ProblemInstance<Scalar>& inst_;
  MatrixX<Scalar> weights_;
};

/// Assumption report: nonnegativity, near-degeneracy fractions, the active
/// set, W, and the cone certificate for W.
template <typename Scalar>
struct ValidationReport {
  std::vector<bool> nonnegative;       // per coefficient
  VectorX<Scalar> degeneracy_fraction; // share of nodes at or below tau_active
  ActiveSet<Scalar> active;
  VectorX<Scalar> W;
  ConeCertificate<Scalar> certificate;
};

template <typename Scalar>
ValidationReport<Scalar> validate(const ProblemInstance<Scalar>& inst, Scalar tau_cone = Scalar(-1)) {
  ValidationReport<Scalar> report;
  const Index d = inst.weight_count();
  report.nonnegative.assign(static_cast<std::size_t>(d), true);
  report.degeneracy_fraction.resize(d);
  for (Index j = 0; j < d; ++j) {
    const auto& values = inst.a[static_cast<std::size_t>(j)].values();
    if ((values < Scalar(0)).any()) {
      report.nonnegative[static_cast<std::size_t>(j)] = false;
      throw NegativeCoefficient("coefficient a[" + std::to_string(j + 1) + "] has negative entries");
    }
    const Index low = (values <= inst.active.tau_active).count();
    report.degeneracy_fraction(j) = Scalar(low) / Scalar(inst.grid.node_count());
  }
  report.active = inst.active;
  report.W = inst.W;
  report.certificate = cone_membership(inst.W, inst.ws, inst.active, tau_cone);
  return report;
}

/// Scalar Kazdan-Warner preset: laplacian(f) + h e^f = c as a 1-component
/// instance with the single weight u = 1, coefficient h, right-hand side c.
template <typename Scalar>
ProblemInstance<Scalar> kazdan_warner_instance(const PeriodicGrid<Scalar>& grid,
                                               const Field<Scalar>& h, const Field<Scalar>& c) {
  MatrixX<Scalar> u(1, 1);
  u << Scalar(1);
  std::vector<Field<Scalar>> a{h};
  return make_problem(grid, make_weight_system(std::move(u), {"u"}), std::move(a), c);
}

}  // namespace gkw
