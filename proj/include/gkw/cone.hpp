#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gkw/operators.hpp"
#include "gkw/simplex.hpp"

namespace gkw {

/// The weight family coupling the exponential nonlinearities: d column
/// vectors in R^n. Duplicates are permitted.
template <typename Scalar>
struct WeightSystem {
  MatrixX<Scalar> u;  // n x d, column j holds the j-th weight
  std::vector<std::string> labels;

  Index ambient_dim() const { return u.rows(); }
  Index count() const { return u.cols(); }
  VectorX<Scalar> weight(Index j) const { return u.col(j); }
};

template <typename Scalar>
WeightSystem<Scalar> make_weight_system(MatrixX<Scalar> u, std::vector<std::string> labels = {}) {
  if (u.rows() < 1) throw InvalidArgument("weight system needs ambient dimension >= 1");
  if (!u.allFinite()) throw InvalidArgument("weight vectors must be finite");
  if (!labels.empty() && static_cast<Index>(labels.size()) != u.cols())
    throw InvalidArgument("label count must match the weight count");
  return WeightSystem<Scalar>{std::move(u), std::move(labels)};
}

/// Indices whose coefficient field is not identically zero, with the grid
/// maximum of each coefficient as evidence.
template <typename Scalar>
struct ActiveSet {
  std::vector<Index> indices;  // sorted, 0-based
  VectorX<Scalar> evidence;    // grid maximum per coefficient
  Scalar tau_active = Scalar(0);

  bool contains(Index j) const {
    for (Index i : indices)
      if (i == j) return true;
    return false;
  }
};

/// Thresholds the grid maximum of each (nonnegative) coefficient field.
template <typename Scalar>
ActiveSet<Scalar> active_set(const std::vector<Field<Scalar>>& coefficients,
                             Scalar tau_active = Scalar(0)) {
  ActiveSet<Scalar> out;
  out.tau_active = tau_active;
  out.evidence.resize(static_cast<Index>(coefficients.size()));
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    const auto& a = coefficients[j];
    if (a.components() != 1) throw InvalidArgument("coefficient fields are scalar");
    if (!a.all_finite()) throw NonFiniteField("active_set: coefficient has non-finite entries");
    if ((a.values() < Scalar(0)).any())
      throw NegativeCoefficient("coefficient a[" + std::to_string(j + 1) + "] has negative entries");
    const Scalar top = a.values().maxCoeff();
    out.evidence(static_cast<Index>(j)) = top;
    if (top > tau_active) out.indices.push_back(static_cast<Index>(j));
  }
  return out;
}

enum class ConeVerdict { Inside, Outside };

/// Feasibility certificate for membership of W in the open cone spanned by
/// the active weights. Inside carries a positive witness over the active
/// indices; Outside carries a separating functional. `margin` is the optimum
/// of max t s.t. sum c_j u_j = W, c_j >= t, t <= 1 when that program is
/// feasible, and -(out-of-span distance) when it is not.
template <typename Scalar>
struct ConeCertificate {
  ConeVerdict verdict = ConeVerdict::Outside;
  std::vector<Index> active;
  VectorX<Scalar> witness;    // Inside: one coefficient per active index
  VectorX<Scalar> separator;  // Outside: lambda with <lambda,u_j> <= tau, <lambda,W> > tau
  Scalar margin = Scalar(0);
  Scalar tau_cone = Scalar(0);

  bool inside() const { return verdict == ConeVerdict::Inside; }
};

template <typename Scalar>
Scalar default_tau_cone(const VectorX<Scalar>& W) {
  return Scalar(1e-9) * (Scalar(1) + W.template lpNorm<Eigen::Infinity>());
}

/// Decides W in sum_{j active} R_{>0} u_j via the LP
///   max t  s.t.  sum c_j u_j = W,  c_j >= t,  t <= 1,
/// certifying Inside by the witness c and Outside by a separating functional
/// from LP duality. Boundary data (margin <= tau_cone) is Outside.
template <typename Scalar>
ConeCertificate<Scalar> cone_membership(const VectorX<Scalar>& W, const WeightSystem<Scalar>& ws,
                                        const ActiveSet<Scalar>& active,
                                        Scalar tau_cone = Scalar(-1)) {
  const Index n = ws.ambient_dim();
  if (W.size() != n) throw InvalidArgument("W must live in the weight system's ambient space");
  ConeCertificate<Scalar> cert;
  cert.active = active.indices;
  cert.tau_cone = tau_cone >= Scalar(0) ? tau_cone : default_tau_cone(W);

  const Index k = static_cast<Index>(active.indices.size());
  if (k == 0) {
    // Empty sum of cones is {0}.
    if (W.template lpNorm<Eigen::Infinity>() <= cert.tau_cone) {
      cert.verdict = ConeVerdict::Inside;
      cert.witness.resize(0);
      cert.margin = Scalar(1);
    } else {
      cert.verdict = ConeVerdict::Outside;
      cert.separator = W / W.norm();
      cert.margin = -W.template lpNorm<Eigen::Infinity>();
    }
    return cert;
  }

  MatrixX<Scalar> u_active(n, k);
  for (Index t = 0; t < k; ++t) u_active.col(t) = ws.u.col(active.indices[static_cast<std::size_t>(t)]);
  const VectorX<Scalar> sigma = u_active.rowwise().sum();

  // Substituting c_j = t + s_j, t = 1 - tau turns the program into
  //   min tau  s.t.  [U, -sigma] (s, tau) = W - sigma,  s, tau >= 0.
  MatrixX<Scalar> A(n, k + 1);
  A.leftCols(k) = u_active;
  A.col(k) = -sigma;
  const VectorX<Scalar> b = W - sigma;
  VectorX<Scalar> cost = VectorX<Scalar>::Zero(k + 1);
  cost(k) = Scalar(1);

  const LpResult<Scalar> lp = solve_standard_lp<Scalar>(A, b, cost);

  if (lp.status == LpStatus::Infeasible) {
    // W is not even in the linear span of the active weights.
    Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(u_active);
    const VectorX<Scalar> residual = W - u_active * cod.solve(W);
    cert.verdict = ConeVerdict::Outside;
    cert.margin = -residual.template lpNorm<Eigen::Infinity>();
    VectorX<Scalar> lambda = lp.dual;
    const Scalar against = lambda.dot(W);
    if (against > Scalar(0))
      lambda *= (Scalar(1) + Scalar(2) * cert.tau_cone) / against;
    else if (lambda.norm() > Scalar(0))
      lambda /= lambda.norm();
    cert.separator = lambda;
    return cert;
  }
  if (lp.status != LpStatus::Optimal)
    throw LPNumericalFailure("cone membership LP did not terminate cleanly");

  const Scalar t_star = Scalar(1) - lp.objective;
  cert.margin = t_star;
  if (t_star > cert.tau_cone) {
    cert.verdict = ConeVerdict::Inside;
    cert.witness = lp.x.head(k).array() + t_star;
    const Scalar defect =
        (u_active * cert.witness - W).template lpNorm<Eigen::Infinity>();
    if (defect > Scalar(1e-7) * (Scalar(1) + W.template lpNorm<Eigen::Infinity>()))
      throw LPNumericalFailure("cone witness fails to reproduce W (defect " +
                               std::to_string(static_cast<double>(defect)) + ")");
    return cert;
  }

  cert.verdict = ConeVerdict::Outside;
  VectorX<Scalar> lambda = lp.dual;
  const Scalar against = lambda.dot(W);
  if (against > Scalar(0))
    lambda *= (Scalar(1) + Scalar(2) * cert.tau_cone) / against;
  else if (lambda.norm() > Scalar(0))
    lambda /= lambda.norm();
  cert.separator = lambda;
  return cert;
}

/// Orthonormal basis of the orthogonal complement of the active weight span,
/// from an SVD with relative singular-value threshold tau_rank. The columns
/// are the gauge directions of the problem.
template <typename Scalar>
MatrixX<Scalar> kernel_basis(const WeightSystem<Scalar>& ws, const ActiveSet<Scalar>& active,
                             Scalar tau_rank = Scalar(1e-12)) {
  const Index n = ws.ambient_dim();
  const Index k = static_cast<Index>(active.indices.size());
  if (k == 0) return MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> u_active(n, k);
  for (Index t = 0; t < k; ++t) u_active.col(t) = ws.u.col(active.indices[static_cast<std::size_t>(t)]);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(u_active, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  const Scalar cutoff = sv.size() > 0 ? tau_rank * sv(0) : Scalar(0);
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixU().rightCols(n - rank);
}

}  // namespace gkw
