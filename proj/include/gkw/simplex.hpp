#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gkw/errors.hpp"
#include "gkw/grid.hpp"

namespace gkw {

enum class LpStatus { Optimal, Infeasible, Unbounded, Failed };

/// Result of a standard-form solve. For Optimal, `x` is a basic optimal
/// point and `dual` satisfies A^T dual <= c with b^T dual = objective.
/// For Infeasible, `dual` is a Farkas certificate: A^T dual <= 0 and
/// b^T dual = objective > 0.
template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::Failed;
  VectorX<Scalar> x;
  VectorX<Scalar> dual;
  Scalar objective = Scalar(0);
};

namespace detail {

enum class PivotOutcome { Optimal, Unbounded, Failed };

/// Revised simplex with Bland's rule on min cost^T x, M x = b, x >= 0,
/// starting from the feasible basis in `basis`. Small dense instances only;
/// the basis inverse is formed explicitly each iteration.
template <typename Scalar>
PivotOutcome simplex_iterate(const MatrixX<Scalar>& M, const VectorX<Scalar>& b,
                             const VectorX<Scalar>& cost, std::vector<Index>& basis,
                             VectorX<Scalar>& x_basic, MatrixX<Scalar>& basis_inverse,
                             Scalar tol) {
  const Index rows = M.rows();
  const Index cols = M.cols();
  const int max_pivots = 50 * static_cast<int>(rows + cols) + 200;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    MatrixX<Scalar> B(rows, rows);
    for (Index i = 0; i < rows; ++i) B.col(i) = M.col(basis[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<MatrixX<Scalar>> lu(B);
    if (!lu.isInvertible()) return PivotOutcome::Failed;
    basis_inverse = lu.inverse();
    x_basic = basis_inverse * b;

    VectorX<Scalar> cost_basic(rows);
    for (Index i = 0; i < rows; ++i) cost_basic(i) = cost(basis[static_cast<std::size_t>(i)]);
    const VectorX<Scalar> y = basis_inverse.transpose() * cost_basic;

    Index entering = -1;
    for (Index j = 0; j < cols; ++j) {
      bool in_basis = false;
      for (Index i = 0; i < rows; ++i)
        if (basis[static_cast<std::size_t>(i)] == j) {
          in_basis = true;
          break;
        }
      if (in_basis) continue;
      const Scalar reduced = cost(j) - y.dot(M.col(j));
      if (reduced < -tol) {
        entering = j;
        break;  // Bland: smallest eligible index
      }
    }
    if (entering < 0) return PivotOutcome::Optimal;

    const VectorX<Scalar> direction = basis_inverse * M.col(entering);
    Index leaving = -1;
    Scalar best_ratio = Scalar(0);
    for (Index i = 0; i < rows; ++i) {
      if (direction(i) > tol) {
        const Scalar ratio = x_basic(i) / direction(i);
        if (leaving < 0 || ratio < best_ratio - tol ||
            (ratio < best_ratio + tol &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leaving)])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
    }
    if (leaving < 0) return PivotOutcome::Unbounded;
    basis[static_cast<std::size_t>(leaving)] = entering;
  }
  return PivotOutcome::Failed;
}

}  // namespace detail

/// Two-phase dense simplex for min c^T x subject to A x = b, x >= 0.
/// Deterministic (Bland pivoting); intended for small instances such as the
/// cone-membership program (tens of rows and columns).
template <typename Scalar>
LpResult<Scalar> solve_standard_lp(MatrixX<Scalar> A, VectorX<Scalar> b, const VectorX<Scalar>& c,
                                   Scalar tol = Scalar(1e-11)) {
  const Index n_rows = A.rows();
  const Index n_cols = A.cols();
  LpResult<Scalar> result;
  if (c.size() != n_cols || b.size() != n_rows) throw InvalidArgument("LP dimensions disagree");

  // Flip rows so b >= 0; remember signs to restate duals for the caller.
  VectorX<Scalar> row_sign = VectorX<Scalar>::Ones(n_rows);
  for (Index i = 0; i < n_rows; ++i)
    if (b(i) < Scalar(0)) {
      row_sign(i) = Scalar(-1);
      A.row(i) = -A.row(i);
      b(i) = -b(i);
    }

  // Phase 1: artificial identity basis, minimize the artificial mass.
  MatrixX<Scalar> extended(n_rows, n_cols + n_rows);
  extended << A, MatrixX<Scalar>::Identity(n_rows, n_rows);
  VectorX<Scalar> phase1_cost = VectorX<Scalar>::Zero(n_cols + n_rows);
  phase1_cost.tail(n_rows).setOnes();
  std::vector<Index> basis(static_cast<std::size_t>(n_rows));
  for (Index i = 0; i < n_rows; ++i) basis[static_cast<std::size_t>(i)] = n_cols + i;

  VectorX<Scalar> x_basic;
  MatrixX<Scalar> basis_inverse;
  auto outcome = detail::simplex_iterate(extended, b, phase1_cost, basis, x_basic, basis_inverse, tol);
  if (outcome != detail::PivotOutcome::Optimal) {
    result.status = LpStatus::Failed;
    return result;
  }

  Scalar artificial_mass = Scalar(0);
  for (Index i = 0; i < n_rows; ++i)
    if (basis[static_cast<std::size_t>(i)] >= n_cols) artificial_mass += x_basic(i);
  const Scalar feas_tol = tol * (Scalar(1) + b.template lpNorm<Eigen::Infinity>());
  if (artificial_mass > feas_tol) {
    // Farkas certificate from the phase-1 duals.
    VectorX<Scalar> cost_basic(n_rows);
    for (Index i = 0; i < n_rows; ++i)
      cost_basic(i) = phase1_cost(basis[static_cast<std::size_t>(i)]);
    VectorX<Scalar> y = basis_inverse.transpose() * cost_basic;
    result.status = LpStatus::Infeasible;
    result.objective = artificial_mass;
    result.dual = row_sign.asDiagonal() * y;
    return result;
  }

  // Pivot leftover zero-level artificials out of the basis; rows where no
  // original column can enter are redundant and get dropped. Redundant rows
  // keep their artificial column in the basis until the reduced system is
  // assembled, so the inverse refresh below stays well indexed.
  std::vector<bool> redundant(static_cast<std::size_t>(n_rows), false);
  for (Index i = 0; i < n_rows; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n_cols) continue;
    const VectorX<Scalar> row = basis_inverse.row(i) * A;
    Index replacement = -1;
    for (Index j = 0; j < n_cols; ++j) {
      bool in_basis = false;
      for (Index t = 0; t < n_rows; ++t)
        if (basis[static_cast<std::size_t>(t)] == j) {
          in_basis = true;
          break;
        }
      if (!in_basis && std::abs(row(j)) > tol) {
        replacement = j;
        break;
      }
    }
    if (replacement >= 0) {
      basis[static_cast<std::size_t>(i)] = replacement;
      MatrixX<Scalar> B(n_rows, n_rows);
      for (Index t = 0; t < n_rows; ++t)
        B.col(t) = extended.col(basis[static_cast<std::size_t>(t)]);
      Eigen::FullPivLU<MatrixX<Scalar>> lu(B);
      if (!lu.isInvertible()) {
        result.status = LpStatus::Failed;
        return result;
      }
      basis_inverse = lu.inverse();
    } else {
      redundant[static_cast<std::size_t>(i)] = true;
    }
  }

  std::vector<Index> kept_rows;
  for (Index i = 0; i < n_rows; ++i)
    if (!redundant[static_cast<std::size_t>(i)]) kept_rows.push_back(i);

  MatrixX<Scalar> A2(static_cast<Index>(kept_rows.size()), n_cols);
  VectorX<Scalar> b2(static_cast<Index>(kept_rows.size()));
  VectorX<Scalar> sign2(static_cast<Index>(kept_rows.size()));
  std::vector<Index> basis2;
  for (std::size_t t = 0; t < kept_rows.size(); ++t) {
    A2.row(static_cast<Index>(t)) = A.row(kept_rows[t]);
    b2(static_cast<Index>(t)) = b(kept_rows[t]);
    sign2(static_cast<Index>(t)) = row_sign(kept_rows[t]);
    basis2.push_back(basis[static_cast<std::size_t>(kept_rows[t])]);
  }

  // Phase 2 on original columns only.
  outcome = detail::simplex_iterate(A2, b2, c, basis2, x_basic, basis_inverse, tol);
  if (outcome == detail::PivotOutcome::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  if (outcome != detail::PivotOutcome::Optimal) {
    result.status = LpStatus::Failed;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x = VectorX<Scalar>::Zero(n_cols);
  for (Index i = 0; i < A2.rows(); ++i) result.x(basis2[static_cast<std::size_t>(i)]) = x_basic(i);
  result.objective = c.dot(result.x);

  VectorX<Scalar> cost_basic(A2.rows());
  for (Index i = 0; i < A2.rows(); ++i) cost_basic(i) = c(basis2[static_cast<std::size_t>(i)]);
  const VectorX<Scalar> y2 = basis_inverse.transpose() * cost_basic;
  result.dual = VectorX<Scalar>::Zero(n_rows);
  for (std::size_t t = 0; t < kept_rows.size(); ++t)
    result.dual(kept_rows[t]) = sign2(static_cast<Index>(t)) * y2(static_cast<Index>(t));
  return result;
}

}  // namespace gkw
