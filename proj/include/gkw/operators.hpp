#pragma once

#include <array>
#include <cmath>

#include "gkw/grid.hpp"
#include "gkw/parallel.hpp"

namespace gkw {

namespace detail {

template <typename Scalar>
void require_finite(const Field<Scalar>& f, const char* op) {
  if (!f.all_finite()) throw NonFiniteField(std::string(op) + ": input field has non-finite entries");
}

/// Flat ids of the +1/-1 periodic neighbors along `axis`, given the node's
/// per-axis indices. Cheaper than unravel in stencil loops.
template <typename Scalar>
inline std::pair<Index, Index> axis_neighbors(const PeriodicGrid<Scalar>& grid, Index node,
                                              const std::array<Index, kMaxDim>& idx, int axis) {
  const Index n = grid.extent(axis);
  const Index s = grid.stride(axis);
  const Index j = idx[static_cast<std::size_t>(axis)];
  const Index plus = (j + 1 == n) ? node - (n - 1) * s : node + s;
  const Index minus = (j == 0) ? node + (n - 1) * s : node - s;
  return {plus, minus};
}

template <typename Scalar>
inline Index axis_neighbor_plus(const PeriodicGrid<Scalar>& grid, Index node,
                                const std::array<Index, kMaxDim>& idx, int axis) {
  const Index n = grid.extent(axis);
  const Index s = grid.stride(axis);
  const Index j = idx[static_cast<std::size_t>(axis)];
  return (j + 1 == n) ? node - (n - 1) * s : node + s;
}

}  // namespace detail

/// Geometric Laplacian of the flat torus, centered second differences:
/// (lap f)_p = sum_i (2 f_p - f_{p-e_i} - f_{p+e_i}) / h_i^2, componentwise.
/// Positive semidefinite with kernel exactly the constants.
template <typename Scalar>
Field<Scalar> laplacian(const Field<Scalar>& f) {
  detail::require_finite(f, "laplacian");
  const auto& grid = f.grid();
  Field<Scalar> out(grid, f.components());
  const int m = grid.dim();
  std::array<Scalar, kMaxDim> inv_h2{};
  for (int axis = 0; axis < m; ++axis)
    inv_h2[static_cast<std::size_t>(axis)] = Scalar(1) / (grid.spacing(axis) * grid.spacing(axis));

  const auto& in = f.values();
  auto& dst = out.values();
  parallel_for(grid.node_count(), [&](Index begin, Index end) {
    auto idx = grid.unravel(begin);
    for (Index node = begin; node < end; ++node) {
      for (int axis = 0; axis < m; ++axis) {
        const auto [plus, minus] = detail::axis_neighbors(grid, node, idx, axis);
        dst.col(node) += inv_h2[static_cast<std::size_t>(axis)] *
                         (Scalar(2) * in.col(node) - in.col(minus) - in.col(plus));
      }
      for (int axis = m - 1; axis >= 0; --axis) {
        if (++idx[static_cast<std::size_t>(axis)] < grid.extent(axis)) break;
        idx[static_cast<std::size_t>(axis)] = 0;
      }
    }
  });
  return out;
}

/// Quadratic gradient energy, (1/2) sum over axes and nodes of squared
/// forward differences times the volume element. Satisfies exactly
/// dirichlet_energy(f) = (1/2) <laplacian(f), f> under weighted_inner.
template <typename Scalar>
Scalar dirichlet_energy(const Field<Scalar>& f) {
  detail::require_finite(f, "dirichlet_energy");
  const auto& grid = f.grid();
  const int m = grid.dim();
  const auto& in = f.values();
  Scalar total = 0;
  for_each_node(grid, [&](Index node, const std::array<Index, kMaxDim>& idx) {
    for (int axis = 0; axis < m; ++axis) {
      const Index plus = detail::axis_neighbor_plus(grid, node, idx, axis);
      const Scalar inv_h = Scalar(1) / grid.spacing(axis);
      total += ((in.col(plus) - in.col(node)) * inv_h).matrix().squaredNorm();
    }
  });
  return Scalar(0.5) * total * grid.cell_volume();
}

/// Per-component integral over the torus (equal-weight periodic rule).
template <typename Scalar>
VectorX<Scalar> integrate(const Field<Scalar>& f) {
  detail::require_finite(f, "integrate");
  return f.values().rowwise().sum().matrix() * f.grid().cell_volume();
}

/// Per-component volume average.
template <typename Scalar>
VectorX<Scalar> mean_value(const Field<Scalar>& f) {
  return integrate(f) / f.grid().domain_volume();
}

/// Volume-weighted L2 inner product sum_p <f_p, g_p> * cell_volume.
template <typename Scalar>
Scalar weighted_inner(const Field<Scalar>& f, const Field<Scalar>& g) {
  f.require_compatible(g);
  return (f.values() * g.values()).sum() * f.grid().cell_volume();
}

template <typename Scalar>
Scalar weighted_norm(const Field<Scalar>& f) {
  using std::sqrt;
  return sqrt(weighted_inner(f, f));
}

}  // namespace gkw
