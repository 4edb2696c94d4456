#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gkw/errors.hpp"

namespace gkw {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ArrayXX = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr int kMaxDim = 4;

/// Uniform tensor grid on the flat torus T^m.
///
/// Nodes are indexed row-major (last axis fastest) with periodic wraparound
/// on every axis. Node j along axis i sits at coordinate j * spacing(i).
/// The volume element is the same at every node: cell_volume() =
/// measure_scale * prod_i spacing(i). The measure scale is 1 for grids built
/// directly; foliation reduction uses it to keep integrals over the reduced
/// grid equal to integrals over the full one.
template <typename Scalar>
class PeriodicGrid {
 public:
  PeriodicGrid() = default;

  explicit PeriodicGrid(std::vector<Index> extents, std::vector<Scalar> lengths = {},
                        Scalar measure_scale = Scalar(1))
      : extents_(std::move(extents)), lengths_(std::move(lengths)), measure_scale_(measure_scale) {
    const int m = static_cast<int>(extents_.size());
    if (m < 1 || m > kMaxDim)
      throw InvalidArgument("grid dimension must be between 1 and " + std::to_string(kMaxDim));
    if (lengths_.empty()) lengths_.assign(static_cast<std::size_t>(m), Scalar(2 * std::numbers::pi_v<double>));
    if (static_cast<int>(lengths_.size()) != m)
      throw InvalidArgument("grid lengths must match the dimension count");
    if (!(measure_scale_ > Scalar(0))) throw InvalidArgument("measure scale must be positive");
    node_count_ = 1;
    for (int i = 0; i < m; ++i) {
      if (extents_[static_cast<std::size_t>(i)] < 4)
        throw InvalidArgument("each axis needs at least 4 points");
      if (!(lengths_[static_cast<std::size_t>(i)] > Scalar(0)))
        throw InvalidArgument("period lengths must be positive");
      node_count_ *= extents_[static_cast<std::size_t>(i)];
      if (node_count_ > kNodeBudget) throw InvalidArgument("grid exceeds the node budget");
    }
    spacings_.resize(static_cast<std::size_t>(m));
    cell_volume_ = measure_scale_;
    for (int i = 0; i < m; ++i) {
      spacings_[static_cast<std::size_t>(i)] =
          lengths_[static_cast<std::size_t>(i)] / Scalar(extents_[static_cast<std::size_t>(i)]);
      cell_volume_ *= spacings_[static_cast<std::size_t>(i)];
    }
    strides_.assign(static_cast<std::size_t>(m), 1);
    for (int i = m - 2; i >= 0; --i)
      strides_[static_cast<std::size_t>(i)] =
          strides_[static_cast<std::size_t>(i + 1)] * extents_[static_cast<std::size_t>(i + 1)];
  }

  int dim() const { return static_cast<int>(extents_.size()); }
  Index extent(int axis) const { return extents_[static_cast<std::size_t>(axis)]; }
  Scalar length(int axis) const { return lengths_[static_cast<std::size_t>(axis)]; }
  Scalar spacing(int axis) const { return spacings_[static_cast<std::size_t>(axis)]; }
  Index stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  Index node_count() const { return node_count_; }
  Scalar cell_volume() const { return cell_volume_; }
  Scalar domain_volume() const { return cell_volume_ * Scalar(node_count_); }
  Scalar measure_scale() const { return measure_scale_; }

  const std::vector<Index>& extents() const { return extents_; }
  const std::vector<Scalar>& lengths() const { return lengths_; }

  /// Coordinate of the node with the given per-axis indices.
  Scalar coordinate(Index axis_index, int axis) const {
    return Scalar(axis_index) * spacing(axis);
  }

  /// Decomposes a flat node id into per-axis indices.
  std::array<Index, kMaxDim> unravel(Index node) const {
    std::array<Index, kMaxDim> idx{};
    for (int i = 0; i < dim(); ++i) {
      idx[static_cast<std::size_t>(i)] = node / stride(i);
      node %= stride(i);
    }
    return idx;
  }

  /// Flat node id of the periodic neighbor one step along `axis`.
  Index neighbor(Index node, int axis, int step) const {
    auto idx = unravel(node);
    Index j = (idx[static_cast<std::size_t>(axis)] + step) % extent(axis);
    if (j < 0) j += extent(axis);
    return node + (j - idx[static_cast<std::size_t>(axis)]) * stride(axis);
  }

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) {
    return a.extents_ == b.extents_ && a.lengths_ == b.lengths_ &&
           a.measure_scale_ == b.measure_scale_;
  }
  friend bool operator!=(const PeriodicGrid& a, const PeriodicGrid& b) { return !(a == b); }

  static constexpr Index kNodeBudget = Index(1) << 24;

 private:
  std::vector<Index> extents_;
  std::vector<Scalar> lengths_;
  Scalar measure_scale_ = Scalar(1);
  std::vector<Scalar> spacings_;
  std::vector<Index> strides_;
  Index node_count_ = 0;
  Scalar cell_volume_ = Scalar(0);
};

/// Visits every node in flat order, passing (node, per-axis indices).
template <typename Scalar, typename Fn>
void for_each_node(const PeriodicGrid<Scalar>& grid, Fn&& fn) {
  const int m = grid.dim();
  std::array<Index, kMaxDim> idx{};
  const Index count = grid.node_count();
  for (Index node = 0; node < count; ++node) {
    fn(node, idx);
    for (int axis = m - 1; axis >= 0; --axis) {
      if (++idx[static_cast<std::size_t>(axis)] < grid.extent(axis)) break;
      idx[static_cast<std::size_t>(axis)] = 0;
    }
  }
}

/// An n-vector-valued grid function. Values are stored as an n x node_count
/// array; the memory layout (column-major) is node-major then component.
template <typename Scalar>
class Field {
 public:
  Field() = default;

  Field(PeriodicGrid<Scalar> grid, Index components)
      : grid_(std::move(grid)),
        values_(ArrayXX<Scalar>::Zero(components, grid_.node_count())) {
    if (components < 1) throw InvalidArgument("field needs at least one component");
  }

  const PeriodicGrid<Scalar>& grid() const { return grid_; }
  Index components() const { return values_.rows(); }
  Index node_count() const { return values_.cols(); }

  ArrayXX<Scalar>& values() { return values_; }
  const ArrayXX<Scalar>& values() const { return values_; }

  Scalar& operator()(Index component, Index node) { return values_(component, node); }
  Scalar operator()(Index component, Index node) const { return values_(component, node); }

  bool all_finite() const { return values_.isFinite().all(); }

  Field& operator+=(const Field& other) {
    require_compatible(other);
    values_ += other.values_;
    return *this;
  }
  Field& operator-=(const Field& other) {
    require_compatible(other);
    values_ -= other.values_;
    return *this;
  }
  Field& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Scalar s, Field f) { return f *= s; }
  friend Field operator*(Field f, Scalar s) { return f *= s; }

  void require_compatible(const Field& other) const {
    if (grid_ != other.grid_ || components() != other.components())
      throw InvalidArgument("fields live on different grids or value spaces");
  }

 private:
  PeriodicGrid<Scalar> grid_;
  ArrayXX<Scalar> values_;
};

/// Builds a field by evaluating fn at every node. fn receives the node
/// coordinates and must return an n-vector (or a scalar when n == 1).
template <typename Scalar, typename Fn>
Field<Scalar> sample_field(const PeriodicGrid<Scalar>& grid, Index components, Fn&& fn) {
  Field<Scalar> out(grid, components);
  std::array<Scalar, kMaxDim> x{};
  for_each_node(grid, [&](Index node, const std::array<Index, kMaxDim>& idx) {
    for (int axis = 0; axis < grid.dim(); ++axis)
      x[static_cast<std::size_t>(axis)] = grid.coordinate(idx[static_cast<std::size_t>(axis)], axis);
    if constexpr (std::is_convertible_v<decltype(fn(x)), Scalar>) {
      out(0, node) = fn(x);
    } else {
      out.values().col(node) = fn(x);
    }
  });
  return out;
}

/// Constant field with the given node value.
template <typename Scalar>
Field<Scalar> constant_field(const PeriodicGrid<Scalar>& grid, const VectorX<Scalar>& value) {
  Field<Scalar> out(grid, value.size());
  out.values().colwise() = value.array();
  return out;
}

template <typename Scalar>
Field<Scalar> constant_field(const PeriodicGrid<Scalar>& grid, Scalar value) {
  VectorX<Scalar> v(1);
  v << value;
  return constant_field(grid, v);
}

template <typename Scalar>
Scalar linf_norm(const Field<Scalar>& f) {
  return f.values().abs().maxCoeff();
}

}  // namespace gkw
