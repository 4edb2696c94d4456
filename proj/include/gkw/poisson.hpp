#pragma once

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gkw/operators.hpp"

namespace gkw {

template <typename Scalar>
struct PoissonOptions {
  /// Mean tolerance; negative means auto: 1e-8 * (1 + max|rhs|).
  Scalar tau_mean = Scalar(-1);
  /// When set, a projected-out mean above tau_mean raises ZeroMeanViolation.
  bool strict = false;
};

namespace detail {

/// In-place 1D FFTs along one axis for every grid line of a complex buffer.
template <typename Scalar>
void fft_axis(const PeriodicGrid<Scalar>& grid, int axis,
              std::vector<std::complex<Scalar>>& data, bool forward) {
  Eigen::FFT<Scalar> fft;
  const Index n = grid.extent(axis);
  const Index s = grid.stride(axis);
  const Index block = n * s;
  const Index outer_count = grid.node_count() / block;
  std::vector<std::complex<Scalar>> line(static_cast<std::size_t>(n));
  std::vector<std::complex<Scalar>> transformed(static_cast<std::size_t>(n));
  for (Index outer = 0; outer < outer_count; ++outer) {
    for (Index inner = 0; inner < s; ++inner) {
      const Index base = outer * block + inner;
      for (Index t = 0; t < n; ++t) line[static_cast<std::size_t>(t)] = data[static_cast<std::size_t>(base + t * s)];
      if (forward)
        fft.fwd(transformed, line);
      else
        fft.inv(transformed, line);
      for (Index t = 0; t < n; ++t) data[static_cast<std::size_t>(base + t * s)] = transformed[static_cast<std::size_t>(t)];
    }
  }
}

/// Applies (stencil Laplacian + shift I)^{-1} in the discrete Fourier basis.
/// The stencil eigenvalue of mode k is sum_i (2 - 2 cos(2 pi k_i / N_i)) / h_i^2.
/// When zero_out_mean is set the k = 0 coefficient is dropped instead of
/// divided by the (possibly zero) shifted eigenvalue.
template <typename Scalar>
Field<Scalar> stencil_fourier_inverse(const Field<Scalar>& rhs, Scalar shift, bool zero_out_mean) {
  const auto& grid = rhs.grid();
  const int m = grid.dim();
  const Index node_count = grid.node_count();

  std::vector<std::vector<Scalar>> axis_eigs(static_cast<std::size_t>(m));
  for (int axis = 0; axis < m; ++axis) {
    const Index n = grid.extent(axis);
    const Scalar inv_h2 = Scalar(1) / (grid.spacing(axis) * grid.spacing(axis));
    axis_eigs[static_cast<std::size_t>(axis)].resize(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
      const Scalar angle = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(n);
      axis_eigs[static_cast<std::size_t>(axis)][static_cast<std::size_t>(k)] =
          (Scalar(2) - Scalar(2) * std::cos(angle)) * inv_h2;
    }
  }

  Field<Scalar> out(grid, rhs.components());
  std::vector<std::complex<Scalar>> buffer(static_cast<std::size_t>(node_count));
  for (Index comp = 0; comp < rhs.components(); ++comp) {
    for (Index node = 0; node < node_count; ++node)
      buffer[static_cast<std::size_t>(node)] = std::complex<Scalar>(rhs(comp, node), Scalar(0));
    for (int axis = 0; axis < m; ++axis) fft_axis(grid, axis, buffer, true);

    for_each_node(grid, [&](Index node, const std::array<Index, kMaxDim>& idx) {
      Scalar lambda = shift;
      bool zero_mode = true;
      for (int axis = 0; axis < m; ++axis) {
        const Index k = idx[static_cast<std::size_t>(axis)];
        lambda += axis_eigs[static_cast<std::size_t>(axis)][static_cast<std::size_t>(k)];
        zero_mode = zero_mode && (k == 0);
      }
      if (zero_mode && zero_out_mean)
        buffer[static_cast<std::size_t>(node)] = std::complex<Scalar>(0, 0);
      else
        buffer[static_cast<std::size_t>(node)] /= lambda;
    });

    for (int axis = 0; axis < m; ++axis) fft_axis(grid, axis, buffer, false);
    for (Index node = 0; node < node_count; ++node)
      out(comp, node) = buffer[static_cast<std::size_t>(node)].real();
  }
  return out;
}

}  // namespace detail

/// Solves laplacian(f) = rhs for the unique zero-mean f by diagonalizing the
/// stencil in the discrete Fourier basis. A nonzero component mean of rhs is
/// projected out; the projected means are written to projected_mean when
/// given, and strict mode rejects means above tau_mean.
template <typename Scalar>
Field<Scalar> poisson_solve(const Field<Scalar>& rhs, const PoissonOptions<Scalar>& opts = {},
                            VectorX<Scalar>* projected_mean = nullptr) {
  detail::require_finite(rhs, "poisson_solve");
  const VectorX<Scalar> mean = mean_value(rhs);
  if (projected_mean != nullptr) *projected_mean = mean;
  const Scalar tau =
      opts.tau_mean >= Scalar(0) ? opts.tau_mean : Scalar(1e-8) * (Scalar(1) + linf_norm(rhs));
  if (opts.strict && mean.template lpNorm<Eigen::Infinity>() > tau)
    throw ZeroMeanViolation("poisson_solve: right-hand side mean exceeds tolerance");
  return detail::stencil_fourier_inverse(rhs, Scalar(0), /*zero_out_mean=*/true);
}

/// Applies (laplacian + shift I)^{-1}; shift must be positive.
template <typename Scalar>
Field<Scalar> shifted_poisson_solve(const Field<Scalar>& rhs, Scalar shift) {
  detail::require_finite(rhs, "shifted_poisson_solve");
  if (!(shift > Scalar(0))) throw InvalidArgument("shifted_poisson_solve needs a positive shift");
  return detail::stencil_fourier_inverse(rhs, shift, /*zero_out_mean=*/false);
}

}  // namespace gkw
