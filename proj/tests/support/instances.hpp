#pragma once

#include <random>

#include "gkw/functional.hpp"
#include "support/random_fields.hpp"

namespace gkw::testing {

template <typename Scalar = double>
MatrixX<Scalar> random_weights(Index n, Index d, Rng& rng) {
  std::normal_distribution<Scalar> gauss(0, 1);
  MatrixX<Scalar> u(n, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < n; ++i) u(i, j) = gauss(rng);
  return u;
}

/// Instance with smooth nonnegative coefficients and a smooth right-hand
/// side; no solvability guarantee.
template <typename Scalar = double>
ProblemInstance<Scalar> random_instance(const PeriodicGrid<Scalar>& grid, Index n, Index d,
                                        Rng& rng) {
  auto ws = make_weight_system(random_weights<Scalar>(n, d, rng));
  std::vector<Field<Scalar>> a;
  for (Index j = 0; j < d; ++j) a.push_back(random_nonnegative_field<Scalar>(grid, rng));
  Field<Scalar> w = random_trig_field<Scalar>(grid, n, rng);
  return make_problem(grid, std::move(ws), std::move(a), std::move(w));
}

/// Zero-mean smooth field (exact to rounding).
template <typename Scalar = double>
Field<Scalar> zero_mean_noise(const PeriodicGrid<Scalar>& grid, Index n, Rng& rng,
                              Scalar amplitude = Scalar(0.5)) {
  Field<Scalar> f = random_trig_field<Scalar>(grid, n, rng, amplitude);
  const VectorX<Scalar> mean = f.values().rowwise().mean();
  f.values().colwise() -= mean.array();
  return f;
}

/// Instance whose W is forced inside the open cone: W = sum c_j u_j with
/// c_j in [0.3, 2], realized by a constant plus zero-mean noise. Resamples
/// until the certified margin clears the near-boundary band.
template <typename Scalar = double>
ProblemInstance<Scalar> random_inside_instance(const PeriodicGrid<Scalar>& grid, Index n, Index d,
                                               Rng& rng) {
  std::uniform_real_distribution<Scalar> coeff(Scalar(0.3), Scalar(2));
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto ws = make_weight_system(random_weights<Scalar>(n, d, rng));
    std::vector<Field<Scalar>> a;
    for (Index j = 0; j < d; ++j) a.push_back(random_nonnegative_field<Scalar>(grid, rng));
    VectorX<Scalar> target = VectorX<Scalar>::Zero(n);
    for (Index j = 0; j < d; ++j) target += coeff(rng) * ws.u.col(j);
    Field<Scalar> w = zero_mean_noise<Scalar>(grid, n, rng);
    w.values().colwise() += (target / grid.domain_volume()).array();
    auto inst = make_problem(grid, std::move(ws), std::move(a), std::move(w));
    auto cert = cone_membership(inst.W, inst.ws, inst.active);
    if (cert.inside() && cert.margin > 100 * cert.tau_cone) return inst;
  }
  throw std::logic_error("failed to sample an inside instance");
}

/// Instance whose W is strictly separated from the active cone.
template <typename Scalar = double>
ProblemInstance<Scalar> random_outside_instance(const PeriodicGrid<Scalar>& grid, Index n, Index d,
                                                Rng& rng) {
  std::normal_distribution<Scalar> gauss(0, 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    VectorX<Scalar> lambda(n);
    for (Index i = 0; i < n; ++i) lambda(i) = gauss(rng);
    if (lambda.norm() < Scalar(0.1)) continue;
    lambda.normalize();
    MatrixX<Scalar> u = random_weights<Scalar>(n, d, rng);
    for (Index j = 0; j < d; ++j) {
      const Scalar along = lambda.dot(u.col(j));
      if (along > Scalar(-0.2)) u.col(j) -= (along + Scalar(0.4)) * lambda;
    }
    VectorX<Scalar> target(n);
    for (Index i = 0; i < n; ++i) target(i) = gauss(rng);
    const Scalar along = lambda.dot(target);
    if (along < Scalar(0.5)) target += (Scalar(0.7) - along) * lambda;

    auto ws = make_weight_system(std::move(u));
    std::vector<Field<Scalar>> a;
    for (Index j = 0; j < d; ++j) a.push_back(random_nonnegative_field<Scalar>(grid, rng));
    Field<Scalar> w = zero_mean_noise<Scalar>(grid, n, rng);
    w.values().colwise() += (target / grid.domain_volume()).array();
    auto inst = make_problem(grid, std::move(ws), std::move(a), std::move(w));
    auto cert = cone_membership(inst.W, inst.ws, inst.active);
    if (!cert.inside() && cert.margin < -100 * cert.tau_cone) return inst;
  }
  throw std::logic_error("failed to sample an outside instance");
}

}  // namespace gkw::testing
