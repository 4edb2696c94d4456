#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gkw/operators.hpp"
#include "gkw/poisson.hpp"
#include "support/random_fields.hpp"

using namespace gkw;
constexpr double kPi = std::numbers::pi;

namespace {

PeriodicGrid<double> line_grid(Index n, double length = 2 * kPi) {
  return PeriodicGrid<double>({n}, {length});
}

Field<double> sin_samples(const PeriodicGrid<double>& grid) {
  return sample_field(grid, 1, [](const std::array<double, kMaxDim>& x) { return std::sin(x[0]); });
}

/// Forward-difference quadratic form; the summation-by-parts counterpart of
/// <laplacian(f), g>, evaluated without the Laplacian.
double forward_difference_form(const Field<double>& f, const Field<double>& g) {
  const auto& grid = f.grid();
  double total = 0;
  for_each_node(grid, [&](Index node, const std::array<Index, kMaxDim>& idx) {
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const Index plus = detail::axis_neighbor_plus(grid, node, idx, axis);
      const double inv_h2 = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
      total += inv_h2 * ((f.values().col(plus) - f.values().col(node)) *
                         (g.values().col(plus) - g.values().col(node)))
                            .sum();
    }
  });
  return total * grid.cell_volume();
}

}  // namespace

TEST_CASE("grid construction validates its invariants") {
  CHECK_THROWS_AS(PeriodicGrid<double>({3}), InvalidArgument);
  CHECK_THROWS_AS(PeriodicGrid<double>({8}, {-1.0}), InvalidArgument);
  CHECK_THROWS_AS(PeriodicGrid<double>(std::vector<Index>{}), InvalidArgument);
  CHECK_THROWS_AS(PeriodicGrid<double>({8, 8, 8, 8, 8}), InvalidArgument);

  PeriodicGrid<double> g({4, 6}, {2 * kPi, 1.0});
  CHECK(g.node_count() == 24);
  CHECK(g.spacing(0) == doctest::Approx(kPi / 2));
  CHECK(g.spacing(1) == doctest::Approx(1.0 / 6));
  CHECK(g.cell_volume() == doctest::Approx(kPi / 2 / 6));
  CHECK(g.stride(0) == 6);
  CHECK(g.stride(1) == 1);
  CHECK(g.neighbor(0, 1, -1) == 5);
  CHECK(g.neighbor(23, 0, 1) == 5);
}

TEST_CASE("laplacian of a constant field vanishes") {
  for (auto extents : {std::vector<Index>{8}, std::vector<Index>{4, 6}, std::vector<Index>{4, 4, 4}}) {
    PeriodicGrid<double> grid(extents);
    VectorX<double> value(2);
    value << 3.5, -1.25;
    Field<double> c = constant_field(grid, value);
    CHECK(linf_norm(laplacian(c)) == 0.0);
  }
}

TEST_CASE("laplacian on the coarse sine samples is exact stencil arithmetic") {
  // N=4 on [0, 2pi): samples of sin are (0, 1, 0, -1) and the centered
  // stencil maps them to (8/pi^2) * (0, 1, 0, -1).
  auto grid = line_grid(4);
  Field<double> f = sin_samples(grid);
  Field<double> lap = laplacian(f);
  const double factor = 8.0 / (kPi * kPi);
  for (Index node = 0; node < 4; ++node)
    CHECK(lap(0, node) == doctest::Approx(factor * f(0, node)).epsilon(1e-14));
}

TEST_CASE("laplacian rejects non-finite input") {
  auto grid = line_grid(4);
  Field<double> f(grid, 1);
  f(0, 1) = std::nan("");
  CHECK_THROWS_AS(laplacian(f), NonFiniteField);
}

TEST_CASE("laplacian converges at second order on an analytic mode") {
  // Discrete Laplacian of sin approximates sin itself (geometric sign).
  double previous_error = 0;
  std::vector<double> errors;
  for (Index n : {32, 64, 128, 256}) {
    auto grid = line_grid(n);
    Field<double> f = sin_samples(grid);
    Field<double> lap = laplacian(f);
    double err = linf_norm(lap - f);
    errors.push_back(err);
    const double h = grid.spacing(0);
    CHECK(err <= 1.5 * (1.0 / 12.0) * h * h);
    previous_error = err;
  }
  (void)previous_error;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double order = std::log2(errors[i] / errors[i + 1]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("dirichlet energy basics") {
  auto grid = line_grid(4);
  SUBCASE("constant field has zero energy") {
    CHECK(dirichlet_energy(constant_field(grid, 2.0)) == 0.0);
  }
  SUBCASE("coarse sine samples") {
    Field<double> f = sin_samples(grid);
    CHECK(dirichlet_energy(f) == doctest::Approx(4.0 / kPi).epsilon(1e-14));
  }
  SUBCASE("quadratic homogeneity") {
    testing::Rng rng(7);
    Field<double> f = testing::random_node_field(grid, 2, rng);
    CHECK(dirichlet_energy(2.0 * f) == doctest::Approx(4.0 * dirichlet_energy(f)).epsilon(1e-13));
  }
}

TEST_CASE("dirichlet energy equals half the Laplacian quadratic form") {
  testing::Rng rng(11);
  for (auto extents : {std::vector<Index>{16}, std::vector<Index>{6, 8}, std::vector<Index>{4, 4, 6}}) {
    PeriodicGrid<double> grid(extents, {});
    Field<double> f = testing::random_node_field(grid, 3, rng);
    const double via_form = 0.5 * weighted_inner(laplacian(f), f);
    const double energy = dirichlet_energy(f);
    CHECK(energy == doctest::Approx(via_form).epsilon(1e-12));
  }
}

TEST_CASE("summation by parts holds to rounding") {
  testing::Rng rng(13);
  PeriodicGrid<double> grid({8, 6}, {2 * kPi, 4.0});
  Field<double> f = testing::random_node_field(grid, 2, rng);
  Field<double> g = testing::random_node_field(grid, 2, rng);
  const double lhs = weighted_inner(laplacian(f), g);
  const double rhs = forward_difference_form(f, g);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("laplacian is symmetric and mean-free") {
  testing::Rng rng(17);
  PeriodicGrid<double> grid({6, 4, 4}, {2 * kPi, 1.0, 3.0});
  Field<double> f = testing::random_node_field(grid, 2, rng);
  Field<double> g = testing::random_node_field(grid, 2, rng);
  CHECK(weighted_inner(laplacian(f), g) ==
        doctest::Approx(weighted_inner(f, laplacian(g))).epsilon(1e-12));
  const VectorX<double> integral = integrate(laplacian(f));
  CHECK(integral.template lpNorm<Eigen::Infinity>() <= 1e-10 * linf_norm(f));
}

TEST_CASE("integrate uses the exact periodic rule") {
  SUBCASE("volume of the torus") {
    auto grid = line_grid(16);
    CHECK(integrate(constant_field(grid, 1.0))(0) == doctest::Approx(2 * kPi).epsilon(1e-14));
  }
  SUBCASE("pure mode integrates to zero") {
    for (Index n : {4, 8, 31}) {
      auto grid = line_grid(n);
      CHECK(std::abs(integrate(sin_samples(grid))(0)) <= 1e-13);
    }
  }
  SUBCASE("sin^2 on eight points integrates to pi") {
    auto grid = line_grid(8);
    Field<double> f = sin_samples(grid);
    f.values() = f.values().square();
    CHECK(integrate(f)(0) == doctest::Approx(kPi).epsilon(1e-14));
  }
  SUBCASE("per-component integrals") {
    PeriodicGrid<double> grid({4, 4}, {1.0, 1.0});
    VectorX<double> value(2);
    value << 2.0, -3.0;
    const VectorX<double> integral = integrate(constant_field(grid, value));
    CHECK(integral(0) == doctest::Approx(2.0));
    CHECK(integral(1) == doctest::Approx(-3.0));
  }
}

TEST_CASE("poisson solve inverts the stencil") {
  SUBCASE("zero right-hand side") {
    PeriodicGrid<double> grid({8, 8});
    Field<double> zero(grid, 2);
    CHECK(linf_norm(poisson_solve(zero)) == 0.0);
  }
  SUBCASE("coarse sine inverse") {
    auto grid = line_grid(4);
    Field<double> f = sin_samples(grid);
    Field<double> rhs = (8.0 / (kPi * kPi)) * f;
    Field<double> sol = poisson_solve(rhs);
    CHECK(linf_norm(sol - f) <= 1e-13);
  }
  SUBCASE("round trip on random zero-mean data") {
    testing::Rng rng(19);
    for (auto extents : {std::vector<Index>{32}, std::vector<Index>{8, 12}, std::vector<Index>{4, 6, 4}}) {
      PeriodicGrid<double> grid(extents, {});
      Field<double> rhs = testing::random_zero_mean_field(grid, 2, rng);
      Field<double> sol = poisson_solve(rhs);
      CHECK(linf_norm(laplacian(sol) - rhs) <= 1e-12 * (1 + linf_norm(rhs)));
      CHECK(mean_value(sol).template lpNorm<Eigen::Infinity>() <= 1e-13);
      // Left inverse as well: solve then apply on zero-mean input.
      Field<double> back = poisson_solve(laplacian(sol));
      CHECK(linf_norm(back - sol) <= 1e-10 * (1 + linf_norm(sol)));
    }
  }
  SUBCASE("mean handling") {
    auto grid = line_grid(8);
    Field<double> rhs = constant_field(grid, 1.0);
    VectorX<double> mean;
    Field<double> sol = poisson_solve(rhs, {}, &mean);
    CHECK(mean(0) == doctest::Approx(1.0));
    CHECK(linf_norm(sol) <= 1e-14);
    PoissonOptions<double> strict;
    strict.strict = true;
    CHECK_THROWS_AS(poisson_solve(rhs, strict), ZeroMeanViolation);
  }
}

TEST_CASE("shifted poisson solve inverts laplacian plus identity") {
  testing::Rng rng(23);
  PeriodicGrid<double> grid({12, 8});
  Field<double> rhs = testing::random_node_field(grid, 2, rng);
  const double shift = 0.7;
  Field<double> sol = shifted_poisson_solve(rhs, shift);
  Field<double> applied = laplacian(sol) + shift * sol;
  CHECK(linf_norm(applied - rhs) <= 1e-12 * (1 + linf_norm(rhs)));
}
