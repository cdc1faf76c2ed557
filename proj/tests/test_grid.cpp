#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wavectl/error.hpp"
#include "wavectl/grid.hpp"

using namespace wavectl;
using std::numbers::pi;

namespace {

// Independent dense assembly of D_tt - Delta_h on the full node vector (levels 1..nt-1, interior rows).
Eigen::MatrixXd dense_wave_matrix(const SpaceTimeGrid& g) {
  const int np = g.spatial_nodes();
  const int N = g.node_count();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  const double dt2 = g.dt() * g.dt();
  for (int n = 1; n < g.nt(); ++n) {
    for (int k : g.interior()) {
      const int row = n * np + k;
      M(row, row) += -2.0 / dt2;
      M(row, (n - 1) * np + k) += 1.0 / dt2;
      M(row, (n + 1) * np + k) += 1.0 / dt2;
      for (int a = 0; a < g.dim(); ++a) {
        const int stride = a == 0 ? 1 : g.nodes_along(0);
        const double h2 = g.h(a) * g.h(a);
        M(row, n * np + k) += 2.0 / h2;
        M(row, n * np + k - stride) -= 1.0 / h2;
        M(row, n * np + k + stride) -= 1.0 / h2;
      }
    }
  }
  return M;
}

double max_interior_error(const SpaceTimeGrid& g, const ScalarField& a, double exact) {
  double e = 0.0;
  for (int n = 1; n < g.nt(); ++n) {
    for (int k : g.interior()) e = std::max(e, std::abs(a(k, n) - exact));
  }
  return e;
}

}  // namespace

TEST_CASE("spacing arithmetic and minimal counts") {
  GeometryConfig geo = testing::unit_interval();
  geo.T = 2.0;
  CHECK_THROWS_AS(build_grid(geo, 3, 4), Error);
  try {
    build_grid(geo, 3, 4);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  const SpaceTimeGrid g = build_grid(geo, 4, 4);
  CHECK(g.h(0) == doctest::Approx(0.2));
  CHECK(g.dt() == doctest::Approx(0.5));
  CHECK_THROWS_AS(build_grid(geo, 4, 3), Error);
}

TEST_CASE("node counting in 1D") {
  const SpaceTimeGrid g = build_grid(testing::unit_interval(), 7, 9);
  CHECK(g.node_count() == (7 + 2) * (9 + 1));
  CHECK(g.interior_nodes() == 7);
  CHECK(g.boundary().size() == 2);
  CHECK(g.trace_count() == 2);
}

TEST_CASE("rectangle boundary is the four faces without duplicated corners") {
  const SpaceTimeGrid g = build_grid(testing::unit_square(), {5, 7}, 8);
  const int n1 = 7, n2 = 9;
  CHECK(static_cast<int>(g.boundary().size()) == 2 * n1 + 2 * n2 - 4);
  CHECK(g.interior_nodes() == 5 * 7);
  CHECK(g.trace_count() == 2 * 5 + 2 * 7);
  std::vector<int> seen(static_cast<std::size_t>(g.spatial_nodes()), 0);
  for (int b : g.boundary()) ++seen[static_cast<std::size_t>(b)];
  for (int k : g.interior()) CHECK(seen[static_cast<std::size_t>(k)] == 0);
  for (int b : g.boundary()) CHECK(seen[static_cast<std::size_t>(b)] == 1);
}

TEST_CASE("wave operator is exact on t^2") {
  const SpaceTimeGrid g = build_grid(testing::unit_interval(), 9, 12);
  const ScalarField w = sample_field(g, [](double, double, double t) { return t * t; });
  CHECK(max_interior_error(g, apply_wave_operator(w, g), 2.0) < 1e-10);
}

TEST_CASE("wave operator on a d'Alembert mode converges at second order") {
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    const int nx = 16 * (1 << level) - 1;
    const SpaceTimeGrid g = build_grid(testing::unit_interval(), nx, 4 * (nx + 1));
    const ScalarField w =
        sample_field(g, [](double x, double, double t) { return std::sin(pi * x) * std::sin(pi * t); });
    const double e = max_interior_error(g, apply_wave_operator(w, g), 0.0);
    if (level > 0) CHECK(std::log2(prev / e) == doctest::Approx(2.0).epsilon(0.15));
    prev = e;
  }
}

TEST_CASE("wave operator matches a dense stencil and is linear") {
  for (const auto& geo : {testing::unit_interval(), testing::unit_square()}) {
    const SpaceTimeGrid g = build_grid(geo, {5, 4}, 6);
    ScalarField w = g.make_field();
    w.values = testing::random_vector(w.values.size(), 3);
    ScalarField z = g.make_field();
    z.values = testing::random_vector(z.values.size(), 4);
    const Eigen::VectorXd dense = dense_wave_matrix(g) * w.values;
    const ScalarField lw = apply_wave_operator(w, g);
    CHECK((lw.values - dense).cwiseAbs().maxCoeff() <= 1e-14 * dense.cwiseAbs().maxCoeff());

    ScalarField combo = g.make_field();
    combo.values = 2.5 * w.values + z.values;
    const Eigen::VectorXd lhs = apply_wave_operator(combo, g).values;
    const Eigen::VectorXd rhs = 2.5 * lw.values + apply_wave_operator(z, g).values;
    CHECK(testing::rel(lhs, rhs) < 1e-13);
  }
}

TEST_CASE("normal trace of x(1-x)g(t)") {
  auto gfun = [](double t) { return 1.0 + std::cos(t); };
  for (int level = 0; level < 3; ++level) {
    const int nx = 16 * (1 << level) - 1;
    const SpaceTimeGrid g = build_grid(testing::unit_interval(), nx, 40);
    const ScalarField w = sample_field(g, [&](double x, double, double t) { return x * (1.0 - x) * gfun(t); });
    const BoundaryField tr = normal_trace(w, g);
    double e = 0.0;
    // Both endpoints: w_x(1) = -g with nu = +1 and w_x(0) = g with nu = -1.
    for (int b = 0; b < g.trace_count(); ++b) {
      for (int n = 0; n < g.levels(); ++n) e = std::max(e, std::abs(tr(b, n) + gfun(g.time(n))));
    }
    // The one-sided stencil is exact on quadratics.
    CHECK(e < 1e-12);
  }
}

TEST_CASE("normal trace refinement order on a smooth field") {
  double prev = 0.0;
  for (int level = 0; level < 4; ++level) {
    const int nx = 16 * (1 << level) - 1;
    const SpaceTimeGrid g = build_grid(testing::unit_square(), {nx, nx}, 10);
    const ScalarField w = sample_field(g, [](double x, double y, double t) {
      return std::sin(pi * x) * std::sin(pi * y) * std::exp(x + y) * (1.0 + t);
    });
    const BoundaryField tr = normal_trace(w, g);
    double e = 0.0;
    for (int b = 0; b < g.trace_count(); ++b) {
      const auto& tp = g.trace_points()[static_cast<std::size_t>(b)];
      const double x = tp.position[0], y = tp.position[1];
      double exact = 0.0;
      // d/dn of sin(pi x) sin(pi y) e^{x+y}: only the factor vanishing on the face survives.
      if (tp.face == 0) exact = -pi * std::sin(pi * y) * std::exp(x + y);
      if (tp.face == 1) exact = -pi * std::sin(pi * y) * std::exp(x + y);
      if (tp.face == 2) exact = -pi * std::sin(pi * x) * std::exp(x + y);
      if (tp.face == 3) exact = -pi * std::sin(pi * x) * std::exp(x + y);
      for (int n = 0; n < g.levels(); ++n) e = std::max(e, std::abs(tr(b, n) - exact * (1.0 + g.time(n))));
    }
    if (level > 0) CHECK(std::log2(prev / e) >= 1.7);
    prev = e;
  }
}

TEST_CASE("normal trace of zero is zero") {
  const SpaceTimeGrid g = build_grid(testing::unit_square(), {5, 5}, 6);
  const BoundaryField tr = normal_trace(g.make_field(), g);
  CHECK(tr.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(tr.levels == g.levels());
}

TEST_CASE("automatic time steps respect the CFL target") {
  const auto geo = testing::unit_square();
  const int nt = auto_time_steps(geo, {31, 31}, 0.5);
  const SpaceTimeGrid g = build_grid(geo, {31, 31}, nt);
  CHECK(g.cfl() <= 0.5);
  const SpaceTimeGrid coarser = build_grid(geo, {31, 31}, nt - 1);
  CHECK(coarser.cfl() > 0.5);
}

TEST_CASE("spatial and time quadrature weights are trapezoidal") {
  const SpaceTimeGrid g = build_grid(testing::unit_square(), {6, 4}, 10);
  CHECK(g.spatial_weights().sum() == doctest::Approx(1.0));
  CHECK(g.time_weights().sum() == doctest::Approx(g.T()));
  double bw = 0.0;
  for (const auto& tp : g.trace_points()) bw += tp.weight;
  // Trace points exclude the corners, so the perimeter loses one spacing per face.
  CHECK(bw == doctest::Approx(4.0 - 2.0 * g.h(0) - 2.0 * g.h(1)));
}
