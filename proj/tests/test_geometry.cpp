#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wavectl/error.hpp"
#include "wavectl/geometry.hpp"
#include "wavectl/weights.hpp"

using namespace wavectl;

namespace {

ErrorCode code_of(const GeometryConfig& g) {
  try {
    validate_geometry(g);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidValue;
}

}  // namespace

TEST_CASE("interval partition and minimal time") {
  const auto part = validate_geometry(testing::unit_interval());
  CHECK(part.face_in_gamma1(1));
  CHECK_FALSE(part.face_in_gamma1(0));
  CHECK(part.t_min == doctest::Approx(2.4).epsilon(1e-14));
  CHECK(part.margin == 0.0);
}

TEST_CASE("geometry errors") {
  auto g = testing::unit_interval();
  g.x0 = {0.5, 0.0};
  CHECK(code_of(g) == ErrorCode::X0InsideDomain);
  g.x0 = {1.0, 0.0};
  CHECK(code_of(g) == ErrorCode::X0InsideDomain);

  g = testing::unit_interval();
  g.T = 2.5;
  g.delta = 0.1;
  CHECK(code_of(g) == ErrorCode::TimeTooShort);

  g = testing::unit_interval();
  g.delta = 0.0;
  CHECK(code_of(g) == ErrorCode::BadDelta);
  g.delta = -0.1;
  CHECK(code_of(g) == ErrorCode::BadDelta);
}

TEST_CASE("rectangle partition is per face") {
  const auto part = validate_geometry(testing::unit_square());
  CHECK_FALSE(part.face_in_gamma1(0));
  CHECK(part.face_in_gamma1(1));
  CHECK_FALSE(part.face_in_gamma1(2));
  CHECK(part.face_in_gamma1(3));
  CHECK(part.t_min == doctest::Approx(2.0 * std::sqrt(2.0 * 1.2 * 1.2)));
}

TEST_CASE("validate_geometry is deterministic") {
  const auto a = validate_geometry(testing::unit_square());
  const auto b = validate_geometry(testing::unit_square());
  CHECK(a.gamma1 == b.gamma1);
  CHECK(a.margin == b.margin);
  CHECK(a.t_min == b.t_min);
}

TEST_CASE("weights at the time midpoint drop the time term") {
  const auto su = testing::make_setup(testing::unit_interval(), 16, 0, 3.0);
  for (double x : {0.0, 0.3, 1.0}) {
    CHECK(su.model.psi(x, 0.0, su.model.T() / 2) == doctest::Approx((x + 0.2) * (x + 0.2) + su.model.M0()));
  }
}

TEST_CASE("phi = 1 gives rho = e^-1 at s = 1") {
  auto geo = testing::unit_interval();
  WeightParams wp;
  wp.s = 1.0;
  WeightModel m(geo, wp);
  // lambda -> psi scaling: phi = 1 exactly when lambda psi = 0.
  WeightParams flat = wp;
  flat.lambda = 1e-300;
  WeightModel f(geo, flat);
  CHECK(f.phi(0.5, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(f.rho(0.5, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(m.rho(0.5, 0.0, 1.0) < std::exp(-1.0));
}

TEST_CASE("pointwise weight bounds on the grid") {
  for (double s : {1.0, 4.0, 9.0}) {
    const auto su = testing::make_setup(testing::unit_interval(), 24, 0, s);
    const WeightFields w = eval_weights(su.grid, su.model);
    const double c = su.model.c();
    CHECK(w.psi.values.minCoeff() > 0.0);
    CHECK(w.psi.values.minCoeff() >= 1.0 - 1e-12);
    CHECK(w.phi.values.minCoeff() >= 1.0);
    CHECK(w.phi.values.maxCoeff() <= c * (1.0 + 1e-14));
    CHECK(w.rho_raw.values.maxCoeff() <= std::exp(-s));
    CHECK(w.rho_raw.values.minCoeff() >= std::exp(-c * s) * (1.0 - 1e-12));
    CHECK(w.rho.values.maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
    // c is attained at t = T/2 on the farthest point.
    CHECK(c == doctest::Approx(std::exp(su.model.lambda() * (1.2 * 1.2 + su.model.M0()))));
  }
}

TEST_CASE("non-positive psi is rejected") {
  auto geo = testing::unit_interval();
  WeightParams wp;
  wp.M0 = 0.01;
  const auto su = testing::make_setup(geo, 8, 0, 2.0);
  WeightModel m(geo, wp);
  CHECK_THROWS_AS(eval_weights(su.grid, m), Error);
  try {
    eval_weights(su.grid, m);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PsiNonPositive);
  }
}

TEST_CASE("time cut-off") {
  const auto su = testing::make_setup(testing::unit_interval(), 16, 0, 4.0);
  const auto& eta = su.profile;
  const double T = su.model.T(), d = eta.delta();
  CHECK(eta.eta(0.0) == 0.0);
  CHECK(eta.eta(T) == 0.0);
  CHECK(eta.eta(d) == 0.0);
  CHECK(eta.eta(T - d) == 0.0);
  CHECK(eta.eta(T / 2) == 1.0);
  for (int i = 0; i <= 2000; ++i) {
    const double t = T * i / 2000.0;
    const double v = eta.eta(t);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (t <= d || t >= T - d) CHECK(v == 0.0);
  }
  // C1: derivative continuous across the ramp junctions, and matches finite differences.
  const auto [p0, p1] = eta.plateau();
  for (double t : {d, p0, p1, T - d}) {
    CHECK(std::abs(eta.eta_derivative(t - 1e-9) - eta.eta_derivative(t + 1e-9)) < 1e-6);
  }
  for (double t : {d + 0.3 * eta.ramp(), T - d - 0.7 * eta.ramp()}) {
    const double fd = (eta.eta(t + 1e-6) - eta.eta(t - 1e-6)) / 2e-6;
    CHECK(eta.eta_derivative(t) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("boundary cut-off in 1D") {
  const auto su = testing::make_setup(testing::unit_interval(), 16, 0, 4.0);
  CHECK(su.profile.boundary_cutoff(1, {1.0, 0.0}) == 1.0);
  CHECK(su.profile.boundary_cutoff(0, {0.0, 0.0}) == 0.0);
  const CutoffValues cv = eval_cutoffs(su.grid, su.profile);
  CHECK(cv.eta.size() == su.grid.levels());
  CHECK(cv.psi.size() == su.grid.trace_count());
}

TEST_CASE("boundary cut-off in 2D") {
  const auto geo = testing::unit_square();
  const auto su = testing::make_setup(geo, 12, 0, 2.0);
  const auto& part = su.profile.partition();
  for (const auto& tp : su.grid.trace_points()) {
    const double v = su.profile.boundary_cutoff(tp.face, tp.position);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (part.face_in_gamma1(tp.face)) CHECK(v == 1.0);
    if (!su.profile.in_gamma0(tp.face, tp.position)) CHECK(v == 0.0);
  }
  // Points on the far faces beyond the margin carry no control.
  CHECK(su.profile.boundary_cutoff(0, {0.0, 0.1}) == 0.0);
  CHECK(su.profile.boundary_cutoff(2, {0.1, 0.0}) == 0.0);
}

TEST_CASE("time derivative of rho^-1 vanishes at T/2") {
  const auto su = testing::make_setup(testing::unit_interval(), 16, 0, 4.0);
  for (double x : {0.0, 0.4, 1.0}) CHECK(su.model.inverse_derivatives(x, 0.0, su.model.T() / 2).dt == 0.0);
}

TEST_CASE("analytic derivatives of rho^-1 match centered differences at second order") {
  const auto geo = testing::unit_square();
  WeightParams wp;
  wp.s = 2.0;
  wp.lambda = 0.3;
  const WeightModel m(geo, wp);
  const double x = 0.37, y = 0.61, t = 1.1;
  const auto d = m.inverse_derivatives(x, y, t);
  auto f = [&](double a, double b, double c) { return m.rho_inverse(a, b, c); };
  double prev[5] = {0, 0, 0, 0, 0};
  for (int level = 0; level < 3; ++level) {
    const double h = 0.02 / std::pow(2.0, level);
    const double err[5] = {
        std::abs((f(x, y, t + h) - f(x, y, t - h)) / (2 * h) - d.dt),
        std::abs((f(x, y, t + h) - 2 * f(x, y, t) + f(x, y, t - h)) / (h * h) - d.dtt),
        std::abs((f(x + h, y, t) - f(x - h, y, t)) / (2 * h) - d.grad[0]),
        std::abs((f(x, y + h, t) - f(x, y - h, t)) / (2 * h) - d.grad[1]),
        std::abs((f(x + h, y, t) + f(x - h, y, t) + f(x, y + h, t) + f(x, y - h, t) - 4 * f(x, y, t)) / (h * h) -
                 d.laplacian),
    };
    if (level > 0) {
      for (int k = 0; k < 5; ++k) CHECK(std::log2(prev[k] / err[k]) >= 1.7);
    }
    std::copy(err, err + 5, prev);
  }
}

TEST_CASE("first-order weight constants do not depend on s") {
  const auto geo = testing::unit_interval();
  const auto su = testing::make_setup(geo, 32, 0, 2.0);
  const auto a = weight_derivative_report(su.model, su.grid);
  const auto b = weight_derivative_report(su.model.with_s(8.0), su.grid);
  CHECK(a.C_grad == doctest::Approx(b.C_grad).epsilon(0.1));
  CHECK(a.C_t == doctest::Approx(b.C_t).epsilon(0.1));
  CHECK(a.C_grad > 0.0);
  CHECK(std::isfinite(a.C_tt));
  CHECK(std::isfinite(a.C_lap));
}

TEST_CASE("automatic offset gives psi >= 1") {
  const auto geo = testing::unit_interval();
  const double M0 = auto_M0(geo, 0.9);
  CHECK(M0 == doctest::Approx(0.9 * 1.3 * 1.3 - 0.04 + 1.0));
  CHECK(default_s(1.0, 0.0) == doctest::Approx(1.0));
  CHECK(default_s(1.0, std::exp(2.0) - 1.0) == doctest::Approx(3.0));
}
