#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wavectl/error.hpp"
#include "wavectl/forward_wave.hpp"
#include "wavectl/linear_control.hpp"
#include "wavectl/norms.hpp"

using namespace wavectl;
using std::numbers::pi;

namespace {

WeightedSystem make_system(const testing::Setup& su, AssemblyOptions opt = {}) {
  return assemble_system(su.grid, su.model, su.profile, opt);
}

ControlData sine_data(const SpaceTimeGrid& g) {
  ControlData d = ControlData::zero(g);
  d.u0 = sample_slice(g, [](double x, double) { return std::sin(pi * x); });
  return d;
}

// Quadratic form rebuilt from the wave operator, the first-order trace and the weights.
double quadratic_form_oracle(const WeightedSystem& sys, const ScalarField& w) {
  const SpaceTimeGrid& g = sys.grid;
  const ScalarField lw = apply_wave_operator(w, g);
  const BoundaryField tr = normal_trace(w, g, TraceOrder::First);
  const double qx = g.cell_volume();
  double interior = 0.0, boundary = 0.0, reg = 0.0;
  for (int n = 0; n < g.levels(); ++n) {
    for (int k : g.interior()) {
      const double r = sys.weights.rho(k, n);
      if (n >= 1 && n < g.nt()) interior += g.dt() * qx * lw(k, n) * lw(k, n) / (r * r);
      reg += g.time_weights()[n] * qx * w(k, n) * w(k, n) / (r * r);
    }
    const double eta = sys.cutoffs.eta[n];
    for (int b = 0; b < g.trace_count(); ++b) {
      const auto& tp = g.trace_points()[static_cast<std::size_t>(b)];
      const double r = sys.weights.rho(tp.node, n);
      boundary += g.time_weights()[n] * tp.weight * eta * eta * sys.cutoffs.psi[b] * tr(b, n) * tr(b, n) / (r * r);
    }
  }
  return interior + sys.s * boundary + sys.epsilon * reg;
}

}  // namespace

TEST_CASE("assembled operator is symmetric") {
  for (const auto& geo : {testing::unit_interval(), testing::unit_square()}) {
    const auto su = testing::make_setup(geo, 8, 0, 3.0);
    const WeightedSystem sys = make_system(su);
    const SparseMatrix At = sys.A.transpose();
    CHECK((sys.A - At).norm() <= 1e-14 * sys.A.norm());
    for (unsigned seed = 0; seed < 5; ++seed) {
      const Eigen::VectorXd w = testing::random_vector(sys.dual_size(), seed);
      const Eigen::VectorXd z = testing::random_vector(sys.dual_size(), seed + 100);
      const Eigen::VectorXd Aw = sys.apply(w), Az = sys.apply(z);
      CHECK(std::abs(Aw.dot(z) - w.dot(Az)) <= 1e-12 * Aw.norm() * z.norm());
    }
  }
}

TEST_CASE("quadratic form matches the weighted integrals and is coercive") {
  for (const auto& geo : {testing::unit_interval(), testing::unit_square()}) {
    const auto su = testing::make_setup(geo, 7, 0, 2.0);
    const WeightedSystem sys = make_system(su);
    for (unsigned seed = 0; seed < 3; ++seed) {
      const ScalarField w = testing::random_dual(su.grid, seed);
      const Eigen::VectorXd wd = sys.to_dual(w);
      const double q = wd.dot(sys.apply(wd));
      CHECK(q == doctest::Approx(quadratic_form_oracle(sys, w)).epsilon(1e-11));
      CHECK(q >= wd.dot(sys.qEps.cwiseProduct(wd)));
    }
  }
}

TEST_CASE("boundary coefficient is linear in s") {
  const auto su = testing::make_setup(testing::unit_interval(), 8, 0, 3.0);
  const WeightedSystem sys = make_system(su);
  const auto& g = su.grid;
  for (int n = 0; n < g.levels(); ++n) {
    for (int b = 0; b < g.trace_count(); ++b) {
      const int i = n * g.trace_count() + b;
      const auto& tp = g.trace_points()[static_cast<std::size_t>(b)];
      const double frozen = g.time_weights()[n] * tp.weight * std::pow(sys.cutoffs.eta[n], 2) * sys.cutoffs.psi[b] *
                            sys.rho_inv2_sigma[i];
      CHECK(sys.qSigma[i] == doctest::Approx(sys.s * frozen).epsilon(1e-14));
    }
  }
}

TEST_CASE("zero data gives the zero dual state") {
  const auto su = testing::make_setup(testing::unit_interval(), 8, 0, 3.0);
  const WeightedSystem sys = make_system(su);
  const DualSolution d = solve_dual(sys, ControlData::zero(su.grid));
  CHECK(d.dual.cwiseAbs().maxCoeff() == 0.0);
  const StateControlPair p = extract_pair(d, sys, ControlData::zero(su.grid));
  CHECK(p.y.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.v.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.final_residual == 0.0);
}

TEST_CASE("solvers agree with a dense direct factorization") {
  const auto su = testing::make_setup(testing::unit_interval(), 12, 0, 3.0);
  const WeightedSystem sys = make_system(su);
  REQUIRE(sys.dual_size() <= 5000);
  const ControlData data = sine_data(su.grid);
  const Eigen::VectorXd rhs = assemble_rhs(sys, data);
  const Eigen::VectorXd dense = Eigen::MatrixXd(sys.A).ldlt().solve(rhs);
  for (SolverKind k : {SolverKind::SparseDirect, SolverKind::Dense, SolverKind::JacobiCG}) {
    SolverOptions opt;
    opt.kind = k;
    SolveStats stats;
    const Eigen::VectorXd w = DualSolver(sys, opt).solve(rhs, &stats);
    CHECK(testing::rel(w, dense) <= 1e-8);
    CHECK(stats.residual <= 1e-10);
  }
}

TEST_CASE("iteration cap raises SolverStagnation") {
  const auto su = testing::make_setup(testing::unit_interval(), 12, 0, 3.0);
  const WeightedSystem sys = make_system(su);
  SolverOptions opt;
  opt.kind = SolverKind::JacobiCG;
  opt.max_iter = 2;
  try {
    DualSolver(sys, opt).solve(assemble_rhs(sys, sine_data(su.grid)));
    FAIL("expected SolverStagnation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SolverStagnation);
  }
}

TEST_CASE("dual solve is linear in the data") {
  const auto su = testing::make_setup(testing::unit_interval(), 10, 0, 3.0);
  const WeightedSystem sys = make_system(su);
  const auto& g = su.grid;
  ControlData a = sine_data(g);
  ControlData b = ControlData::zero(g);
  b.u1 = sample_slice(g, [](double x, double) { return x * (1.0 - x); });
  b.B = g.make_field();
  b.B.values = testing::random_vector(b.B.values.size(), 4);
  ControlData sum = a;
  sum.u1 = a.u1 + b.u1;
  sum.B = b.B;
  const DualSolver solver(sys);
  const Eigen::VectorXd wa = solve_dual(sys, a, solver).dual;
  const Eigen::VectorXd wb = solve_dual(sys, b, solver).dual;
  const Eigen::VectorXd ws = solve_dual(sys, sum, solver).dual;
  CHECK(testing::rel(wa + wb, ws) <= 1e-9);
}

TEST_CASE("extracted pair follows the coupling formulas") {
  for (const auto& geo : {testing::unit_interval(), testing::unit_square()}) {
    const auto su = testing::make_setup(geo, 9, 0, 3.0);
    const WeightedSystem sys = make_system(su);
    const auto& g = su.grid;
    ControlData data = ControlData::zero(g);
    data.u0 = sample_slice(g, [&](double x, double y) { return std::sin(pi * x) * (g.dim() == 2 ? std::sin(pi * y) : 1.0); });
    const DualSolution d = solve_dual(sys, data);
    const StateControlPair p = extract_pair(d, sys, data);
    const ScalarField lw = apply_wave_operator(d.w, g);
    const BoundaryField tr = normal_trace(d.w, g, TraceOrder::First);
    double ey = 0.0, ny = 0.0;
    for (int n = 1; n < g.nt(); ++n) {
      for (int k : g.interior()) {
        const double r = sys.weights.rho(k, n);
        ey = std::max(ey, std::abs(p.y(k, n) - lw(k, n) / (r * r)));
        ny = std::max(ny, std::abs(p.y(k, n)));
      }
    }
    CHECK(ey <= 1e-12 * ny);
    CHECK((p.y.slice(0) - data.u0).cwiseAbs().maxCoeff() == 0.0);

    double ev = 0.0, nv = 0.0;
    const double T = g.T(), delta = su.profile.delta();
    for (int n = 0; n < g.levels(); ++n) {
      const double eta = su.profile.eta(g.time(n));
      for (int b = 0; b < g.trace_count(); ++b) {
        const auto& tp = g.trace_points()[static_cast<std::size_t>(b)];
        const double r = sys.weights.rho(tp.node, n);
        const double expected = sys.s * eta * eta * sys.cutoffs.psi[b] * tr(b, n) / (r * r);
        ev = std::max(ev, std::abs(p.v(b, n) - expected));
        nv = std::max(nv, std::abs(p.v(b, n)));
        const double t = g.time(n);
        if (t <= delta || t >= T - delta || !su.profile.in_gamma0(tp.face, tp.position)) CHECK(p.v(b, n) == 0.0);
        if (n > 0) CHECK(p.y(tp.node, n) == p.v(b, n));
      }
    }
    CHECK(nv > 0.0);
    CHECK(ev <= 1e-12 * nv);
  }
}

TEST_CASE("pair is invariant under constant rescaling of the weight") {
  const auto su = testing::make_setup(testing::unit_interval(), 16, 0, 4.0);
  const ControlData data = sine_data(su.grid);
  const WeightedSystem base = make_system(su);
  const StateControlPair ref = solve_linear(base, data, DualSolver(base));
  for (double kappa : {1e-3, 1e3}) {
    AssemblyOptions opt;
    opt.rho_scale = kappa;
    opt.epsilon = base.epsilon;
    const WeightedSystem sys = make_system(su, opt);
    const StateControlPair p = solve_linear(sys, data, DualSolver(sys));
    CHECK(testing::rel(p.y.values, ref.y.values) <= 1e-10);
    CHECK(testing::rel(p.v.values, ref.v.values) <= 1e-10);
  }
}

TEST_CASE("forward solve with the extracted control reproduces the state") {
  std::vector<double> errors;
  for (int nx : {16, 32, 64}) {
    const auto su = testing::make_setup(testing::unit_interval(), nx, 0, 4.0);
    const WeightedSystem sys = make_system(su);
    const ControlData data = sine_data(su.grid);
    const StateControlPair p = solve_linear(sys, data, DualSolver(sys));
    const ControlResidual res = verify_control(su.grid, p.v, data);
    ScalarField diff = res.trajectory.y;
    diff.values -= p.y.values;
    errors.push_back(weighted_norm(su.grid, diff, {}, NormKind::L2Q) / weighted_norm(su.grid, p.y, {}, NormKind::L2Q));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i - 1] / errors[i]) >= 1.0);
}

TEST_CASE("final residual shrinks under refinement") {
  std::vector<double> res;
  for (int nx : {16, 32, 64}) {
    const auto su = testing::make_setup(testing::unit_interval(), nx, 0, 4.0);
    const WeightedSystem sys = make_system(su);
    const StateControlPair p = solve_linear(sys, sine_data(su.grid), DualSolver(sys));
    res.push_back(p.final_residual);
  }
  CHECK(res[1] < res[0]);
  CHECK(res[2] < res[1]);
}

TEST_CASE("oversized weights raise OverflowRisk") {
  const auto su = testing::make_setup(testing::unit_interval(), 8, 0, 4.0);
  AssemblyOptions opt;
  opt.rho_scale = 1e-200;
  try {
    make_system(su, opt);
    FAIL("expected OverflowRisk");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OverflowRisk);
  }
}

TEST_CASE("Carleman quotient") {
  const auto su = testing::make_setup(testing::unit_interval(), 16, 0, 4.0);
  const WeightedSystem sys = make_system(su);
  CHECK(carleman_ratio(su.grid.make_field(), sys) == 0.0);
  for (const auto& w : random_dual_fields(su.grid, 10, 42)) {
    const double q = carleman_ratio(w, sys);
    CHECK(std::isfinite(q));
    CHECK(q > 0.0);
  }
  const ScalarField mode =
      sample_field(su.grid, [](double x, double, double t) { return std::sin(pi * x) * std::sin(pi * t); });
  const double q = carleman_ratio(mode, sys);
  CHECK(std::isfinite(q));
  CHECK(q > 0.0);
}

TEST_CASE("random dual fields are seeded and vanish on the boundary") {
  const SpaceTimeGrid g = build_grid(testing::unit_square(), {6, 6}, 12);
  const auto a = random_dual_fields(g, 3, 7);
  const auto b = random_dual_fields(g, 3, 7);
  const auto c = random_dual_fields(g, 3, 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].values.array() == b[i].values.array()).all());
    for (int n = 0; n < g.levels(); ++n) {
      for (int nd : g.boundary()) CHECK(a[i](nd, n) == 0.0);
    }
  }
  CHECK(testing::rel(a[0].values, c[0].values) > 0.0);
}

TEST_CASE("estimate report") {
  const auto su = testing::make_setup(testing::unit_interval(), 16, 0, 4.0);
  const WeightedSystem sys = make_system(su);
  const ControlData zero = ControlData::zero(su.grid);
  const auto rows0 = estimate_report(solve_linear(sys, zero, DualSolver(sys)), sys, zero, 0.0);
  for (const auto& r : rows0) {
    CHECK(r.lhs == 0.0);
    CHECK(r.ratio == 0.0);
  }
  const ControlData data = sine_data(su.grid);
  const auto rows = estimate_report(solve_linear(sys, data, DualSolver(sys)), sys, data, 0.0);
  int regular_terms = 0;
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.lhs));
    CHECK(std::isfinite(r.rhs));
    if (r.name.rfind("regular.", 0) == 0) ++regular_terms;
  }
  CHECK(regular_terms == 5);
}
