// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "support.hpp"
#include "wavectl/error.hpp"
#include "wavectl/fixed_point.hpp"
#include "wavectl/forward_wave.hpp"
#include "wavectl/norms.hpp"

using namespace wavectl;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ControlData sine_data(const SpaceTimeGrid& g) {
  ControlData d = ControlData::zero(g);
  d.u0 = sample_slice(g, [](double x, double) { return std::sin(pi * x); });
  return d;
}

struct SemilinearRun {
  FixedPointResult fp;
  ContractionReport report;
  double linear_residual = 0.0;
};

SemilinearRun semilinear(int nx, double s, const Nonlinearity& f, ClassKind kind,
                         const std::function<ControlData(const SpaceTimeGrid&)>& make_data) {
  const auto su = testing::make_setup(testing::unit_interval(), nx, 0, s);
  const WeightedSystem sys = assemble_system(su.grid, su.model, su.profile);
  const DualSolver solver(sys);
  const ControlData data = make_data(su.grid);
  FixedPointOptions opt;
  opt.kind = kind;
  opt.max_iter = 50;
  SemilinearRun r{run_fixed_point(sys, solver, data, f, opt), {}, 0.0};
  r.report = contraction_report(r.fp.trace, f, s, sys.weights.c);
  r.linear_residual = verify_control(su.grid, solve_linear(sys, data, solver).v, data).relative;
  return r;
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> res;
  for (int nx : {64, 128}) {
    const auto su = testing::make_setup(testing::unit_interval(), nx, 0, 4.0);
    const WeightedSystem sys = assemble_system(su.grid, su.model, su.profile);
    const ControlData data = sine_data(su.grid);
    const StateControlPair p = solve_linear(sys, data, DualSolver(sys));
    res.push_back(verify_control(su.grid, p.v, data).relative);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {res[0] <= 5e-2 && res[1] <= 0.75 * res[0] && secs <= 60.0,
          fmt("residual nx=64 %.3e, nx=128 %.3e (ratio %.3f), %.1f s", res[0], res[1], res[1] / res[0], secs)};
}

Outcome criterion2() {
  const auto su = testing::make_setup(testing::unit_interval(), 12, 12, 4.0);
  const WeightedSystem sys = assemble_system(su.grid, su.model, su.profile);
  const ControlData data = sine_data(su.grid);
  const KKTResult k = optimality_check(solve_linear(sys, data, DualSolver(sys)), sys, data);
  return {k.discrepancy <= 1e-6, fmt("KKT discrepancy %.3e", k.discrepancy)};
}

Outcome criterion3() {
  const auto su = testing::make_setup(testing::unit_interval(), 64, 0, 4.0);
  const ControlData data = sine_data(su.grid);
  const WeightedSystem base = assemble_system(su.grid, su.model, su.profile);
  const StateControlPair ref = solve_linear(base, data, DualSolver(base));
  double worst = 0.0;
  for (double kappa : {1e-3, 1e3}) {
    AssemblyOptions opt;
    opt.rho_scale = kappa;
    opt.epsilon = base.epsilon;
    const WeightedSystem sys = assemble_system(su.grid, su.model, su.profile, opt);
    const StateControlPair p = solve_linear(sys, data, DualSolver(sys));
    worst = std::max({worst, testing::rel(p.y.values, ref.y.values), testing::rel(p.v.values, ref.v.values)});
  }
  return {worst <= 1e-10, fmt("max relative change %.3e", worst)};
}

Outcome criterion4() {
  std::vector<double> maxima;
  bool finite = true;
  for (double s : {2.0, 4.0, 8.0}) {
    const auto su = testing::make_setup(testing::unit_interval(), 32, 0, s);
    const WeightedSystem sys = assemble_system(su.grid, su.model, su.profile);
    double m = 0.0;
    for (const auto& w : random_dual_fields(su.grid, 100, 42)) {
      const double q = carleman_ratio(w, sys);
      finite = finite && std::isfinite(q);
      m = std::max(m, q);
    }
    maxima.push_back(m);
  }
  const auto [lo, hi] = std::minmax_element(maxima.begin(), maxima.end());
  const double spread = *hi / *lo;
  return {finite && spread < 10.0,
          fmt("max quotient s=2 %.3e, s=4 %.3e, s=8 %.3e, spread %.2f", maxima[0], maxima[1], maxima[2], spread)};
}

Outcome criterion5(const SemilinearRun& r) {
  const auto& tr = r.fp.trace;
  const int iters = static_cast<int>(tr.records.size());
  return {tr.converged && r.report.max_ratio <= 0.9 && iters <= 25 &&
              r.fp.verification.relative <= 2.0 * r.linear_residual,
          fmt("max ratio %.3e, %d iterations, residual %.3e vs linear %.3e", r.report.max_ratio, iters,
              r.fp.verification.relative, r.linear_residual)};
}

Outcome criterion6() {
  const std::vector<double> ss{2.0, 4.0, 8.0};
  std::vector<double> means;
  for (double s : ss) {
    means.push_back(
        semilinear(64, s, superlinear_nonlinearity(0.05, 1.0), ClassKind::C_s, sine_data).report.mean_ratio);
  }
  const PowerLawFit fit = fit_power_law(ss, means);
  return {means[2] < means[0] && fit.exponent >= -1.5 && fit.exponent <= -0.5,
          fmt("mean ratio s=2 %.3e, s=4 %.3e, s=8 %.3e, exponent %.3f", means[0], means[1], means[2], fit.exponent)};
}

Outcome criterion7(const SemilinearRun& r) {
  bool inside = r.fp.trace.initial.member;
  double worst = r.fp.trace.initial.margins[0];
  for (const auto& rec : r.fp.trace.records) {
    inside = inside && rec.margins.member;
    for (double m : rec.margins.margins) worst = std::min(worst, m);
  }
  const SemilinearRun t = semilinear(64, 4.0, superlinear_nonlinearity(0.05, 1.5), ClassKind::C_tilde_s,
                                     [](const SpaceTimeGrid& g) {
                                       ControlData d = sine_data(g);
                                       d.u1 = sample_slice(g, [](double x, double) { return x * (1.0 - x); });
                                       return d;
                                     });
  bool tilde = t.fp.trace.initial.member && t.fp.trace.converged;
  double worst_tilde = t.fp.trace.initial.margins[0];
  for (const auto& rec : t.fp.trace.records) {
    tilde = tilde && rec.margins.member;
    for (double m : rec.margins.margins) worst_tilde = std::min(worst_tilde, m);
  }
  return {inside && tilde, fmt("smallest margin C_s %.3e, C_tilde_s (p=1.5) %.3e", worst, worst_tilde)};
}

Outcome criterion8() {
  std::vector<double> errors;
  for (int nx : {31, 63, 127, 255}) {
    const auto geo = testing::unit_interval();
    const SpaceTimeGrid g = build_grid(geo, nx, auto_time_steps(geo, {nx, nx}, 0.5));
    ForwardProblem pb;
    pb.u0 = sample_slice(g, [](double x, double) { return std::sin(pi * x); });
    pb.u1 = Eigen::VectorXd::Zero(g.spatial_nodes());
    ScalarField err = solve_forward(g, pb).y;
    err.values -= sample_field(g, [](double x, double, double t) { return std::sin(pi * x) * std::cos(pi * t); }).values;
    errors.push_back(weighted_norm(g, err, {}, NormKind::L2Q));
  }
  bool orders_ok = true;
  std::string orders;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double o = std::log2(errors[i - 1] / errors[i]);
    orders_ok = orders_ok && std::abs(o - 2.0) <= 0.3;
    orders += fmt(" %.3f", o);
  }
  const auto geo = testing::unit_interval();
  const SpaceTimeGrid g = build_grid(geo, 64, auto_time_steps(geo, {64, 64}, 0.5));
  ForwardProblem pb;
  pb.u0 = sample_slice(g, [](double x, double) { return std::sin(pi * x) * std::exp(x); });
  pb.u1 = sample_slice(g, [](double x, double) { return x * (1.0 - x); });
  const auto e = energy_history(g, solve_forward(g, pb).y);
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  const double drift = (*hi - *lo) / e.front();
  return {orders_ok && drift <= 1e-6, fmt("orders%s, energy drift %.3e", orders.c_str(), drift)};
}

Outcome criterion9() {
  bool pass = true;
  std::string detail;
  for (double p : {0.5, 1.0, 1.5}) {
    const Nonlinearity f = superlinear_nonlinearity(0.05, p);
    std::vector<double> ratios;
    for (double s : {2.0, 4.0, 8.0}) {
      const auto su = testing::make_setup(testing::unit_interval(), 64, 0, s);
      const WeightedSystem sys = assemble_system(su.grid, su.model, su.profile);
      const DualSolver solver(sys);
      const ControlData data = sine_data(su.grid);
      const StateControlPair y1 = lambda_s(solve_linear(sys, data, solver).y, data, f, sys, solver);
      const SourceBound b = source_bound_check(su.grid, y1.y, f, s, sys.weights.c, sys.weights.rho_raw);
      pass = pass && std::isfinite(b.ratio) && b.ratio > 0.0;
      ratios.push_back(b.ratio);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    pass = pass && *hi / *lo <= 10.0;
    detail += fmt("%sp=%.1f: %.2e %.2e %.2e", detail.empty() ? "" : "; ", p, ratios[0], ratios[1], ratios[2]);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };
  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, criterion4);
  std::optional<SemilinearRun> base;
  auto baseline = [&]() -> const SemilinearRun& {
    if (!base) base = semilinear(64, 4.0, superlinear_nonlinearity(0.05, 1.0), ClassKind::C_s, sine_data);
    return *base;
  };
  report(5, [&] { return criterion5(baseline()); });
  report(6, criterion6);
  report(7, [&] { return criterion7(baseline()); });
  report(8, criterion8);
  report(9, criterion9);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
