#include "wavectl/fixed_point.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "wavectl/error.hpp"
#include "wavectl/norms.hpp"

namespace wavectl {

ClassCheck check_class(const SpaceTimeGrid& grid, const ScalarField& y, const ScalarField& rho_raw, ClassKind kind,
                       double s) {
  ClassCheck c;
  c.kind = kind;
  c.s = s;
  const ScalarField rho_y = multiply(rho_raw, y);
  c.names.push_back("rho_y_L2Q");
  c.values.push_back(weighted_norm(grid, rho_y, {}, NormKind::L2Q));
  c.thresholds.push_back(s);
  if (kind == ClassKind::C_s) {
    c.names.push_back("rho_y_LinfL2");
    c.values.push_back(weighted_norm(grid, rho_y, {}, NormKind::LinfL2));
    c.thresholds.push_back(s * s * s);
  } else {
    c.names.push_back("rho_y_t_L2Q");
    c.values.push_back(weighted_norm(grid, time_derivative(grid, rho_y), {}, NormKind::L2Q));
    c.thresholds.push_back(s * s);
    c.names.push_back("grad_rho_y_L2Q");
    c.values.push_back(gradient_l2q(grid, rho_y));
    c.thresholds.push_back(s * s * s);
  }
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    c.margins.push_back(c.thresholds[i] - c.values[i]);
    if (!(c.margins.back() > 0.0)) c.member = false;
  }
  return c;
}

double weighted_distance(const SpaceTimeGrid& grid, const ScalarField& y, const ScalarField& z,
                         const ScalarField& rho_raw) {
  ScalarField diff = y;
  diff.values -= z.values;
  return weighted_norm(grid, diff, rho_raw, NormKind::L2Q);
}

ScalarField evaluate_nonlinearity(const Nonlinearity& f, const ScalarField& y) {
  ScalarField out = y;
  out.values = y.values.unaryExpr([&](double r) { return f(r); });
  return out;
}

StateControlPair lambda_s(const ScalarField& y_hat, const ControlData& data, const Nonlinearity& f,
                          const WeightedSystem& system, const DualSolver& solver) {
  ControlData lin = data;
  ScalarField fy = evaluate_nonlinearity(f, y_hat);
  if (lin.B.empty()) {
    fy.values = -fy.values;
    lin.B = std::move(fy);
  } else {
    lin.B.values -= fy.values;
  }
  return solve_linear(system, lin, solver);
}

FixedPointResult run_fixed_point(const WeightedSystem& system, const DualSolver& solver, const ControlData& data,
                                 const Nonlinearity& f, const FixedPointOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidValue, "tol must be positive");
  const SpaceTimeGrid& g = system.grid;
  const ScalarField& rho = system.weights.rho_raw;
  const double s = system.s;
  const BoundaryField rho_sigma = restrict_to_trace(g, rho);
  auto verify = [&](const BoundaryField& v) {
    try {
      return verify_control(g, v, data, f.f);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteState) throw;
      ControlResidual blown;
      blown.absolute = blown.relative = std::numeric_limits<double>::infinity();
      return blown;
    }
  };

  FixedPointResult out;
  IterationTrace& trace = out.trace;
  StateControlPair prev = options.y0 ? StateControlPair{} : solve_linear(system, data, solver);
  if (options.y0) {
    prev.y = *options.y0;
    prev.v = g.make_boundary_field();
  }
  trace.initial = check_class(g, prev.y, rho, options.kind, s);
  if (!trace.initial.member) trace.class_escape = true;

  int increases = 0;
  for (int k = 1; k <= options.max_iter; ++k) {
    StateControlPair next = lambda_s(prev.y, data, f, system, solver);
    IterationRecord rec;
    rec.k = k;
    rec.d = weighted_distance(g, next.y, prev.y, rho);
    BoundaryField dv = next.v;
    dv.values -= prev.v.values;
    rec.d_boundary = boundary_l2(g, dv, rho_sigma);
    if (trace.records.empty()) {
      rec.ratio = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double last = trace.records.back().d;
      rec.ratio = last > 0.0 ? rec.d / last : 0.0;
      increases = rec.d > last ? increases + 1 : 0;
    }
    rec.margins = check_class(g, next.y, rho, options.kind, s);
    if (!rec.margins.member) trace.class_escape = true;
    if (options.verify_iterates) rec.forward_residual = verify(next.v).relative;
    trace.records.push_back(rec);
    prev = std::move(next);

    const double scale = weighted_norm(g, prev.y, rho, NormKind::L2Q);
    if (rec.d <= options.tol * scale || rec.d == 0.0) {
      trace.converged = true;
      trace.termination = "converged";
      break;
    }
    if (increases >= 3) {
      trace.diverged = true;
      trace.termination = "diverged";
      break;
    }
  }
  if (trace.termination.empty()) trace.termination = "max_iter";
  out.pair = std::move(prev);
  out.verification = verify(out.pair.v);
  return out;
}

ContractionReport contraction_report(const IterationTrace& trace, const Nonlinearity& f, double s, double c) {
  ContractionReport rep;
  for (const auto& r : trace.records) {
    if (std::isfinite(r.ratio)) rep.ratios.push_back(r.ratio);
  }
  if (!rep.ratios.empty()) {
    rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.mean_ratio = std::accumulate(rep.ratios.begin(), rep.ratios.end(), 0.0) / rep.ratios.size();
  }
  const double p = f.hp.p;
  rep.predicted_shape = std::pow(s, -p) * f.hp.alpha + f.hp.beta_star * std::pow(c, p);
  rep.C_emp = rep.predicted_shape > 0.0 ? rep.max_ratio / rep.predicted_shape : 0.0;
  return rep;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidValue, "power-law fit needs 2+ points");
  Eigen::MatrixXd M(x.size(), 2);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw Error(ErrorCode::InvalidValue, "power-law fit needs positive data");
    M(static_cast<Eigen::Index>(i), 0) = std::log(x[i]);
    M(static_cast<Eigen::Index>(i), 1) = 1.0;
    b[static_cast<Eigen::Index>(i)] = std::log(y[i]);
  }
  const Eigen::Vector2d sol = M.colPivHouseholderQr().solve(b);
  return {sol[0], sol[1]};
}

SourceBound source_bound_check(const SpaceTimeGrid& grid, const ScalarField& y_hat, const Nonlinearity& f, double s,
                               double c, const ScalarField& rho_raw) {
  SourceBound out;
  const double p = f.h.p;
  const ScalarField fy = evaluate_nonlinearity(f, y_hat);
  if (p >= 1.5) {
    out.lhs = weighted_norm(grid, fy, rho_raw, NormKind::L2Q);
  } else {
    out.lhs = weighted_norm(grid, fy, rho_raw, NormKind::L2HminusR, 1.5 - p);
  }
  out.rhs = f.h.alpha1 * std::exp(-s) * std::sqrt(grid.T() * grid.domain().measure()) + f.h.alpha2 * s +
            f.h.beta_star * std::pow(c, p) * std::pow(s, 1.0 + p);
  if (out.lhs == 0.0) out.ratio = 0.0;
  else out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace wavectl
