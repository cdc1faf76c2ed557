#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "wavectl/error.hpp"
#include "wavectl/linear_control.hpp"
#include "wavectl/norms.hpp"

namespace wavectl {

namespace {

// sum over grid edges of |difference / h|^2 times the edge-averaged weight and the cell measure.
double weighted_edge_energy(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& u,
                            const Eigen::Ref<const Eigen::VectorXd>& weight) {
  const int n0 = grid.nodes_along(0);
  const int n1 = grid.nodes_along(1);
  double acc = 0.0;
  for (int j = 0; j < n1; ++j) {
    double wj = 1.0;
    if (grid.dim() == 2) wj = (j == 0 || j == n1 - 1) ? 0.5 * grid.h(1) : grid.h(1);
    for (int i = 0; i + 1 < n0; ++i) {
      const int a = grid.node(i, j), b = grid.node(i + 1, j);
      const double g = (u[b] - u[a]) / grid.h(0);
      acc += grid.h(0) * wj * 0.5 * (weight[a] + weight[b]) * g * g;
    }
  }
  if (grid.dim() == 2) {
    for (int i = 0; i < n0; ++i) {
      const double wi = (i == 0 || i == n0 - 1) ? 0.5 * grid.h(0) : grid.h(0);
      for (int j = 0; j + 1 < n1; ++j) {
        const int a = grid.node(i, j), b = grid.node(i, j + 1);
        const double g = (u[b] - u[a]) / grid.h(1);
        acc += grid.h(1) * wi * 0.5 * (weight[a] + weight[b]) * g * g;
      }
    }
  }
  return acc;
}

double safe_ratio(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  if (rhs == 0.0) return std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

BoundaryField boundary_time_derivative(const SpaceTimeGrid& grid, const BoundaryField& f) {
  BoundaryField out = grid.make_boundary_field();
  const int last = grid.nt();
  const double dt = grid.dt();
  for (int b = 0; b < f.points; ++b) {
    out(b, 0) = (-3.0 * f(b, 0) + 4.0 * f(b, 1) - f(b, 2)) / (2.0 * dt);
    for (int n = 1; n < last; ++n) out(b, n) = (f(b, n + 1) - f(b, n - 1)) / (2.0 * dt);
    out(b, last) = (3.0 * f(b, last) - 4.0 * f(b, last - 1) + f(b, last - 2)) / (2.0 * dt);
  }
  return out;
}

// f / (eta Psi^1/2) where the cut-off is positive, 0 elsewhere.
BoundaryField divide_by_cutoff(const WeightedSystem& sys, const BoundaryField& f) {
  BoundaryField out = f;
  for (int n = 0; n < f.levels; ++n) {
    for (int b = 0; b < f.points; ++b) {
      const double cut = sys.cutoffs.eta[n] * std::sqrt(sys.cutoffs.psi[b]);
      out(b, n) = cut > 0.0 ? f(b, n) / cut : 0.0;
    }
  }
  return out;
}

}  // namespace

double carleman_ratio(const ScalarField& w, const WeightedSystem& sys) {
  const SpaceTimeGrid& g = sys.grid;
  const double s = sys.s;
  ScalarField rho_inv2 = g.make_field();
  for (int n = 0; n < g.levels(); ++n) {
    for (int k = 0; k < g.spatial_nodes(); ++k) rho_inv2(k, n) = 1.0 / std::pow(sys.rho(k, n), 2);
  }
  const ScalarField wt = time_derivative(g, w);
  const Eigen::VectorXd& sw = g.spatial_weights();

  auto slice_terms = [&](int n) {
    const auto r2 = rho_inv2.slice(n);
    const double kinetic = (sw.array() * r2.array() * wt.slice(n).array().square()).sum();
    const double grad = weighted_edge_energy(g, w.slice(n), r2);
    const double mass = (sw.array() * r2.array() * w.slice(n).array().square()).sum();
    return s * (kinetic + grad) + s * s * s * mass;
  };
  double lhs = 0.0;
  for (int n = 0; n < g.levels(); ++n) lhs += g.time_weights()[n] * slice_terms(n);
  lhs += slice_terms(0);

  const Eigen::VectorXd d = sys.to_dual(w);
  const Eigen::VectorXd Lw = sys.L * d;
  const Eigen::VectorXd Tw = sys.T * d;
  const double rhs = sys.form_scale * (sys.qL.dot(Lw.cwiseAbs2()) + sys.qSigma.dot(Tw.cwiseAbs2()));
  if (lhs == 0.0) return 0.0;
  if (rhs == 0.0) throw Error(ErrorCode::DivisionByZero, "Carleman right-hand side vanishes for a nonzero field");
  return lhs / rhs;
}

std::vector<ScalarField> random_dual_fields(const SpaceTimeGrid& grid, int count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> mode(1, 4);
  std::uniform_int_distribution<int> time_mode(0, 3);
  const Domain& dom = grid.domain();
  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    struct Term {
      int k, l, m;
      double a;
    };
    std::vector<Term> terms;
    for (int t = 0; t < 3; ++t) {
      const int k = mode(rng);
      const int l = grid.dim() == 2 ? mode(rng) : 0;
      const int m = time_mode(rng);
      terms.push_back({k, l, m, normal(rng) / (k * (m + 1))});
    }
    out.push_back(sample_field(grid, [&](double x1, double x2, double t) {
      double acc = 0.0;
      for (const Term& term : terms) {
        double space = std::sin(term.k * std::numbers::pi * (x1 - dom.lower[0]) / dom.extent(0));
        if (grid.dim() == 2) space *= std::sin(term.l * std::numbers::pi * (x2 - dom.lower[1]) / dom.extent(1));
        acc += term.a * space * std::cos(term.m * std::numbers::pi * t / grid.T());
      }
      return acc;
    }));
    // Exact zeros on the lateral boundary.
    for (int n = 0; n < grid.levels(); ++n) {
      for (int nd : grid.boundary()) out.back()(nd, n) = 0.0;
    }
  }
  return out;
}

std::vector<ReportRow> estimate_report(const StateControlPair& pair, const WeightedSystem& sys,
                                       const ControlData& data, double r) {
  const SpaceTimeGrid& g = sys.grid;
  const double s = sys.s;
  const ScalarField& rho = sys.weights.rho_raw;
  const ScalarField rho_y = multiply(rho, pair.y);
  const ScalarField rho_y_t = time_derivative(g, rho_y);
  const BoundaryField rho_sigma = restrict_to_trace(g, rho);
  const BoundaryField rho_v = multiply(rho_sigma, pair.v);
  const BoundaryField rho_v_t = boundary_time_derivative(g, rho_v);

  const Eigen::VectorXd rho0 = rho.slice(0);
  const Eigen::VectorXd rho0_u0 = rho0.cwiseProduct(data.u0);
  const Eigen::VectorXd rho0_u1 = rho0.cwiseProduct(data.u1);
  const ScalarField rho_B = data.B.empty() ? g.make_field() : multiply(rho, data.B);

  std::vector<ReportRow> rows;
  auto add = [&](const std::string& name, double lhs, double rhs, double rr) {
    rows.push_back({name, lhs, rhs, safe_ratio(lhs, rhs), s, rr});
  };

  // Control and trajectory in L2 x L2(Sigma), fractional source.
  {
    const double t1 = weighted_norm(g, rho_y, {}, NormKind::L2Q);
    const double t2 = std::pow(s, -0.5) * boundary_l2(g, divide_by_cutoff(sys, rho_v));
    const double t3 = std::pow(s, -2.0) * weighted_norm(g, rho_y, {}, NormKind::LinfL2);
    const double t4 = std::pow(s, -2.0) * weighted_norm(g, rho_y_t, {}, NormKind::Hminus1slice);
    const double rhs = std::pow(s, r - 1.5) * weighted_norm(g, rho_B, {}, NormKind::L2HminusR, r) +
                       std::pow(s, -0.5) * (l2_slice(g, rho0_u0) + hminus1_slice(g, rho0_u1));
    add("frac", t1 + t2 + t3 + t4, rhs, r);
    add("frac.rho_y_L2Q", t1, rhs, r);
    add("frac.rho_v_L2Sigma", t2, rhs, r);
    add("frac.rho_y_LinfL2", t3, rhs, r);
    add("frac.rho_y_t_LinfHm1", t4, rhs, r);
  }
  // Regular estimate with H1 x L2 data and L2 source.
  {
    const double a1 = weighted_norm(g, rho_y_t, {}, NormKind::L2Q);
    const double a2 = std::pow(s, -0.5) * boundary_l2(g, divide_by_cutoff(sys, rho_v_t));
    const double a3 = gradient_l2q(g, rho_y) / s;
    double half = 0.0, h1 = 0.0;
    for (int n = 0; n < g.levels(); ++n) {
      half = std::max(half, h_half_boundary(g, rho_v.values.segment(static_cast<Eigen::Index>(n) * rho_v.points,
                                                                  rho_v.points)));
      h1 = std::max(h1, std::hypot(l2_slice(g, rho_y.slice(n)), h1_seminorm_slice(g, rho_y.slice(n))));
    }
    const double a4 = std::pow(s, -1.5) * half;
    const double a5 = std::pow(s, -2.0) * (h1 + weighted_norm(g, rho_y_t, {}, NormKind::LinfL2));
    const double rhs = std::pow(s, -0.5) * (weighted_norm(g, rho_B, {}, NormKind::L2Q) + l2_slice(g, rho0_u1) +
                                            s * l2_slice(g, rho0_u0) + h1_seminorm_slice(g, rho0_u0));
    add("regular", a1 + a2 + a3 + a4 + a5, rhs, 0.0);
    add("regular.rho_y_t_L2Q", a1, rhs, 0.0);
    add("regular.rho_v_t_L2Sigma", a2, rhs, 0.0);
    add("regular.grad_rho_y_L2Q", a3, rhs, 0.0);
    add("regular.rho_v_LinfH12", a4, rhs, 0.0);
    add("regular.rho_y_LinfH1", a5, rhs, 0.0);
  }
  return rows;
}

}  // namespace wavectl
