#include "wavectl/forward_wave.hpp"

#include <cmath>
#include <sstream>

#include "wavectl/error.hpp"
#include "wavectl/norms.hpp"

namespace wavectl {

namespace {

constexpr double kBlowUp = 1e12;

void check_level(const Eigen::Ref<const Eigen::VectorXd>& y, int level) {
  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kBlowUp) {
    std::ostringstream msg;
    msg << "state left the finite range at time level " << level;
    throw Error(ErrorCode::NonFiniteState, msg.str());
  }
}

void apply_map(Eigen::VectorXd& out, const ScalarMap& f, const Eigen::Ref<const Eigen::VectorXd>& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = f(y[i]);
}

}  // namespace

Eigen::VectorXd leapfrog_step(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& prev,
                              const Eigen::Ref<const Eigen::VectorXd>& curr,
                              const Eigen::Ref<const Eigen::VectorXd>& source) {
  const double dt2 = grid.dt() * grid.dt();
  const Eigen::VectorXd lap = apply_laplacian(grid, curr);
  Eigen::VectorXd next = Eigen::VectorXd::Zero(grid.spatial_nodes());
  for (int nd : grid.interior()) next[nd] = 2.0 * curr[nd] - prev[nd] + dt2 * (lap[nd] + source[nd]);
  return next;
}

ForwardResult solve_forward(const SpaceTimeGrid& grid, const ForwardProblem& pb) {
  if (grid.cfl() > 0.95) {
    std::ostringstream msg;
    msg << "CFL number " << grid.cfl() << " exceeds 0.95";
    throw Error(ErrorCode::CFLViolation, msg.str());
  }
  const int np = grid.spatial_nodes();
  if (pb.u0.size() != np || pb.u1.size() != np) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "initial data must be full spatial slices");
  }
  const int nt = grid.nt();
  const double dt = grid.dt();
  const auto& pts = grid.trace_points();

  ForwardResult out;
  out.y = grid.make_field();
  Eigen::VectorXd source = Eigen::VectorXd::Zero(np);
  Eigen::VectorXd fy(np);

  auto source_at = [&](int n) {
    if (pb.B.empty()) source.setZero();
    else source = pb.B.slice(n);
    if (pb.f) {
      apply_map(fy, pb.f, out.y.slice(n));
      source -= fy;
    }
  };
  auto impose_boundary = [&](int n) {
    for (int nd : grid.boundary()) out.y(nd, n) = 0.0;
    if (pb.v.empty()) return;
    for (int b = 0; b < grid.trace_count(); ++b) out.y(pts[static_cast<std::size_t>(b)].node, n) = pb.v(b, n);
  };

  out.y.slice(0) = pb.u0;
  check_level(out.y.slice(0), 0);
  source_at(0);
  const Eigen::VectorXd lap0 = apply_laplacian(grid, pb.u0);
  for (int nd : grid.interior()) {
    out.y(nd, 1) = pb.u0[nd] + dt * pb.u1[nd] + 0.5 * dt * dt * (lap0[nd] + source[nd]);
  }
  impose_boundary(1);
  check_level(out.y.slice(1), 1);

  for (int n = 1; n < nt; ++n) {
    source_at(n);
    out.y.slice(n + 1) = leapfrog_step(grid, out.y.slice(n - 1), out.y.slice(n), source);
    impose_boundary(n + 1);
    check_level(out.y.slice(n + 1), n + 1);
  }
  out.yT = out.y.slice(nt);
  out.ytT = (3.0 * out.y.slice(nt) - 4.0 * out.y.slice(nt - 1) + out.y.slice(nt - 2)) / (2.0 * dt);
  return out;
}

double leapfrog_energy(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& yn,
                       const Eigen::Ref<const Eigen::VectorXd>& yn1) {
  const double qx = grid.cell_volume();
  const Eigen::VectorXd a = grid.restrict_to_interior(yn);
  const Eigen::VectorXd b = grid.restrict_to_interior(yn1);
  const double kinetic = qx * ((b - a) / grid.dt()).squaredNorm();
  const double potential = qx * b.dot(grid.negative_laplacian() * a);
  return 0.5 * (kinetic + potential);
}

std::vector<double> energy_history(const SpaceTimeGrid& grid, const ScalarField& y) {
  std::vector<double> out;
  for (int n = 0; n < grid.nt(); ++n) out.push_back(leapfrog_energy(grid, y.slice(n), y.slice(n + 1)));
  return out;
}

ControlResidual verify_control(const SpaceTimeGrid& grid, const BoundaryField& v, const ControlData& data,
                               const ScalarMap& f) {
  ControlResidual res;
  ForwardProblem pb{data.u0, data.u1, data.B, v, f};
  res.trajectory = solve_forward(grid, pb);
  Eigen::VectorXd yT = res.trajectory.yT;
  Eigen::VectorXd ytT = res.trajectory.ytT;
  if (data.z0.size() > 0) yT -= data.z0;
  if (data.z1.size() > 0) ytT -= data.z1;
  res.absolute = l2_slice(grid, yT) + hminus1_slice(grid, ytT);
  res.data_norm = l2_slice(grid, data.u0) + hminus1_slice(grid, data.u1);
  res.relative = res.data_norm > 0.0 ? res.absolute / res.data_norm : res.absolute;
  return res;
}

}  // namespace wavectl
