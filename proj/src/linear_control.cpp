#include "wavectl/linear_control.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "wavectl/error.hpp"
#include "wavectl/norms.hpp"

namespace wavectl {

Eigen::VectorXd WeightedSystem::to_dual(const ScalarField& field) const {
  const int ni = grid.interior_nodes();
  Eigen::VectorXd out(static_cast<Eigen::Index>(ni) * grid.levels());
  for (int n = 0; n < grid.levels(); ++n) {
    for (int k = 0; k < ni; ++k) out[n * ni + k] = field(grid.interior()[static_cast<std::size_t>(k)], n);
  }
  return out;
}

ScalarField WeightedSystem::from_dual(const Eigen::VectorXd& w) const {
  const int ni = grid.interior_nodes();
  ScalarField out = grid.make_field();
  for (int n = 0; n < grid.levels(); ++n) {
    for (int k = 0; k < ni; ++k) out(grid.interior()[static_cast<std::size_t>(k)], n) = w[n * ni + k];
  }
  return out;
}

ControlData ControlData::zero(const SpaceTimeGrid& grid) {
  ControlData d;
  d.u0 = Eigen::VectorXd::Zero(grid.spatial_nodes());
  d.u1 = Eigen::VectorXd::Zero(grid.spatial_nodes());
  return d;
}

WeightedSystem assemble_system(const SpaceTimeGrid& grid, const WeightModel& model, const CutoffProfile& profile,
                               const AssemblyOptions& options) {
  if (!(options.rho_scale > 0.0)) throw Error(ErrorCode::InvalidValue, "rho scale must be positive");
  WeightedSystem sys{
      .grid = grid,
      .model = model,
      .weights = eval_weights(grid, model),
      .cutoffs = eval_cutoffs(grid, profile),
      .s = model.s(),
      .epsilon = options.epsilon.value_or(grid.h_min() * grid.dt()),
      .trace_order = options.trace_order,
      .rho_scale = options.rho_scale,
      .form_scale = 1.0 / (options.rho_scale * options.rho_scale),
      .L = {},
      .T = {},
      .qL = {},
      .qSigma = {},
      .qEps = {},
      .rho_inv2_sigma = {},
      .A = {},
  };
  if (!(sys.epsilon >= 0.0)) throw Error(ErrorCode::InvalidValue, "epsilon must be nonnegative");
  const double max_rho_inv2 = 1.0 / std::pow(options.rho_scale * sys.weights.rho.values.minCoeff(), 2);
  if (!(max_rho_inv2 <= 1e300)) {
    throw Error(ErrorCode::OverflowRisk, "max rho^-2 exceeds 1e300; lower s or lambda, or enable normalization");
  }

  const int ni = grid.interior_nodes();
  const int nb = grid.trace_count();
  const int nt = grid.nt();
  const double dt = grid.dt();
  const double qx = grid.cell_volume();
  const double inv_dt2 = 1.0 / (dt * dt);
  auto rho_inv2 = [&](int nd, int n) {
    const double r = sys.weights.rho(nd, n);
    return 1.0 / (r * r);
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nt - 1) * ni * (3 + 2 * grid.dim()));
  sys.qL.resize(static_cast<Eigen::Index>(nt - 1) * ni);
  const int stride1 = grid.nodes_along(0);
  for (int n = 1; n < nt; ++n) {
    for (int k = 0; k < ni; ++k) {
      const int row = (n - 1) * ni + k;
      const int nd = grid.interior()[static_cast<std::size_t>(k)];
      double centre = -2.0 * inv_dt2;
      for (int a = 0; a < grid.dim(); ++a) {
        const double inv_h2 = 1.0 / (grid.h(a) * grid.h(a));
        centre += 2.0 * inv_h2;
        const int stride = a == 0 ? 1 : stride1;
        for (int nbr : {nd - stride, nd + stride}) {
          const int q = grid.interior_index(nbr);
          if (q >= 0) trip.emplace_back(row, n * ni + q, -inv_h2);
        }
      }
      trip.emplace_back(row, (n - 1) * ni + k, inv_dt2);
      trip.emplace_back(row, n * ni + k, centre);
      trip.emplace_back(row, (n + 1) * ni + k, inv_dt2);
      sys.qL[row] = dt * qx * rho_inv2(nd, n);
    }
  }
  const Eigen::Index dual = static_cast<Eigen::Index>(ni) * grid.levels();
  sys.L.resize(static_cast<Eigen::Index>(nt - 1) * ni, dual);
  sys.L.setFromTriplets(trip.begin(), trip.end());

  trip.clear();
  const auto& pts = grid.trace_points();
  sys.qSigma.resize(static_cast<Eigen::Index>(nb) * grid.levels());
  sys.rho_inv2_sigma.resize(sys.qSigma.size());
  for (int n = 0; n < grid.levels(); ++n) {
    const double eta = sys.cutoffs.eta[n];
    for (int b = 0; b < nb; ++b) {
      const TracePoint& p = pts[static_cast<std::size_t>(b)];
      const int row = n * nb + b;
      const int in1 = grid.interior_index(p.inward1);
      const int in2 = grid.interior_index(p.inward2);
      if (sys.trace_order == TraceOrder::First) {
        trip.emplace_back(row, n * ni + in1, -1.0 / p.spacing);
      } else {
        trip.emplace_back(row, n * ni + in1, -2.0 / p.spacing);
        trip.emplace_back(row, n * ni + in2, 0.5 / p.spacing);
      }
      sys.rho_inv2_sigma[row] = rho_inv2(p.node, n);
      sys.qSigma[row] = sys.s * grid.time_weights()[n] * p.weight * eta * eta * sys.cutoffs.psi[b] *
                        sys.rho_inv2_sigma[row];
    }
  }
  sys.T.resize(sys.qSigma.size(), dual);
  sys.T.setFromTriplets(trip.begin(), trip.end());

  sys.qEps.resize(dual);
  for (int n = 0; n < grid.levels(); ++n) {
    for (int k = 0; k < ni; ++k) {
      const int nd = grid.interior()[static_cast<std::size_t>(k)];
      sys.qEps[n * ni + k] = sys.epsilon * grid.time_weights()[n] * qx * rho_inv2(nd, n);
    }
  }

  SparseMatrix A = SparseMatrix(sys.L.transpose()) * sys.qL.asDiagonal() * sys.L;
  A += SparseMatrix(sys.T.transpose()) * sys.qSigma.asDiagonal() * sys.T;
  SparseMatrix E(dual, dual);
  E.setIdentity();
  E = E * sys.qEps.asDiagonal();
  A += E;
  A.makeCompressed();
  sys.A = std::move(A);
  return sys;
}

Eigen::VectorXd assemble_rhs(const WeightedSystem& system, const ControlData& data) {
  const SpaceTimeGrid& g = system.grid;
  const int ni = g.interior_nodes();
  const int nt = g.nt();
  const double dt = g.dt();
  const double qx = g.cell_volume();
  if (data.u0.size() != g.spatial_nodes() || data.u1.size() != g.spatial_nodes()) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "initial data must be full spatial slices");
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ni) * g.levels());
  const Eigen::VectorXd lap_u0 = apply_laplacian(g, data.u0);
  const bool has_B = !data.B.empty();
  const bool has_z0 = data.z0.size() > 0;
  const bool has_z1 = data.z1.size() > 0;
  const Eigen::VectorXd lap_z0 = has_z0 ? apply_laplacian(g, data.z0) : Eigen::VectorXd();

  for (int k = 0; k < ni; ++k) {
    const int nd = g.interior()[static_cast<std::size_t>(k)];
    b[k] += qx * (data.u1[nd] + data.u0[nd] / dt + 0.5 * dt * lap_u0[nd]);
    b[ni + k] -= qx * data.u0[nd] / dt;
    if (has_B) {
      for (int n = 0; n <= nt; ++n) b[n * ni + k] += g.time_weights()[n] * qx * data.B(nd, n);
    }
    if (has_z0) {
      b[nt * ni + k] += qx * (data.z0[nd] / dt + 0.5 * dt * lap_z0[nd]);
      b[(nt - 1) * ni + k] -= qx * data.z0[nd] / dt;
    }
    if (has_z1) b[nt * ni + k] -= qx * data.z1[nd];
  }
  return b;
}

struct DualSolver::Impl {
  SparseMatrix A;
  Eigen::VectorXd D;  // Jacobi equilibration
  SolverOptions options;
  double form_scale = 1.0;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> sparse;
  std::unique_ptr<Eigen::LDLT<Eigen::MatrixXd>> dense;
  std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>> cg;
  SparseMatrix scaled;

  Eigen::VectorXd direct(const Eigen::VectorXd& rhs) const {
    return sparse ? Eigen::VectorXd(sparse->solve(rhs)) : Eigen::VectorXd(dense->solve(rhs));
  }

  /// b - A x accumulated in extended precision.
  Eigen::VectorXd residual(const Eigen::VectorXd& b, const Eigen::VectorXd& x) const {
    std::vector<long double> acc(static_cast<std::size_t>(b.size()));
    for (Eigen::Index i = 0; i < b.size(); ++i) acc[static_cast<std::size_t>(i)] = b[i];
    for (Eigen::Index c = 0; c < A.outerSize(); ++c) {
      const long double xc = x[c];
      for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
        acc[static_cast<std::size_t>(it.row())] -= static_cast<long double>(it.value()) * xc;
      }
    }
    Eigen::VectorXd r(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = static_cast<double>(acc[static_cast<std::size_t>(i)]);
    return r;
  }
};

DualSolver::DualSolver(const WeightedSystem& system, const SolverOptions& options) {
  auto impl = std::make_shared<Impl>();
  impl->A = system.A;
  impl->options = options;
  impl->form_scale = system.form_scale;
  impl->D = system.A.diagonal().cwiseSqrt().cwiseInverse();
  impl->scaled = impl->D.asDiagonal() * system.A * impl->D.asDiagonal();
  switch (options.kind) {
    case SolverKind::SparseDirect:
      impl->sparse = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(impl->scaled);
      if (impl->sparse->info() != Eigen::Success) {
        throw Error(ErrorCode::SolverStagnation, "sparse LDLT factorization failed");
      }
      break;
    case SolverKind::Dense:
      impl->dense = std::make_unique<Eigen::LDLT<Eigen::MatrixXd>>(Eigen::MatrixXd(impl->scaled));
      if (impl->dense->info() != Eigen::Success) throw Error(ErrorCode::SolverStagnation, "dense LDLT failed");
      break;
    case SolverKind::JacobiCG: {
      impl->cg = std::make_unique<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>();
      impl->cg->compute(impl->scaled);
      const int cap = options.max_iter > 0 ? options.max_iter
                                           : static_cast<int>(50.0 * std::sqrt(static_cast<double>(impl->A.rows())));
      impl->cg->setMaxIterations(cap);
      impl->cg->setTolerance(options.tolerance);
      break;
    }
  }
  impl_ = std::move(impl);
}

Eigen::VectorXd DualSolver::solve(const Eigen::VectorXd& rhs, SolveStats* stats) const {
  const Impl& im = *impl_;
  SolveStats st;
  st.kind = im.options.kind;
  const double bnorm = rhs.norm();
  if (rhs.size() != im.A.rows()) throw Error(ErrorCode::NonSquareSliceMismatch, "right-hand side has wrong length");
  if (bnorm == 0.0) {
    if (stats) *stats = st;
    return Eigen::VectorXd::Zero(rhs.size());
  }
  Eigen::VectorXd x;
  if (im.cg) {
    // CG stops on the equilibrated residual; restart on the true residual until it meets the tolerance.
    x = Eigen::VectorXd::Zero(rhs.size());
    Eigen::VectorXd r = rhs;
    st.residual = 1.0;
    bool ok = true;
    for (int sweep = 0; sweep < 5 && st.residual > im.options.tolerance; ++sweep) {
      x += im.D.cwiseProduct(im.cg->solve(im.D.cwiseProduct(r)));
      st.iterations += static_cast<int>(im.cg->iterations());
      r = rhs - im.A * x;
      st.residual = r.norm() / bnorm;
      if (im.cg->info() != Eigen::Success) {
        ok = false;
        break;
      }
    }
    if (!ok || st.residual > im.options.tolerance) {
      std::ostringstream msg;
      msg << "CG stopped after " << st.iterations << " iterations at relative residual " << st.residual;
      throw Error(ErrorCode::SolverStagnation, msg.str());
    }
  } else {
    x = im.D.cwiseProduct(im.direct(im.D.cwiseProduct(rhs)));
    Eigen::VectorXd r = im.residual(rhs, x);
    st.residual = r.norm() / bnorm;
    const int cap = im.options.max_iter > 0 ? im.options.max_iter : 30;
    // Refine until the correction reaches round-off, not just until the residual meets the tolerance.
    while (st.iterations < cap) {
      const Eigen::VectorXd d = im.D.cwiseProduct(im.direct(im.D.cwiseProduct(r)));
      x += d;
      r = im.residual(rhs, x);
      st.residual = r.norm() / bnorm;
      ++st.iterations;
      if (!(d.norm() > 1e-15 * x.norm())) break;
    }
    if (st.residual > im.options.tolerance) {
      std::ostringstream msg;
      msg << "iterative refinement stalled at relative residual " << st.residual << " after " << st.iterations
          << " sweeps";
      throw Error(ErrorCode::SolverStagnation, msg.str());
    }
  }
  if (stats) *stats = st;
  return x / im.form_scale;
}

DualSolution solve_dual(const WeightedSystem& system, const ControlData& data, const DualSolver& solver) {
  DualSolution out;
  out.dual = solver.solve(assemble_rhs(system, data), &out.stats);
  out.w = system.from_dual(out.dual);
  return out;
}

DualSolution solve_dual(const WeightedSystem& system, const ControlData& data, const SolverOptions& options) {
  return solve_dual(system, data, DualSolver(system, options));
}

StateControlPair extract_pair(const DualSolution& dual, const WeightedSystem& system, const ControlData& data) {
  const SpaceTimeGrid& g = system.grid;
  const int ni = g.interior_nodes();
  const int nb = g.trace_count();
  const int nt = g.nt();
  const double dt = g.dt();

  StateControlPair pair;
  pair.w = dual.w;
  pair.stats = dual.stats;
  pair.y = g.make_field();
  pair.v = g.make_boundary_field();

  const Eigen::VectorXd ws = system.form_scale * dual.dual;
  const Eigen::VectorXd Lw = system.L * ws;
  const Eigen::VectorXd Tw = system.T * ws;
  for (int n = 1; n < nt; ++n) {
    for (int k = 0; k < ni; ++k) {
      const int nd = g.interior()[static_cast<std::size_t>(k)];
      const double r = system.weights.rho(nd, n);
      pair.y(nd, n) = Lw[(n - 1) * ni + k] / (r * r);
    }
  }
  const auto& pts = g.trace_points();
  for (int n = 0; n <= nt; ++n) {
    const double eta = system.cutoffs.eta[n];
    for (int b = 0; b < nb; ++b) {
      const double weight = system.s * eta * eta * system.cutoffs.psi[b];
      pair.v(b, n) = weight == 0.0 ? 0.0 : weight * system.rho_inv2_sigma[n * nb + b] * Tw[n * nb + b];
      if (n > 0) pair.y(pts[static_cast<std::size_t>(b)].node, n) = pair.v(b, n);
    }
  }
  pair.y.slice(0) = data.u0;

  const Eigen::VectorXd lap = apply_laplacian(g, pair.y.slice(nt - 1));
  for (int nd : g.interior()) {
    const double src = data.B.empty() ? 0.0 : data.B(nd, nt - 1);
    pair.y(nd, nt) = 2.0 * pair.y(nd, nt - 1) - pair.y(nd, nt - 2) + dt * dt * (lap[nd] + src);
  }

  Eigen::VectorXd yT = pair.y.slice(nt);
  Eigen::VectorXd ytT = (3.0 * pair.y.slice(nt) - 4.0 * pair.y.slice(nt - 1) + pair.y.slice(nt - 2)) / (2.0 * dt);
  if (data.z0.size() > 0) yT -= data.z0;
  if (data.z1.size() > 0) ytT -= data.z1;
  pair.final_residual = l2_slice(g, yT) + hminus1_slice(g, ytT);
  return pair;
}

StateControlPair solve_linear(const WeightedSystem& system, const ControlData& data, const DualSolver& solver) {
  return extract_pair(solve_dual(system, data, solver), system, data);
}

}  // namespace wavectl
