#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "wavectl/error.hpp"
#include "wavectl/linear_control.hpp"

namespace wavectl {

namespace {

double eta2psi(const WeightedSystem& sys, int row) {
  const int nb = sys.grid.trace_count();
  const double eta = sys.cutoffs.eta[row / nb];
  return eta * eta * sys.cutoffs.psi[row % nb];
}

double sigma_quadrature(const WeightedSystem& sys, int row) {
  const int nb = sys.grid.trace_count();
  return sys.grid.time_weights()[row / nb] * sys.grid.trace_points()[static_cast<std::size_t>(row % nb)].weight;
}

double dual_quadrature(const WeightedSystem& sys, int d) {
  return sys.grid.time_weights()[d / sys.grid.interior_nodes()] * sys.grid.cell_volume();
}

double rho2_dual(const WeightedSystem& sys, int d) {
  const int ni = sys.grid.interior_nodes();
  const double r = sys.rho(sys.grid.interior()[static_cast<std::size_t>(d % ni)], d / ni);
  return r * r;
}

double rho2_L(const WeightedSystem& sys, int row) {
  const int ni = sys.grid.interior_nodes();
  const double r = sys.rho(sys.grid.interior()[static_cast<std::size_t>(row % ni)], row / ni + 1);
  return r * r;
}

}  // namespace

KKTProblem build_kkt(const WeightedSystem& sys, const ControlData& data) {
  KKTProblem p;
  const int nL = static_cast<int>(sys.L.rows());
  const int nS = static_cast<int>(sys.T.rows());
  const int nD = sys.dual_size();
  const double qy = sys.grid.dt() * sys.grid.cell_volume();

  for (int row = 0; row < nS; ++row) {
    if (eta2psi(sys, row) > 0.0) p.active.push_back(row);
  }
  p.y_count = nL;
  p.slack_count = sys.epsilon > 0.0 ? nD : 0;
  const int nv = static_cast<int>(p.active.size());
  const int nx = nL + nv + p.slack_count;

  p.H.resize(nx);
  for (int r = 0; r < nL; ++r) p.H[r] = 2.0 * sys.s * qy * rho2_L(sys, r);
  for (int a = 0; a < nv; ++a) {
    const int row = p.active[static_cast<std::size_t>(a)];
    p.H[nL + a] = 2.0 * sigma_quadrature(sys, row) / (eta2psi(sys, row) * sys.form_scale * sys.rho_inv2_sigma[row]);
  }
  for (int d = 0; d < p.slack_count; ++d) {
    p.H[nL + nv + d] = 2.0 * sys.s / sys.epsilon * dual_quadrature(sys, d) * rho2_dual(sys, d);
  }

  p.C = Eigen::MatrixXd::Zero(nD, nx);
  p.C.leftCols(nL) = (qy * Eigen::MatrixXd(sys.L)).transpose();
  const Eigen::MatrixXd Td(sys.T);
  for (int a = 0; a < nv; ++a) {
    const int row = p.active[static_cast<std::size_t>(a)];
    p.C.col(nL + a) = sigma_quadrature(sys, row) * Td.row(row).transpose();
  }
  for (int d = 0; d < p.slack_count; ++d) p.C(d, nL + nv + d) = dual_quadrature(sys, d);
  p.l = assemble_rhs(sys, data);
  return p;
}

double discrete_cost(const WeightedSystem& sys, const Eigen::VectorXd& yL, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& slack) {
  const double qy = sys.grid.dt() * sys.grid.cell_volume();
  double J = 0.0;
  for (Eigen::Index r = 0; r < yL.size(); ++r) J += sys.s * qy * rho2_L(sys, static_cast<int>(r)) * yL[r] * yL[r];
  for (Eigen::Index row = 0; row < v.size(); ++row) {
    if (v[row] == 0.0) continue;
    const double cut = eta2psi(sys, static_cast<int>(row));
    if (cut == 0.0) return std::numeric_limits<double>::infinity();
    J += sigma_quadrature(sys, static_cast<int>(row)) / (cut * sys.form_scale * sys.rho_inv2_sigma[row]) * v[row] * v[row];
  }
  if (sys.epsilon > 0.0) {
    for (Eigen::Index d = 0; d < slack.size(); ++d) {
      J += sys.s / sys.epsilon * dual_quadrature(sys, static_cast<int>(d)) * rho2_dual(sys, static_cast<int>(d)) *
           slack[d] * slack[d];
    }
  }
  return J;
}

KKTResult optimality_check(const StateControlPair& pair, const WeightedSystem& sys, const ControlData& data) {
  const KKTProblem p = build_kkt(sys, data);
  const int nx = static_cast<int>(p.H.size());
  const int nc = static_cast<int>(p.C.rows());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nx + nc, nx + nc);
  K.topLeftCorner(nx, nx) = p.H.asDiagonal();
  K.topRightCorner(nx, nc) = p.C.transpose();
  K.bottomLeftCorner(nc, nx) = p.C;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nx + nc);
  rhs.tail(nc) = p.l;

  // Symmetric scaling by row maxima keeps the weight range out of the pivoting.
  Eigen::VectorXd D = K.cwiseAbs().rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < D.size(); ++i) D[i] = D[i] > 0.0 ? 1.0 / std::sqrt(D[i]) : 1.0;
  const Eigen::MatrixXd Ks = D.asDiagonal() * K * D.asDiagonal();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Ks);
  if (lu.rank() < Ks.rows()) {
    std::ostringstream msg;
    msg << "KKT matrix of size " << Ks.rows() << " has rank " << lu.rank();
    throw Error(ErrorCode::SingularKKT, msg.str());
  }
  const Eigen::VectorXd sol = D.cwiseProduct(lu.solve(D.cwiseProduct(rhs)));

  KKTResult out;
  out.x = sol.head(nx);
  const SpaceTimeGrid& g = sys.grid;
  const int ni = g.interior_nodes();
  const int nb = g.trace_count();
  out.y = g.make_field();
  out.v = g.make_boundary_field();
  for (int r = 0; r < p.y_count; ++r) out.y(g.interior()[static_cast<std::size_t>(r % ni)], r / ni + 1) = out.x[r];
  for (std::size_t a = 0; a < p.active.size(); ++a) {
    const int row = p.active[a];
    out.v(row % nb, row / nb) = out.x[p.y_count + static_cast<int>(a)];
  }
  out.cost = 0.5 * out.x.dot(p.H.cwiseProduct(out.x));

  const double qy = g.dt() * g.cell_volume();
  double diff = 0.0, ref = 0.0;
  for (int r = 0; r < p.y_count; ++r) {
    const int nd = g.interior()[static_cast<std::size_t>(r % ni)];
    const int n = r / ni + 1;
    diff += qy * std::pow(out.y(nd, n) - pair.y(nd, n), 2);
    ref += qy * std::pow(pair.y(nd, n), 2);
  }
  for (int row = 0; row < static_cast<int>(sys.T.rows()); ++row) {
    const double q = sigma_quadrature(sys, row);
    diff += q * std::pow(out.v.values[row] - pair.v.values[row], 2);
    ref += q * std::pow(pair.v.values[row], 2);
  }
  out.discrepancy = ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
  return out;
}

}  // namespace wavectl
