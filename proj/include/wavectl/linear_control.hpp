#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wavectl/geometry.hpp"
#include "wavectl/grid.hpp"
#include "wavectl/weights.hpp"

namespace wavectl {

struct AssemblyOptions {
  std::optional<double> epsilon;  ///< unset selects h * dt
  TraceOrder trace_order = TraceOrder::First;
  double rho_scale = 1.0;  ///< multiplies the solver weight rho
};

/// Discrete weighted form form_scale * A with
///   A = L' diag(q rho^-2) L + s T' diag(q eta^2 Psi rho^-2) T + eps diag(q rho^-2)
/// on the dual unknowns (interior nodes x levels 0..nt, index n * Ni + k).
/// A and the coefficient vectors use the unscaled weight; a constant rescaling of rho
/// only enters through the scalar form_scale = rho_scale^-2.
/// L maps dual unknowns to the wave operator at interior nodes of levels 1..nt-1,
/// T to the outward normal derivative at every trace point and level.
struct WeightedSystem {
  SpaceTimeGrid grid;
  WeightModel model;
  WeightFields weights;
  CutoffValues cutoffs;
  double s = 0.0;
  double epsilon = 0.0;
  TraceOrder trace_order = TraceOrder::First;
  double rho_scale = 1.0;
  double form_scale = 1.0;

  SparseMatrix L;
  SparseMatrix T;
  Eigen::VectorXd qL;      ///< q rho^-2 on L-nodes
  Eigen::VectorXd qSigma;  ///< s q eta^2 Psi rho^-2 on trace nodes
  Eigen::VectorXd qEps;    ///< eps q rho^-2 on dual unknowns
  Eigen::VectorXd rho_inv2_sigma;  ///< rho^-2 on trace nodes
  SparseMatrix A;

  int dual_size() const { return static_cast<int>(A.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& w) const { return form_scale * (A * w); }
  /// Interior values of a field at every level, in dual order.
  Eigen::VectorXd to_dual(const ScalarField& field) const;
  /// Field with the given interior values and zero boundary values.
  ScalarField from_dual(const Eigen::VectorXd& w) const;
  /// Solver weight rho (after rho_scale) at a node.
  double rho(int node, int level) const { return rho_scale * weights.rho(node, level); }
};

WeightedSystem assemble_system(const SpaceTimeGrid& grid, const WeightModel& model, const CutoffProfile& profile,
                               const AssemblyOptions& options = {});

struct ControlData {
  Eigen::VectorXd u0;  ///< full spatial slice
  Eigen::VectorXd u1;
  ScalarField B;       ///< empty means zero
  Eigen::VectorXd z0;  ///< empty means zero
  Eigen::VectorXd z1;

  static ControlData zero(const SpaceTimeGrid& grid);
};

/// Right-hand side l(e_d) for every dual unknown.
Eigen::VectorXd assemble_rhs(const WeightedSystem& system, const ControlData& data);

enum class SolverKind { SparseDirect, JacobiCG, Dense };

struct SolverOptions {
  SolverKind kind = SolverKind::SparseDirect;
  double tolerance = 1e-10;
  int max_iter = 0;  ///< 0 selects 50 sqrt(n) per CG restart and 30 refinement sweeps otherwise
};

struct SolveStats {
  double residual = 0.0;  ///< ||b - A w|| / ||b||
  int iterations = 0;
  SolverKind kind = SolverKind::SparseDirect;
};

/// Factorization of the Jacobi-equilibrated system, reusable across right-hand sides.
class DualSolver {
 public:
  DualSolver(const WeightedSystem& system, const SolverOptions& options = {});
  /// Throws SolverStagnation when the tolerance is not met.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, SolveStats* stats = nullptr) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct DualSolution {
  ScalarField w;
  Eigen::VectorXd dual;
  SolveStats stats;
};

DualSolution solve_dual(const WeightedSystem& system, const ControlData& data, const SolverOptions& options = {});
DualSolution solve_dual(const WeightedSystem& system, const ControlData& data, const DualSolver& solver);

struct ReportRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double s = 0.0;
  double r = 0.0;
};

struct StateControlPair {
  ScalarField y;  ///< u0 at level 0, v on the trace points, leapfrog closure at level nt
  BoundaryField v;
  ScalarField w;
  double final_residual = 0.0;  ///< ||y(T) - z0||_L2 + ||y_t(T) - z1||_H-1
  SolveStats stats;
  std::vector<ReportRow> norm_report;
};

StateControlPair extract_pair(const DualSolution& dual, const WeightedSystem& system, const ControlData& data);

/// solve_dual followed by extract_pair.
StateControlPair solve_linear(const WeightedSystem& system, const ControlData& data, const DualSolver& solver);

/// Equality-constrained quadratic program min 1/2 x' diag(H) x subject to C x = l.
/// x stacks y on L-nodes, v on trace nodes where eta^2 Psi > 0, then the slack on dual
/// unknowns (present only when eps > 0).
struct KKTProblem {
  Eigen::VectorXd H;
  Eigen::MatrixXd C;
  Eigen::VectorXd l;
  int y_count = 0;
  std::vector<int> active;  ///< trace-node index (n * Nb + b) of each v unknown
  int slack_count = 0;
};

KKTProblem build_kkt(const WeightedSystem& system, const ControlData& data);

/// Minimizer of the discrete J_s under the discrete dynamics by a dense KKT solve.
struct KKTResult {
  ScalarField y;  ///< values on L-nodes only
  BoundaryField v;
  double cost = 0.0;
  double discrepancy = 0.0;  ///< relative L2 distance of (y, v) to the pair
  Eigen::VectorXd x;  ///< primal minimizer in KKTProblem ordering
};

KKTResult optimality_check(const StateControlPair& pair, const WeightedSystem& system, const ControlData& data);

/// Discrete J_s of (y on L-nodes, v, slack on dual unknowns); the slack term is present when eps > 0.
double discrete_cost(const WeightedSystem& system, const Eigen::VectorXd& yL, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& slack);

/// Carleman quotient LHS / RHS for a dual field vanishing on the lateral boundary.
/// Returns 0 for w == 0; throws DivisionByZero when only the right-hand side vanishes.
double carleman_ratio(const ScalarField& w, const WeightedSystem& system);

/// Seeded smooth dual fields: finite sums of sin(k pi x) modes times cos(m pi t / T) modes.
std::vector<ScalarField> random_dual_fields(const SpaceTimeGrid& grid, int count, unsigned long long seed);

/// Both weighted estimates with their individual terms, evaluated with the raw weight.
std::vector<ReportRow> estimate_report(const StateControlPair& pair, const WeightedSystem& system,
                                       const ControlData& data, double r);

}  // namespace wavectl
