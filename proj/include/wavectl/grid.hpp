#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wavectl/geometry.hpp"

namespace wavectl {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Grid function on every space-time node, stored level by level:
/// values[level * spatial_nodes + node].
struct ScalarField {
  Eigen::VectorXd values;
  int spatial_nodes = 0;
  int levels = 0;

  ScalarField() = default;
  ScalarField(int spatial, int time_levels, double fill = 0.0)
      : values(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(spatial) * time_levels, fill)),
        spatial_nodes(spatial),
        levels(time_levels) {}

  bool empty() const { return values.size() == 0; }
  double& operator()(int node, int level) { return values[index(node, level)]; }
  double operator()(int node, int level) const { return values[index(node, level)]; }
  Eigen::VectorXd::SegmentReturnType slice(int level) {
    return values.segment(static_cast<Eigen::Index>(level) * spatial_nodes, spatial_nodes);
  }
  Eigen::VectorXd::ConstSegmentReturnType slice(int level) const {
    return values.segment(static_cast<Eigen::Index>(level) * spatial_nodes, spatial_nodes);
  }
  bool all_finite() const { return values.allFinite(); }

 private:
  Eigen::Index index(int node, int level) const {
    return static_cast<Eigen::Index>(level) * spatial_nodes + node;
  }
};

/// Grid function on the lateral boundary trace points, level by level.
struct BoundaryField {
  Eigen::VectorXd values;
  int points = 0;
  int levels = 0;

  BoundaryField() = default;
  BoundaryField(int trace_points, int time_levels, double fill = 0.0)
      : values(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(trace_points) * time_levels, fill)),
        points(trace_points),
        levels(time_levels) {}

  bool empty() const { return values.size() == 0; }
  double& operator()(int point, int level) { return values[static_cast<Eigen::Index>(level) * points + point]; }
  double operator()(int point, int level) const {
    return values[static_cast<Eigen::Index>(level) * points + point];
  }
};

/// Boundary node where the outward normal derivative is taken. Corners are
/// excluded: they do not couple to the five-point Laplacian.
struct TracePoint {
  int node = 0;
  int face = 0;
  int inward1 = 0;  ///< neighbour one spacing inside
  int inward2 = 0;  ///< neighbour two spacings inside
  double spacing = 0.0;  ///< normal spacing
  double weight = 0.0;   ///< boundary quadrature weight
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
};

/// Eigenpairs of the Dirichlet Laplacian -Delta_h on the interior nodes,
/// orthonormal for the discrete inner product sum_i h u_i v_i.
class DirichletSpectrum {
 public:
  DirichletSpectrum(const Domain& domain, const std::array<int, 2>& interior);

  /// Spectral coefficients of an interior vector (length = interior node count).
  Eigen::VectorXd coefficients(const Eigen::Ref<const Eigen::VectorXd>& interior_values) const;
  /// Eigenvalues in the ordering of `coefficients`.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double smallest_eigenvalue() const { return eigenvalues_.minCoeff(); }

  /// sum_k lambda_k^{-r} |c_k|^2, the squared discrete H^{-r} norm.
  double negative_norm_squared(const Eigen::Ref<const Eigen::VectorXd>& interior_values, double r) const;

 private:
  int dim_ = 1;
  std::array<int, 2> n_{};
  std::array<double, 2> h_{};
  std::array<Eigen::MatrixXd, 2> basis_;  // basis_[a](i, k)
  Eigen::VectorXd eigenvalues_;
};

/// Sparse factorization of the Dirichlet Laplacian used for H^{-1} slice norms.
class LaplacianSolver {
 public:
  explicit LaplacianSolver(const SparseMatrix& negative_laplacian);
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;

 private:
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factor_;
};

/// Uniform tensor grid over Omega x [0,T] including boundary nodes and both end slices.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(const Domain& domain, const std::array<int, 2>& interior, int nt, double T);

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  int interior_count(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  int nodes_along(int axis) const { return axis < dim() ? n_[static_cast<std::size_t>(axis)] + 2 : 1; }
  int spatial_nodes() const { return nodes_along(0) * nodes_along(1); }
  int nt() const { return nt_; }
  int levels() const { return nt_ + 1; }
  int node_count() const { return spatial_nodes() * levels(); }
  double h(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  double h_min() const { return dim() == 1 ? h_[0] : std::min(h_[0], h_[1]); }
  double dt() const { return dt_; }
  double T() const { return T_; }
  /// dt sqrt(d) / h_min.
  double cfl() const;

  int node(int i, int j = 0) const { return i + nodes_along(0) * j; }
  int axis_index(int node, int axis) const { return axis == 0 ? node % nodes_along(0) : node / nodes_along(0); }
  Eigen::Vector2d position(int node) const;
  double time(int level) const { return level * dt_; }

  const std::vector<int>& interior() const { return interior_; }
  int interior_nodes() const { return static_cast<int>(interior_.size()); }
  /// Interior index of a spatial node, -1 on the boundary.
  int interior_index(int node) const { return interior_index_[static_cast<std::size_t>(node)]; }
  /// Every lateral boundary node, corners included once.
  const std::vector<int>& boundary() const { return boundary_; }
  const std::vector<TracePoint>& trace_points() const { return trace_; }
  int trace_count() const { return static_cast<int>(trace_.size()); }

  /// Trapezoidal weights over all spatial nodes.
  const Eigen::VectorXd& spatial_weights() const { return spatial_weights_; }
  /// Quadrature weight of one interior node (h, or h1 h2).
  double cell_volume() const { return dim() == 1 ? h_[0] : h_[0] * h_[1]; }
  /// Trapezoidal weights over the time levels.
  const Eigen::VectorXd& time_weights() const { return time_weights_; }

  const DirichletSpectrum& spectrum() const { return *spectrum_; }
  const LaplacianSolver& laplacian_solver() const { return *laplacian_solver_; }
  /// -Delta_h on interior nodes with homogeneous Dirichlet values.
  const SparseMatrix& negative_laplacian() const { return *negative_laplacian_; }

  ScalarField make_field(double fill = 0.0) const { return ScalarField(spatial_nodes(), levels(), fill); }
  BoundaryField make_boundary_field(double fill = 0.0) const { return BoundaryField(trace_count(), levels(), fill); }

  /// Interior entries of a spatial slice, in interior order.
  Eigen::VectorXd restrict_to_interior(const Eigen::Ref<const Eigen::VectorXd>& slice) const;
  /// Spatial slice with the given interior values and zero boundary values.
  Eigen::VectorXd extend_from_interior(const Eigen::Ref<const Eigen::VectorXd>& interior_values) const;

 private:
  Domain domain_;
  std::array<int, 2> n_{};
  std::array<double, 2> h_{};
  int nt_ = 0;
  double dt_ = 0.0;
  double T_ = 0.0;
  std::vector<int> interior_;
  std::vector<int> interior_index_;
  std::vector<int> boundary_;
  std::vector<TracePoint> trace_;
  Eigen::VectorXd spatial_weights_;
  Eigen::VectorXd time_weights_;
  std::shared_ptr<const DirichletSpectrum> spectrum_;
  std::shared_ptr<const SparseMatrix> negative_laplacian_;
  std::shared_ptr<const LaplacianSolver> laplacian_solver_;
};

/// Throws GridTooCoarse when any count is below 4. In 1D `nx[1]` is ignored.
SpaceTimeGrid build_grid(const GeometryConfig& cfg, const std::array<int, 2>& nx, int nt);
SpaceTimeGrid build_grid(const GeometryConfig& cfg, int nx, int nt);

/// Smallest nt with dt sqrt(d) / h_min <= cfl_target.
int auto_time_steps(const GeometryConfig& cfg, const std::array<int, 2>& nx, double cfl_target = 0.9);

/// Delta_h of a full spatial slice at interior nodes (boundary entries of the result are 0).
Eigen::VectorXd apply_laplacian(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice);

/// (L_h w) = D_tt w - Delta_h w at interior nodes for levels 1..nt-1; zero elsewhere.
ScalarField apply_wave_operator(const ScalarField& w, const SpaceTimeGrid& grid);

enum class TraceOrder { First = 1, Second = 2 };

/// One-sided outward normal derivative at every trace point and level.
BoundaryField normal_trace(const ScalarField& w, const SpaceTimeGrid& grid, TraceOrder order = TraceOrder::Second);

/// Samples a function f(x1, x2, t) on every node.
template <typename Fn>
ScalarField sample_field(const SpaceTimeGrid& grid, Fn&& fn) {
  ScalarField out = grid.make_field();
  for (int n = 0; n < grid.levels(); ++n) {
    const double t = grid.time(n);
    for (int k = 0; k < grid.spatial_nodes(); ++k) {
      const Eigen::Vector2d x = grid.position(k);
      out(k, n) = fn(x[0], x[1], t);
    }
  }
  return out;
}

/// Samples a function f(x1, x2) on one spatial slice.
template <typename Fn>
Eigen::VectorXd sample_slice(const SpaceTimeGrid& grid, Fn&& fn) {
  Eigen::VectorXd out(grid.spatial_nodes());
  for (int k = 0; k < grid.spatial_nodes(); ++k) {
    const Eigen::Vector2d x = grid.position(k);
    out[k] = fn(x[0], x[1]);
  }
  return out;
}

}  // namespace wavectl
