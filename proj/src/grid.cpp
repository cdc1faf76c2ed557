#include "wavectl/grid.hpp"

#include <cmath>
#include <numbers>

#include "wavectl/error.hpp"

namespace wavectl {

DirichletSpectrum::DirichletSpectrum(const Domain& domain, const std::array<int, 2>& interior)
    : dim_(domain.dim), n_(interior) {
  std::array<Eigen::VectorXd, 2> axis_eigen;
  for (int a = 0; a < 2; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (a >= dim_) {
      n_[ua] = 1;
      h_[ua] = 1.0;
      basis_[ua] = Eigen::MatrixXd::Ones(1, 1);
      axis_eigen[ua] = Eigen::VectorXd::Zero(1);
      continue;
    }
    const int n = n_[ua];
    const double length = domain.extent(a);
    const double h = length / (n + 1);
    h_[ua] = h;
    basis_[ua].resize(n, n);
    axis_eigen[ua].resize(n);
    const double scale = std::sqrt(2.0 / length);
    for (int k = 1; k <= n; ++k) {
      const double half_angle = k * std::numbers::pi / (2.0 * (n + 1));
      axis_eigen[ua][k - 1] = 4.0 / (h * h) * std::sin(half_angle) * std::sin(half_angle);
      for (int i = 1; i <= n; ++i) {
        basis_[ua](i - 1, k - 1) = scale * std::sin(k * i * std::numbers::pi / (n + 1));
      }
    }
  }
  eigenvalues_.resize(static_cast<Eigen::Index>(n_[0]) * n_[1]);
  for (int l = 0; l < n_[1]; ++l) {
    for (int k = 0; k < n_[0]; ++k) eigenvalues_[k + n_[0] * l] = axis_eigen[0][k] + axis_eigen[1][l];
  }
}

Eigen::VectorXd DirichletSpectrum::coefficients(const Eigen::Ref<const Eigen::VectorXd>& interior_values) const {
  const Eigen::Index n0 = n_[0], n1 = n_[1];
  if (interior_values.size() != n0 * n1) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "slice length does not match the interior node count");
  }
  Eigen::Map<const Eigen::MatrixXd> u(interior_values.data(), n0, n1);
  const double weight = h_[0] * (dim_ == 2 ? h_[1] : 1.0);
  Eigen::MatrixXd c = weight * (basis_[0].transpose() * u * basis_[1]);
  return Eigen::Map<Eigen::VectorXd>(c.data(), c.size());
}

double DirichletSpectrum::negative_norm_squared(const Eigen::Ref<const Eigen::VectorXd>& interior_values,
                                                double r) const {
  const Eigen::VectorXd c = coefficients(interior_values);
  return (eigenvalues_.array().pow(-r) * c.array().square()).sum();
}

LaplacianSolver::LaplacianSolver(const SparseMatrix& negative_laplacian)
    : factor_(std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(negative_laplacian)) {
  if (factor_->info() != Eigen::Success) {
    throw Error(ErrorCode::SolverStagnation, "Dirichlet Laplacian factorization failed");
  }
}

Eigen::VectorXd LaplacianSolver::solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  return factor_->solve(Eigen::VectorXd(rhs));
}

namespace {

Eigen::VectorXd trapezoid(int points, double spacing) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(points, spacing);
  w[0] *= 0.5;
  w[points - 1] *= 0.5;
  return w;
}

}  // namespace

SpaceTimeGrid::SpaceTimeGrid(const Domain& domain, const std::array<int, 2>& interior, int nt, double T)
    : domain_(domain), n_(interior), nt_(nt), T_(T) {
  if (domain.dim == 1) n_[1] = 1;
  for (int a = 0; a < domain.dim; ++a) {
    if (n_[static_cast<std::size_t>(a)] < 4) throw Error(ErrorCode::GridTooCoarse, "need at least 4 interior nodes per axis");
  }
  if (nt < 4) throw Error(ErrorCode::GridTooCoarse, "need at least 4 time steps");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidValue, "T must be positive");

  for (int a = 0; a < 2; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    h_[ua] = a < domain.dim ? domain.extent(a) / (n_[ua] + 1) : 1.0;
  }
  dt_ = T / nt;

  const int nx0 = nodes_along(0);
  const int nx1 = nodes_along(1);
  interior_index_.assign(static_cast<std::size_t>(spatial_nodes()), -1);
  for (int j = 0; j < nx1; ++j) {
    for (int i = 0; i < nx0; ++i) {
      const bool edge_x = i == 0 || i == nx0 - 1;
      const bool edge_y = domain.dim == 2 && (j == 0 || j == nx1 - 1);
      const int k = node(i, j);
      if (edge_x || edge_y) {
        boundary_.push_back(k);
      } else {
        interior_index_[static_cast<std::size_t>(k)] = static_cast<int>(interior_.size());
        interior_.push_back(k);
      }
    }
  }

  if (domain.dim == 1) {
    trace_.push_back({node(0), 0, node(1), node(2), h_[0], 1.0, position(node(0))});
    const int last = nx0 - 1;
    trace_.push_back({node(last), 1, node(last - 1), node(last - 2), h_[0], 1.0, position(node(last))});
  } else {
    const int li = nx0 - 1;
    const int lj = nx1 - 1;
    for (int j = 1; j < lj; ++j) {
      trace_.push_back({node(0, j), 0, node(1, j), node(2, j), h_[0], h_[1], position(node(0, j))});
    }
    for (int j = 1; j < lj; ++j) {
      trace_.push_back({node(li, j), 1, node(li - 1, j), node(li - 2, j), h_[0], h_[1], position(node(li, j))});
    }
    for (int i = 1; i < li; ++i) {
      trace_.push_back({node(i, 0), 2, node(i, 1), node(i, 2), h_[1], h_[0], position(node(i, 0))});
    }
    for (int i = 1; i < li; ++i) {
      trace_.push_back({node(i, lj), 3, node(i, lj - 1), node(i, lj - 2), h_[1], h_[0], position(node(i, lj))});
    }
  }

  const Eigen::VectorXd w0 = trapezoid(nx0, h_[0]);
  const Eigen::VectorXd w1 = domain.dim == 2 ? trapezoid(nx1, h_[1]) : Eigen::VectorXd::Ones(1);
  spatial_weights_.resize(spatial_nodes());
  for (int j = 0; j < nx1; ++j) {
    for (int i = 0; i < nx0; ++i) spatial_weights_[node(i, j)] = w0[i] * w1[j];
  }
  time_weights_ = trapezoid(levels(), dt_);

  std::vector<Eigen::Triplet<double>> triplets;
  const int ni = interior_nodes();
  for (int k = 0; k < ni; ++k) {
    const int nd = interior_[static_cast<std::size_t>(k)];
    double diag = 0.0;
    for (int a = 0; a < domain.dim; ++a) {
      const double inv_h2 = 1.0 / (h(a) * h(a));
      diag += 2.0 * inv_h2;
      const int stride = a == 0 ? 1 : nx0;
      for (int nb : {nd - stride, nd + stride}) {
        const int q = interior_index_[static_cast<std::size_t>(nb)];
        if (q >= 0) triplets.emplace_back(k, q, -inv_h2);
      }
    }
    triplets.emplace_back(k, k, diag);
  }
  auto lap = std::make_shared<SparseMatrix>(ni, ni);
  lap->setFromTriplets(triplets.begin(), triplets.end());
  negative_laplacian_ = lap;
  laplacian_solver_ = std::make_shared<const LaplacianSolver>(*lap);
  spectrum_ = std::make_shared<const DirichletSpectrum>(domain, n_);
}

double SpaceTimeGrid::cfl() const { return dt_ * std::sqrt(static_cast<double>(dim())) / h_min(); }

Eigen::Vector2d SpaceTimeGrid::position(int nd) const {
  Eigen::Vector2d x;
  x[0] = domain_.lower[0] + axis_index(nd, 0) * h_[0];
  x[1] = dim() == 2 ? domain_.lower[1] + axis_index(nd, 1) * h_[1] : 0.0;
  return x;
}

Eigen::VectorXd SpaceTimeGrid::restrict_to_interior(const Eigen::Ref<const Eigen::VectorXd>& slice) const {
  if (slice.size() != spatial_nodes()) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "slice length does not match the spatial node count");
  }
  Eigen::VectorXd out(interior_nodes());
  for (int k = 0; k < interior_nodes(); ++k) out[k] = slice[interior_[static_cast<std::size_t>(k)]];
  return out;
}

Eigen::VectorXd SpaceTimeGrid::extend_from_interior(const Eigen::Ref<const Eigen::VectorXd>& values) const {
  if (values.size() != interior_nodes()) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "interior vector length does not match the grid");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spatial_nodes());
  for (int k = 0; k < interior_nodes(); ++k) out[interior_[static_cast<std::size_t>(k)]] = values[k];
  return out;
}

SpaceTimeGrid build_grid(const GeometryConfig& cfg, const std::array<int, 2>& nx, int nt) {
  return SpaceTimeGrid(cfg.domain, nx, nt, cfg.T);
}

SpaceTimeGrid build_grid(const GeometryConfig& cfg, int nx, int nt) {
  return build_grid(cfg, std::array<int, 2>{nx, nx}, nt);
}

int auto_time_steps(const GeometryConfig& cfg, const std::array<int, 2>& nx, double cfl_target) {
  double h_min = cfg.domain.extent(0) / (nx[0] + 1);
  if (cfg.domain.dim == 2) h_min = std::min(h_min, cfg.domain.extent(1) / (nx[1] + 1));
  const double dt_max = cfl_target * h_min / std::sqrt(static_cast<double>(cfg.domain.dim));
  return std::max(4, static_cast<int>(std::ceil(cfg.T / dt_max - 1e-12)));
}

Eigen::VectorXd apply_laplacian(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.spatial_nodes());
  const int stride1 = grid.nodes_along(0);
  for (int nd : grid.interior()) {
    double acc = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const int stride = a == 0 ? 1 : stride1;
      acc += (slice[nd + stride] - 2.0 * slice[nd] + slice[nd - stride]) / (grid.h(a) * grid.h(a));
    }
    out[nd] = acc;
  }
  return out;
}

ScalarField apply_wave_operator(const ScalarField& w, const SpaceTimeGrid& grid) {
  ScalarField out = grid.make_field();
  const double inv_dt2 = 1.0 / (grid.dt() * grid.dt());
  for (int n = 1; n < grid.nt(); ++n) {
    const Eigen::VectorXd lap = apply_laplacian(grid, w.slice(n));
    for (int nd : grid.interior()) {
      out(nd, n) = (w(nd, n + 1) - 2.0 * w(nd, n) + w(nd, n - 1)) * inv_dt2 - lap[nd];
    }
  }
  return out;
}

BoundaryField normal_trace(const ScalarField& w, const SpaceTimeGrid& grid, TraceOrder order) {
  BoundaryField out = grid.make_boundary_field();
  const auto& pts = grid.trace_points();
  for (int n = 0; n < grid.levels(); ++n) {
    for (int b = 0; b < grid.trace_count(); ++b) {
      const TracePoint& p = pts[static_cast<std::size_t>(b)];
      if (order == TraceOrder::First) {
        out(b, n) = (w(p.node, n) - w(p.inward1, n)) / p.spacing;
      } else {
        out(b, n) = (3.0 * w(p.node, n) - 4.0 * w(p.inward1, n) + w(p.inward2, n)) / (2.0 * p.spacing);
      }
    }
  }
  return out;
}

}  // namespace wavectl
