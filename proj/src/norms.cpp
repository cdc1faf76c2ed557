#include "wavectl/norms.hpp"

#include <algorithm>
#include <cmath>

#include "wavectl/error.hpp"

namespace wavectl {

namespace {

void check_slice(const SpaceTimeGrid& grid, Eigen::Index size) {
  if (size != grid.spatial_nodes()) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "slice length does not match the spatial node count");
  }
}

void check_field(const SpaceTimeGrid& grid, const ScalarField& f) {
  if (f.spatial_nodes != grid.spatial_nodes() || f.levels != grid.levels()) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "field shape does not match the grid");
  }
}

double edge_energy(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& u) {
  const int n0 = grid.nodes_along(0);
  const int n1 = grid.nodes_along(1);
  double acc = 0.0;
  for (int j = 0; j < n1; ++j) {
    double wj = 1.0;
    if (grid.dim() == 2) wj = (j == 0 || j == n1 - 1) ? 0.5 * grid.h(1) : grid.h(1);
    for (int i = 0; i + 1 < n0; ++i) {
      const double g = (u[grid.node(i + 1, j)] - u[grid.node(i, j)]) / grid.h(0);
      acc += grid.h(0) * wj * g * g;
    }
  }
  if (grid.dim() == 2) {
    for (int i = 0; i < n0; ++i) {
      const double wi = (i == 0 || i == n0 - 1) ? 0.5 * grid.h(0) : grid.h(0);
      for (int j = 0; j + 1 < n1; ++j) {
        const double g = (u[grid.node(i, j + 1)] - u[grid.node(i, j)]) / grid.h(1);
        acc += grid.h(1) * wi * g * g;
      }
    }
  }
  return acc;
}

}  // namespace

double l2_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice) {
  check_slice(grid, slice.size());
  return std::sqrt((grid.spatial_weights().array() * slice.array().square()).sum());
}

double hminus1_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice) {
  const Eigen::VectorXd u = grid.restrict_to_interior(slice);
  const Eigen::VectorXd z = grid.laplacian_solver().solve(u);
  return std::sqrt(std::max(0.0, grid.cell_volume() * u.dot(z)));
}

double hminus_r_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, double r) {
  const Eigen::VectorXd u = grid.restrict_to_interior(slice);
  return std::sqrt(grid.spectrum().negative_norm_squared(u, r));
}

double h1_seminorm_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice) {
  check_slice(grid, slice.size());
  return std::sqrt(edge_energy(grid, slice));
}

double h_half_boundary(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& trace_values) {
  if (trace_values.size() != grid.trace_count()) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "trace vector length does not match the grid");
  }
  const auto& pts = grid.trace_points();
  double l2 = 0.0;
  for (int b = 0; b < grid.trace_count(); ++b) l2 += pts[static_cast<std::size_t>(b)].weight * trace_values[b] * trace_values[b];
  if (grid.dim() == 1) return std::sqrt(l2);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(grid.spatial_nodes());
  for (int b = 0; b < grid.trace_count(); ++b) g[pts[static_cast<std::size_t>(b)].node] = trace_values[b];
  // Corners take the mean of their two boundary neighbours.
  const int li = grid.nodes_along(0) - 1;
  const int lj = grid.nodes_along(1) - 1;
  g[grid.node(0, 0)] = 0.5 * (g[grid.node(1, 0)] + g[grid.node(0, 1)]);
  g[grid.node(li, 0)] = 0.5 * (g[grid.node(li - 1, 0)] + g[grid.node(li, 1)]);
  g[grid.node(0, lj)] = 0.5 * (g[grid.node(1, lj)] + g[grid.node(0, lj - 1)]);
  g[grid.node(li, lj)] = 0.5 * (g[grid.node(li - 1, lj)] + g[grid.node(li, lj - 1)]);

  const Eigen::VectorXd rhs = grid.restrict_to_interior(apply_laplacian(grid, g));
  const Eigen::VectorXd inner = grid.laplacian_solver().solve(rhs);
  const Eigen::VectorXd ext = g + grid.extend_from_interior(inner);
  return std::sqrt(l2 + edge_energy(grid, ext));
}

double slice_norm(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, NormKind kind, double r) {
  switch (kind) {
    case NormKind::L2Q: return l2_slice(grid, slice);
    case NormKind::Hminus1slice: return hminus1_slice(grid, slice);
    case NormKind::L2HminusR: return hminus_r_slice(grid, slice, r);
    case NormKind::H1slice: return h1_seminorm_slice(grid, slice);
    default: throw Error(ErrorCode::UnknownNorm, "norm kind has no single-slice meaning");
  }
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorCode::NonSquareSliceMismatch, "field sizes differ");
  ScalarField out = a;
  out.values.array() *= b.values.array();
  return out;
}

BoundaryField multiply(const BoundaryField& a, const BoundaryField& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorCode::NonSquareSliceMismatch, "boundary field sizes differ");
  BoundaryField out = a;
  out.values.array() *= b.values.array();
  return out;
}

BoundaryField restrict_to_trace(const SpaceTimeGrid& grid, const ScalarField& field) {
  check_field(grid, field);
  BoundaryField out = grid.make_boundary_field();
  const auto& pts = grid.trace_points();
  for (int n = 0; n < grid.levels(); ++n) {
    for (int b = 0; b < grid.trace_count(); ++b) out(b, n) = field(pts[static_cast<std::size_t>(b)].node, n);
  }
  return out;
}

double boundary_l2(const SpaceTimeGrid& grid, const BoundaryField& field, const BoundaryField& weight) {
  if (field.points != grid.trace_count() || field.levels != grid.levels()) {
    throw Error(ErrorCode::NonSquareSliceMismatch, "boundary field shape does not match the grid");
  }
  const BoundaryField u = weight.empty() ? field : multiply(field, weight);
  const auto& pts = grid.trace_points();
  double acc = 0.0;
  for (int n = 0; n < grid.levels(); ++n) {
    double level = 0.0;
    for (int b = 0; b < grid.trace_count(); ++b) level += pts[static_cast<std::size_t>(b)].weight * u(b, n) * u(b, n);
    acc += grid.time_weights()[n] * level;
  }
  return std::sqrt(acc);
}

double weighted_norm(const SpaceTimeGrid& grid, const ScalarField& field, const ScalarField& weight, NormKind kind,
                     double r) {
  check_field(grid, field);
  const ScalarField u = weight.empty() ? field : multiply(field, weight);
  const Eigen::VectorXd& tw = grid.time_weights();
  double acc = 0.0;
  switch (kind) {
    case NormKind::L2Q:
      for (int n = 0; n < grid.levels(); ++n) {
        acc += tw[n] * (grid.spatial_weights().array() * u.slice(n).array().square()).sum();
      }
      return std::sqrt(acc);
    case NormKind::LinfL2:
      for (int n = 0; n < grid.levels(); ++n) acc = std::max(acc, l2_slice(grid, u.slice(n)));
      return acc;
    case NormKind::L2Sigma:
      return boundary_l2(grid, restrict_to_trace(grid, u));
    case NormKind::Hminus1slice:
      for (int n = 0; n < grid.levels(); ++n) acc = std::max(acc, hminus1_slice(grid, u.slice(n)));
      return acc;
    case NormKind::L2HminusR:
      for (int n = 0; n < grid.levels(); ++n) {
        acc += tw[n] * grid.spectrum().negative_norm_squared(grid.restrict_to_interior(u.slice(n)), r);
      }
      return std::sqrt(acc);
    case NormKind::H1slice:
      for (int n = 0; n < grid.levels(); ++n) acc = std::max(acc, h1_seminorm_slice(grid, u.slice(n)));
      return acc;
  }
  throw Error(ErrorCode::UnknownNorm, "unrecognized norm kind");
}

ScalarField time_derivative(const SpaceTimeGrid& grid, const ScalarField& field) {
  check_field(grid, field);
  ScalarField out = grid.make_field();
  const double dt = grid.dt();
  const int last = grid.nt();
  out.slice(0) = (-3.0 * field.slice(0) + 4.0 * field.slice(1) - field.slice(2)) / (2.0 * dt);
  for (int n = 1; n < last; ++n) out.slice(n) = (field.slice(n + 1) - field.slice(n - 1)) / (2.0 * dt);
  out.slice(last) = (3.0 * field.slice(last) - 4.0 * field.slice(last - 1) + field.slice(last - 2)) / (2.0 * dt);
  return out;
}

double gradient_l2q(const SpaceTimeGrid& grid, const ScalarField& field) {
  check_field(grid, field);
  double acc = 0.0;
  for (int n = 0; n < grid.levels(); ++n) acc += grid.time_weights()[n] * edge_energy(grid, field.slice(n));
  return std::sqrt(acc);
}

}  // namespace wavectl
