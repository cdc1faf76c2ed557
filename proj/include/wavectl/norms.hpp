#pragma once

#include <Eigen/Dense>

#include "wavectl/grid.hpp"

namespace wavectl {

enum class NormKind { L2Q, LinfL2, L2Sigma, Hminus1slice, L2HminusR, H1slice };

/// Slice norms. Boundary entries are ignored by the negative norms.
double l2_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice);
double hminus1_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice);
double hminus_r_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, double r);
/// L2 norm of the forward-difference gradient over all grid edges.
double h1_seminorm_slice(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice);
/// L2(dOmega) norm plus the Dirichlet energy of the discrete harmonic extension.
double h_half_boundary(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& trace_values);

/// Norm of one spatial slice. LinfL2 and L2Sigma have no slice meaning and throw UnknownNorm;
/// H1slice is the gradient seminorm.
double slice_norm(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, NormKind kind,
                  double r = 0.0);

/// Space-time norm of weight * field (an empty weight means 1):
///   L2Q          L2(Q)
///   LinfL2       max_n ||u^n||_L2
///   L2Sigma      L2 over the trace points
///   Hminus1slice max_n ||u^n||_{H^-1}
///   L2HminusR    L2(0,T; H^{-r})
///   H1slice      max_n ||grad u^n||_L2
double weighted_norm(const SpaceTimeGrid& grid, const ScalarField& field, const ScalarField& weight, NormKind kind,
                     double r = 0.0);

/// L2(Sigma) norm of a boundary field, optionally multiplied pointwise by `weight`.
double boundary_l2(const SpaceTimeGrid& grid, const BoundaryField& field, const BoundaryField& weight = {});

/// Pointwise product.
ScalarField multiply(const ScalarField& a, const ScalarField& b);
BoundaryField multiply(const BoundaryField& a, const BoundaryField& b);
/// Values of a space-time field at the trace points.
BoundaryField restrict_to_trace(const SpaceTimeGrid& grid, const ScalarField& field);

/// Central differences in time, second-order one-sided on the first and last slices.
ScalarField time_derivative(const SpaceTimeGrid& grid, const ScalarField& field);
/// L2(Q) norm of the spatial gradient.
double gradient_l2q(const SpaceTimeGrid& grid, const ScalarField& field);

}  // namespace wavectl
