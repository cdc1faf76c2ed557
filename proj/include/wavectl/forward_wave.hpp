#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wavectl/grid.hpp"
#include "wavectl/linear_control.hpp"

namespace wavectl {

using ScalarMap = std::function<double(double)>;

struct ForwardProblem {
  Eigen::VectorXd u0;
  Eigen::VectorXd u1;
  ScalarField B;    ///< empty means zero
  BoundaryField v;  ///< Dirichlet data on the trace points; empty means zero
  ScalarMap f;      ///< empty means linear
};

struct ForwardResult {
  ScalarField y;
  Eigen::VectorXd yT;
  Eigen::VectorXd ytT;  ///< second-order backward difference at t = T
};

/// Explicit leapfrog with Taylor start. Throws CFLViolation when dt sqrt(d)/h > 0.95 and
/// NonFiniteState at the first level whose values exceed 1e12 or are not finite.
ForwardResult solve_forward(const SpaceTimeGrid& grid, const ForwardProblem& problem);

/// One homogeneous-Dirichlet leapfrog step 2 curr - prev + dt^2 (Delta_h curr + source);
/// boundary entries of the result are zero.
Eigen::VectorXd leapfrog_step(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& prev,
                              const Eigen::Ref<const Eigen::VectorXd>& curr,
                              const Eigen::Ref<const Eigen::VectorXd>& source);

/// Conserved leapfrog energy between levels n and n+1:
/// 1/2 ||(y^{n+1} - y^n)/dt||^2 + 1/2 <-Delta_h y^{n+1}, y^n>.
double leapfrog_energy(const SpaceTimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& yn,
                       const Eigen::Ref<const Eigen::VectorXd>& yn1);
std::vector<double> energy_history(const SpaceTimeGrid& grid, const ScalarField& y);

struct ControlResidual {
  double absolute = 0.0;   ///< ||y(T) - z0||_L2 + ||y_t(T) - z1||_H-1
  double data_norm = 0.0;  ///< ||u0||_L2 + ||u1||_H-1
  double relative = 0.0;   ///< absolute / data_norm, or absolute when the data vanish
  ForwardResult trajectory;
};

ControlResidual verify_control(const SpaceTimeGrid& grid, const BoundaryField& v, const ControlData& data,
                               const ScalarMap& f = {});

}  // namespace wavectl
