#pragma once

#include <Eigen/Dense>

#include "wavectl/geometry.hpp"
#include "wavectl/grid.hpp"

namespace wavectl {

/// psi, phi and both weights sampled on every node.
struct WeightFields {
  ScalarField psi;
  ScalarField phi;
  ScalarField rho_raw;  ///< e^{-s phi}
  ScalarField rho;      ///< weight used by the solver (normalized unless disabled)
  double c = 0.0;
  double phi_min = 0.0;
};

/// Throws PsiNonPositive if psi <= 0 somewhere and OverflowRisk if max rho^{-2} > 1e300.
WeightFields eval_weights(const SpaceTimeGrid& grid, const WeightModel& model);

/// eta per time level and Psi per trace point.
struct CutoffValues {
  Eigen::VectorXd eta;
  Eigen::VectorXd psi;
};

CutoffValues eval_cutoffs(const SpaceTimeGrid& grid, const CutoffProfile& profile);

/// Largest observed constants C in |d_t rho^-1| <= C s rho^-1, |d_tt rho^-1| <= C s^2 rho^-1,
/// |grad rho^-1| <= C s rho^-1 and |lap rho^-1| <= C s^2 rho^-1 over the grid.
struct WeightDerivativeConstants {
  double C_t = 0.0;
  double C_tt = 0.0;
  double C_grad = 0.0;
  double C_lap = 0.0;
};

WeightDerivativeConstants weight_derivative_report(const WeightModel& model, const SpaceTimeGrid& grid);

}  // namespace wavectl
