#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wavectl/forward_wave.hpp"
#include "wavectl/linear_control.hpp"
#include "wavectl/nonlinearity.hpp"

namespace wavectl {

enum class ClassKind { C_s, C_tilde_s };

/// Threshold norms with margins threshold - value.
///   C_s:       ||rho y||_L2(Q) <= s, ||rho y||_Linf(L2) <= s^3
///   C_tilde_s: ||rho y||_L2(Q) <= s, ||(rho y)_t||_L2(Q) <= s^2, ||grad(rho y)||_L2(Q) <= s^3
struct ClassCheck {
  ClassKind kind = ClassKind::C_s;
  double s = 0.0;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> thresholds;
  std::vector<double> margins;
  bool member = true;
};

/// `rho_raw` is the unnormalized weight e^{-s phi}.
ClassCheck check_class(const SpaceTimeGrid& grid, const ScalarField& y, const ScalarField& rho_raw, ClassKind kind,
                       double s);

/// ||rho (y - z)||_L2(Q)
double weighted_distance(const SpaceTimeGrid& grid, const ScalarField& y, const ScalarField& z,
                         const ScalarField& rho_raw);

/// f applied at every node.
ScalarField evaluate_nonlinearity(const Nonlinearity& f, const ScalarField& y);

/// Linear solve with source B - f(y_hat).
StateControlPair lambda_s(const ScalarField& y_hat, const ControlData& data, const Nonlinearity& f,
                          const WeightedSystem& system, const DualSolver& solver);

struct IterationRecord {
  int k = 0;
  double d = 0.0;
  double d_boundary = 0.0;
  double ratio = 0.0;  ///< d_k / d_{k-1}; NaN for k = 1
  ClassCheck margins;
  double forward_residual = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  ClassCheck initial;  ///< class check of y_0
  bool converged = false;
  bool diverged = false;
  bool class_escape = false;
  std::string termination;  ///< converged, diverged or max_iter
};

struct FixedPointOptions {
  double tol = 1e-8;  ///< relative to ||rho y_k||_L2(Q)
  int max_iter = 50;
  ClassKind kind = ClassKind::C_s;
  bool verify_iterates = true;
  std::optional<ScalarField> y0;  ///< unset selects Lambda_s(0)
};

struct FixedPointResult {
  StateControlPair pair;
  IterationTrace trace;
  ControlResidual verification;  ///< forward solve with the final control; infinite residual on blow-up
};

/// Picard iteration y_{k+1} = Lambda_s(y_k). Divergence (3 consecutive increases of d_k) and
/// class escape are flagged in the trace rather than thrown.
FixedPointResult run_fixed_point(const WeightedSystem& system, const DualSolver& solver, const ControlData& data,
                                 const Nonlinearity& f, const FixedPointOptions& options = {});

struct ContractionReport {
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double predicted_shape = 0.0;  ///< s^-p alpha + beta_star c^p
  double C_emp = 0.0;            ///< max_ratio / predicted_shape
};

ContractionReport contraction_report(const IterationTrace& trace, const Nonlinearity& f, double s, double c);

/// Least-squares slope and intercept of log y against log x.
struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
};

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct SourceBound {
  double lhs = 0.0;  ///< ||rho f(y_hat)||_L2(H^{p-3/2}), plain L2(Q) for p = 3/2
  double rhs = 0.0;  ///< alpha1 e^-s sqrt(T |Omega|) + alpha2 s + beta_star c^p s^{1+p}
  double ratio = 0.0;
};

SourceBound source_bound_check(const SpaceTimeGrid& grid, const ScalarField& y_hat, const Nonlinearity& f, double s,
                               double c, const ScalarField& rho_raw);

}  // namespace wavectl
