#include "wavectl/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wavectl/error.hpp"

namespace wavectl {

WeightFields eval_weights(const SpaceTimeGrid& grid, const WeightModel& model) {
  WeightFields out;
  out.psi = grid.make_field();
  out.phi = grid.make_field();
  out.rho_raw = grid.make_field();
  out.rho = grid.make_field();
  out.c = model.c();
  out.phi_min = model.phi_min();

  const double s = model.s();
  const double shift = model.normalized() ? model.phi_min() : 0.0;
  double max_exponent = 0.0;
  for (int n = 0; n < grid.levels(); ++n) {
    const double t = grid.time(n);
    for (int k = 0; k < grid.spatial_nodes(); ++k) {
      const Eigen::Vector2d x = grid.position(k);
      const double ps = model.psi(x[0], x[1], t);
      if (!(ps > 0.0)) {
        std::ostringstream msg;
        msg << "psi = " << ps << " at node " << k << ", level " << n << "; increase M0";
        throw Error(ErrorCode::PsiNonPositive, msg.str());
      }
      const double ph = std::exp(model.lambda() * ps);
      out.psi(k, n) = ps;
      out.phi(k, n) = ph;
      out.rho_raw(k, n) = std::exp(-s * ph);
      out.rho(k, n) = std::exp(-s * (ph - shift));
      max_exponent = std::max(max_exponent, 2.0 * s * (ph - shift));
    }
  }
  // log(1e300) ~ 690.8
  if (max_exponent > std::log(1e300)) {
    std::ostringstream msg;
    msg << "max rho^-2 = e^" << max_exponent << " exceeds 1e300; lower s or lambda, or enable normalization";
    throw Error(ErrorCode::OverflowRisk, msg.str());
  }
  return out;
}

CutoffValues eval_cutoffs(const SpaceTimeGrid& grid, const CutoffProfile& profile) {
  CutoffValues out;
  out.eta.resize(grid.levels());
  for (int n = 0; n < grid.levels(); ++n) out.eta[n] = profile.eta(grid.time(n));
  out.psi.resize(grid.trace_count());
  const auto& pts = grid.trace_points();
  for (int b = 0; b < grid.trace_count(); ++b) {
    const TracePoint& p = pts[static_cast<std::size_t>(b)];
    out.psi[b] = profile.boundary_cutoff(p.face, p.position);
  }
  return out;
}

WeightDerivativeConstants weight_derivative_report(const WeightModel& model, const SpaceTimeGrid& grid) {
  WeightDerivativeConstants out;
  const double s = model.s();
  for (int n = 0; n < grid.levels(); ++n) {
    const double t = grid.time(n);
    for (int k = 0; k < grid.spatial_nodes(); ++k) {
      const Eigen::Vector2d x = grid.position(k);
      const auto d = model.inverse_derivatives(x[0], x[1], t);
      out.C_t = std::max(out.C_t, std::abs(d.dt) / (s * d.value));
      out.C_tt = std::max(out.C_tt, std::abs(d.dtt) / (s * s * d.value));
      out.C_grad = std::max(out.C_grad, d.grad.norm() / (s * d.value));
      out.C_lap = std::max(out.C_lap, std::abs(d.laplacian) / (s * s * d.value));
    }
  }
  return out;
}

}  // namespace wavectl
