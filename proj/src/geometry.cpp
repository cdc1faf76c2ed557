#include "wavectl/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "wavectl/error.hpp"

namespace wavectl {

Domain Domain::interval(double a, double b) {
  if (!(b > a)) throw Error(ErrorCode::InvalidValue, "interval requires a < b");
  Domain d;
  d.dim = 1;
  d.lower = {a, 0.0};
  d.upper = {b, 0.0};
  return d;
}

Domain Domain::rectangle(double a1, double b1, double a2, double b2) {
  if (!(b1 > a1) || !(b2 > a2)) throw Error(ErrorCode::InvalidValue, "rectangle requires a < b per axis");
  Domain d;
  d.dim = 2;
  d.lower = {a1, a2};
  d.upper = {b1, b2};
  return d;
}

double Domain::measure() const {
  return dim == 1 ? extent(0) : extent(0) * extent(1);
}

Eigen::Vector2d face_normal(int face) {
  switch (face) {
    case 0: return {-1.0, 0.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, -1.0};
    case 3: return {0.0, 1.0};
    default: throw Error(ErrorCode::InvalidValue, "face index out of range");
  }
}

double min_distance_to(const Domain& domain, const Eigen::Vector2d& x0) {
  double r2 = 0.0;
  for (int a = 0; a < domain.dim; ++a) {
    const double p = std::clamp(x0[a], domain.lower[a], domain.upper[a]);
    r2 += (p - x0[a]) * (p - x0[a]);
  }
  return std::sqrt(r2);
}

double max_distance_to(const Domain& domain, const Eigen::Vector2d& x0) {
  double r2 = 0.0;
  for (int a = 0; a < domain.dim; ++a) {
    const double far = std::max(std::abs(domain.lower[a] - x0[a]), std::abs(domain.upper[a] - x0[a]));
    r2 += far * far;
  }
  return std::sqrt(r2);
}

namespace {

bool inside_closure(const Domain& domain, const Eigen::Vector2d& x0) {
  for (int a = 0; a < domain.dim; ++a) {
    if (x0[a] < domain.lower[a] || x0[a] > domain.upper[a]) return false;
  }
  return true;
}

// Constant value of (x - x0).nu on a face.
double face_multiplier(const Domain& domain, const Eigen::Vector2d& x0, int face) {
  const int axis = face / 2;
  const bool upper = face % 2 == 1;
  const double coord = upper ? domain.upper[axis] : domain.lower[axis];
  return upper ? coord - x0[axis] : -(coord - x0[axis]);
}

}  // namespace

BoundaryPartition validate_geometry(const GeometryConfig& cfg) {
  const Domain& dom = cfg.domain;
  if (!(cfg.delta > 0.0)) throw Error(ErrorCode::BadDelta, "delta must be positive");
  if (!(2.0 * cfg.delta < cfg.T)) throw Error(ErrorCode::BadDelta, "2 delta must be smaller than T");
  if (inside_closure(dom, cfg.x0)) {
    throw Error(ErrorCode::X0InsideDomain, "x0 must lie outside the closed domain");
  }

  BoundaryPartition part;
  part.dim = dom.dim;
  part.max_distance = max_distance_to(dom, cfg.x0);
  part.min_distance = min_distance_to(dom, cfg.x0);
  part.t_min = 2.0 * part.max_distance;
  if (cfg.T - 2.0 * cfg.delta <= part.t_min) {
    std::ostringstream msg;
    msg << "T - 2 delta = " << cfg.T - 2.0 * cfg.delta << " must exceed 2 max|x - x0| = " << part.t_min;
    throw Error(ErrorCode::TimeTooShort, msg.str());
  }

  for (int f = 0; f < dom.face_count(); ++f) {
    part.gamma1[static_cast<std::size_t>(f)] = face_multiplier(dom, cfg.x0, f) > 0.0;
  }

  if (dom.dim == 1) {
    // Gamma_0 = Gamma_1; the two endpoints are a full interval length apart.
    part.margin = 0.0;
  } else {
    const double shortest = std::min(dom.extent(0), dom.extent(1));
    part.margin = cfg.gamma0_margin > 0.0 ? cfg.gamma0_margin : 0.25 * shortest;
    if (part.margin > 0.5 * shortest) {
      throw Error(ErrorCode::InvalidValue, "gamma0 margin must not exceed half of the shortest side");
    }
  }
  return part;
}

double auto_M0(const GeometryConfig& geometry, double beta) {
  const double dmin = min_distance_to(geometry.domain, geometry.x0);
  const double half = geometry.T / 2.0;
  return std::max(0.0, beta * half * half - dmin * dmin) + 1.0;
}

double default_s(double s0, double data_norm) {
  return std::max(s0, 1.0 + std::log1p(data_norm));
}

WeightModel::WeightModel(const GeometryConfig& geometry, const WeightParams& params)
    : beta_(params.beta),
      lambda_(params.lambda),
      s_(params.s),
      s0_(params.s0),
      normalized_(params.normalized),
      x0_(geometry.x0),
      T_(geometry.T),
      dim_(geometry.domain.dim) {
  if (!(beta_ > 0.0 && beta_ < 1.0)) throw Error(ErrorCode::InvalidValue, "beta must lie in (0,1)");
  if (!(lambda_ > 0.0)) throw Error(ErrorCode::InvalidValue, "lambda must be positive");
  if (!(s0_ >= 1.0)) throw Error(ErrorCode::InvalidValue, "s0 must be at least 1");
  if (!(s_ >= s0_)) throw Error(ErrorCode::InvalidValue, "s must be at least s0");
  M0_ = params.M0 ? *params.M0 : auto_M0(geometry, beta_);
  const double dmax = max_distance_to(geometry.domain, geometry.x0);
  const double dmin = min_distance_to(geometry.domain, geometry.x0);
  max_r2_ = dmax * dmax;
  min_r2_ = dmin * dmin;
  c_ = std::exp(lambda_ * (max_r2_ + M0_));
  const double half = T_ / 2.0;
  phi_min_ = std::exp(lambda_ * (min_r2_ - beta_ * half * half + M0_));
}

WeightModel WeightModel::with_s(double s) const {
  if (!(s >= s0_)) throw Error(ErrorCode::InvalidValue, "s must be at least s0");
  WeightModel copy = *this;
  copy.s_ = s;
  return copy;
}

WeightModel::InverseDerivatives WeightModel::inverse_derivatives(double x1, double x2, double t) const {
  InverseDerivatives out;
  const double ps = psi(x1, x2, t);
  const double ph = std::exp(lambda_ * ps);
  const double inv = std::exp(s_ * ph);

  const double psi_t = -2.0 * beta_ * (t - T_ / 2.0);
  const double psi_tt = -2.0 * beta_;
  Eigen::Vector2d psi_grad(2.0 * (x1 - x0_[0]), dim_ == 2 ? 2.0 * (x2 - x0_[1]) : 0.0);
  const double psi_lap = 2.0 * dim_;

  const double phi_t = lambda_ * psi_t * ph;
  const double phi_tt = lambda_ * (psi_tt + lambda_ * psi_t * psi_t) * ph;
  const Eigen::Vector2d phi_grad = lambda_ * ph * psi_grad;
  const double phi_lap = lambda_ * (psi_lap + lambda_ * psi_grad.squaredNorm()) * ph;

  out.value = inv;
  out.dt = s_ * phi_t * inv;
  out.dtt = (s_ * phi_tt + s_ * s_ * phi_t * phi_t) * inv;
  out.grad = s_ * phi_grad * inv;
  out.laplacian = (s_ * phi_lap + s_ * s_ * phi_grad.squaredNorm()) * inv;
  return out;
}

CutoffProfile::CutoffProfile(const GeometryConfig& geometry, const BoundaryPartition& partition)
    : domain_(geometry.domain), partition_(partition), delta_(geometry.delta), T_(geometry.T) {
  // Ramps of width delta when they fit; otherwise they meet in the middle.
  ramp_ = std::min(delta_, (T_ - 2.0 * delta_) / 2.0);
}

double CutoffProfile::distance_to_gamma1(int face, const Eigen::Vector2d& point) const {
  // Only meaningful in 2D: faces adjacent to `face` are those of the other axis.
  const int axis = face / 2;
  const int other = 1 - axis;
  double best = std::numeric_limits<double>::infinity();
  for (int side = 0; side < 2; ++side) {
    const int neighbour = 2 * other + side;
    if (!partition_.face_in_gamma1(neighbour)) continue;
    const double corner = side == 0 ? domain_.lower[other] : domain_.upper[other];
    best = std::min(best, std::abs(point[other] - corner));
  }
  return best;
}

double CutoffProfile::boundary_cutoff(int face, const Eigen::Vector2d& point) const {
  if (partition_.face_in_gamma1(face)) return 1.0;
  if (partition_.dim == 1) return 0.0;
  const double d = distance_to_gamma1(face, point);
  if (!(d < partition_.margin)) return 0.0;
  return 1.0 - smoothstep5(d / partition_.margin);
}

bool CutoffProfile::in_gamma0(int face, const Eigen::Vector2d& point) const {
  if (partition_.face_in_gamma1(face)) return true;
  if (partition_.dim == 1) return false;
  return distance_to_gamma1(face, point) < partition_.margin;
}

}  // namespace wavectl
