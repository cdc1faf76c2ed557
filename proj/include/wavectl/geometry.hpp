#pragma once

#include <array>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

namespace wavectl {

/// Interval [a,b] (dim 1) or axis-aligned rectangle [a1,b1]x[a2,b2] (dim 2).
struct Domain {
  int dim = 1;
  Eigen::Vector2d lower{0.0, 0.0};
  Eigen::Vector2d upper{1.0, 0.0};

  static Domain interval(double a, double b);
  static Domain rectangle(double a1, double b1, double a2, double b2);

  double measure() const;
  double extent(int axis) const { return upper[axis] - lower[axis]; }
  int face_count() const { return 2 * dim; }
};

struct GeometryConfig {
  Domain domain;
  Eigen::Vector2d x0{-0.2, 0.0};
  double T = 2.6;
  double delta = 0.08;
  /// Arc length by which the control support extends past Gamma_1 (2D only);
  /// 0 selects a quarter of the shortest side.
  double gamma0_margin = 0.0;
};

/// Faces: 0 -> x1 = a1, 1 -> x1 = b1, 2 -> x2 = a2, 3 -> x2 = b2. In 1D only 0 and 1 exist.
Eigen::Vector2d face_normal(int face);

struct BoundaryPartition {
  int dim = 1;
  /// gamma1[f] is true when (x - x0).nu > 0 on face f (constant per face).
  std::array<bool, 4> gamma1{};
  /// Positive arc-length margin separating Gamma_1 from the complement of Gamma_0.
  double margin = 0.0;
  double max_distance = 0.0;  ///< max |x - x0| over the closed domain
  double min_distance = 0.0;  ///< min |x - x0| over the closed domain
  double t_min = 0.0;         ///< 2 max |x - x0|

  bool face_in_gamma1(int face) const { return gamma1[static_cast<std::size_t>(face)]; }
};

/// Computes Gamma_1 / Gamma_0 and checks x0 and the observation time.
/// Throws X0InsideDomain, TimeTooShort or BadDelta.
BoundaryPartition validate_geometry(const GeometryConfig& cfg);

/// Distance from x0 to the closed domain and to its farthest point.
double min_distance_to(const Domain& domain, const Eigen::Vector2d& x0);
double max_distance_to(const Domain& domain, const Eigen::Vector2d& x0);

/// 6u^5 - 15u^4 + 10u^3 clamped to [0,1]; C2 with vanishing first and second
/// derivatives at both ends.
template <typename Scalar>
Scalar smoothstep5(Scalar u) {
  if (u <= Scalar(0)) return Scalar(0);
  if (u >= Scalar(1)) return Scalar(1);
  return u * u * u * (u * (u * Scalar(6) - Scalar(15)) + Scalar(10));
}

template <typename Scalar>
Scalar smoothstep5_derivative(Scalar u) {
  if (u <= Scalar(0) || u >= Scalar(1)) return Scalar(0);
  const Scalar v = u * (Scalar(1) - u);
  return Scalar(30) * v * v;
}

struct WeightParams {
  double beta = 0.9;
  double lambda = 0.1;
  std::optional<double> M0;  ///< unset selects the automatic offset
  double s = 4.0;
  double s0 = 1.0;
  bool normalized = true;  ///< use e^{-s(phi - min phi)} instead of e^{-s phi}
};

/// Carleman weight with every constant resolved against a geometry:
/// psi = |x-x0|^2 - beta (t - T/2)^2 + M0, phi = e^{lambda psi}, rho = e^{-s phi}.
class WeightModel {
 public:
  WeightModel(const GeometryConfig& geometry, const WeightParams& params);

  double beta() const { return beta_; }
  double lambda() const { return lambda_; }
  double M0() const { return M0_; }
  double s() const { return s_; }
  double s0() const { return s0_; }
  bool normalized() const { return normalized_; }
  /// c = sup of phi over the closed cylinder (attained at t = T/2).
  double c() const { return c_; }
  /// inf of phi over the closed cylinder (attained at t = 0 and t = T).
  double phi_min() const { return phi_min_; }
  const Eigen::Vector2d& x0() const { return x0_; }
  double T() const { return T_; }
  int dim() const { return dim_; }

  WeightModel with_s(double s) const;

  template <typename Scalar>
  Scalar psi(Scalar x1, Scalar x2, Scalar t) const {
    Scalar r2 = (x1 - Scalar(x0_[0])) * (x1 - Scalar(x0_[0]));
    if (dim_ == 2) r2 += (x2 - Scalar(x0_[1])) * (x2 - Scalar(x0_[1]));
    const Scalar tc = t - Scalar(T_ / 2);
    return r2 - Scalar(beta_) * tc * tc + Scalar(M0_);
  }

  template <typename Scalar>
  Scalar phi(Scalar x1, Scalar x2, Scalar t) const {
    using std::exp;
    return exp(Scalar(lambda_) * psi(x1, x2, t));
  }

  /// Raw weight e^{-s phi}.
  template <typename Scalar>
  Scalar rho(Scalar x1, Scalar x2, Scalar t) const {
    using std::exp;
    return exp(-Scalar(s_) * phi(x1, x2, t));
  }

  /// rho^{-1} = e^{s phi}.
  template <typename Scalar>
  Scalar rho_inverse(Scalar x1, Scalar x2, Scalar t) const {
    using std::exp;
    return exp(Scalar(s_) * phi(x1, x2, t));
  }

  struct InverseDerivatives {
    double value = 0.0;
    double dt = 0.0;
    double dtt = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    double laplacian = 0.0;
  };

  /// Exact derivatives of rho^{-1} by the chain rule through psi and phi.
  InverseDerivatives inverse_derivatives(double x1, double x2, double t) const;

 private:
  double beta_ = 0.9;
  double lambda_ = 0.1;
  double M0_ = 1.0;
  double s_ = 4.0;
  double s0_ = 1.0;
  bool normalized_ = true;
  double c_ = 1.0;
  double phi_min_ = 1.0;
  Eigen::Vector2d x0_ = Eigen::Vector2d::Zero();
  double T_ = 1.0;
  int dim_ = 1;
  double max_r2_ = 0.0;
  double min_r2_ = 0.0;
};

/// Automatic offset max(0, beta (T/2)^2 - min |x-x0|^2) + 1, so that psi >= 1.
double auto_M0(const GeometryConfig& geometry, double beta);

/// Default Carleman parameter max(s0, 1 + ln(1 + data_norm)).
double default_s(double s0, double data_norm);

/// Time cut-off eta and boundary cut-off Psi built from a validated geometry.
class CutoffProfile {
 public:
  CutoffProfile(const GeometryConfig& geometry, const BoundaryPartition& partition);

  /// 0 outside (delta, T - delta), quintic ramps of width `ramp()`, plateau 1.
  template <typename Scalar>
  Scalar eta(Scalar t) const {
    const Scalar d(delta_), w(ramp_), T(T_);
    if (t <= d || t >= T - d) return Scalar(0);
    if (t < d + w) return smoothstep5((t - d) / w);
    if (t > T - d - w) return smoothstep5((T - d - t) / w);
    return Scalar(1);
  }

  template <typename Scalar>
  Scalar eta_derivative(Scalar t) const {
    const Scalar d(delta_), w(ramp_), T(T_);
    if (t <= d || t >= T - d) return Scalar(0);
    if (t < d + w) return smoothstep5_derivative((t - d) / w) / w;
    if (t > T - d - w) return -smoothstep5_derivative((T - d - t) / w) / w;
    return Scalar(0);
  }

  /// Psi at a boundary point lying on `face`.
  double boundary_cutoff(int face, const Eigen::Vector2d& point) const;
  /// True when the point belongs to the (open) control support Gamma_0.
  bool in_gamma0(int face, const Eigen::Vector2d& point) const;

  double delta() const { return delta_; }
  double ramp() const { return ramp_; }
  double T() const { return T_; }
  std::pair<double, double> plateau() const { return {delta_ + ramp_, T_ - delta_ - ramp_}; }
  const BoundaryPartition& partition() const { return partition_; }

 private:
  /// Arc length from a point on a non-Gamma_1 face to the nearest Gamma_1 corner.
  double distance_to_gamma1(int face, const Eigen::Vector2d& point) const;

  Domain domain_;
  BoundaryPartition partition_;
  double delta_ = 0.0;
  double ramp_ = 0.0;
  double T_ = 0.0;
};

}  // namespace wavectl
