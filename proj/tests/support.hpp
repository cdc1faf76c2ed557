#pragma once

#include <random>

#include <Eigen/Dense>

#include "wavectl/geometry.hpp"
#include "wavectl/grid.hpp"
#include "wavectl/linear_control.hpp"

namespace testing {

inline wavectl::GeometryConfig unit_interval() {
  wavectl::GeometryConfig g;
  g.domain = wavectl::Domain::interval(0.0, 1.0);
  g.x0 = {-0.2, 0.0};
  g.T = 2.6;
  g.delta = 0.08;
  return g;
}

inline wavectl::GeometryConfig unit_square() {
  wavectl::GeometryConfig g;
  g.domain = wavectl::Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  g.x0 = {-0.2, -0.2};
  g.T = 3.6;
  g.delta = 0.08;
  return g;
}

struct Setup {
  wavectl::GeometryConfig geometry;
  wavectl::SpaceTimeGrid grid;
  wavectl::WeightModel model;
  wavectl::CutoffProfile profile;
};

inline Setup make_setup(const wavectl::GeometryConfig& geo, int nx, int nt, double s, bool normalized = true) {
  wavectl::WeightParams wp;
  wp.s = s;
  wp.normalized = normalized;
  const auto part = wavectl::validate_geometry(geo);
  const int steps = nt > 0 ? nt : wavectl::auto_time_steps(geo, {nx, nx});
  return {geo, wavectl::build_grid(geo, {nx, nx}, steps), wavectl::WeightModel(geo, wp),
          wavectl::CutoffProfile(geo, part)};
}

inline Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

/// Random field vanishing on the lateral boundary.
inline wavectl::ScalarField random_dual(const wavectl::SpaceTimeGrid& g, unsigned seed) {
  wavectl::ScalarField w = g.make_field();
  w.values = random_vector(w.values.size(), seed);
  for (int n = 0; n < g.levels(); ++n) {
    for (int b : g.boundary()) w(b, n) = 0.0;
  }
  return w;
}

inline double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double den = std::max(a.norm(), b.norm());
  return den > 0.0 ? (a - b).norm() / den : 0.0;
}

}  // namespace testing
