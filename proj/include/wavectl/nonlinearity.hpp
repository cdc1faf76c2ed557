#pragma once

#include <functional>
#include <map>
#include <string>

namespace wavectl {

/// max(ln|r|, 0)^p, with ln_+(0) = 0.
double ln_plus_p(double r, double p);

/// |f(r)| <= alpha1 + |r| (alpha2 + beta_star ln_+^p |r|)
struct GrowthH {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta_star = 0.0;
  double p = 0.0;
};

/// |f'(r)| <= alpha + beta_star ln_+^p |r|
struct GrowthHPrime {
  double alpha = 0.0;
  double beta_star = 0.0;
  double p = 0.0;
};

struct Nonlinearity {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  GrowthH h;
  GrowthHPrime hp;
  bool superlinear = false;

  double operator()(double r) const { return f(r); }
};

Nonlinearity zero_nonlinearity();
Nonlinearity linear_nonlinearity(double a);
Nonlinearity sine_nonlinearity(double a);
/// sign * beta * r * ln(1 + |r|)^p with certified parameters.
Nonlinearity superlinear_nonlinearity(double beta, double p, double sign = 1.0);

/// Lookup by name: zero, linear (a), sine (a), superlinear (beta_star, p), superlinear_neg (beta_star, p).
Nonlinearity make_nonlinearity(const std::string& name, const std::map<std::string, double>& params);

struct GrowthCertificate {
  bool pass = true;
  double worst_slack = 0.0;  ///< min over samples of (bound - |f|) / max(bound, 1), both conditions
  double worst_r = 0.0;
  std::string condition;  ///< "H" or "H'" at the worst sample
  int samples = 0;
};

/// Samples both growth bounds on a symmetric log-spaced grid over [-R, R] (plus 0).
/// Throws GrowthViolated naming the first violating r when `throw_on_failure` is set.
GrowthCertificate verify_growth(const Nonlinearity& f, double R = 1e8, int samples = 4001,
                                bool throw_on_failure = true);

}  // namespace wavectl
