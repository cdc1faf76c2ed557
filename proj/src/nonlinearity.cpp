#include "wavectl/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "wavectl/error.hpp"

namespace wavectl {

double ln_plus_p(double r, double p) {
  const double a = std::abs(r);
  if (!(a > 1.0)) return 0.0;
  return std::pow(std::log(a), p);
}

Nonlinearity zero_nonlinearity() {
  Nonlinearity n;
  n.name = "zero";
  n.f = [](double) { return 0.0; };
  n.df = [](double) { return 0.0; };
  return n;
}

Nonlinearity linear_nonlinearity(double a) {
  Nonlinearity n;
  n.name = "linear";
  n.f = [a](double r) { return a * r; };
  n.df = [a](double) { return a; };
  n.h = {0.0, std::abs(a), 0.0, 0.0};
  n.hp = {std::abs(a), 0.0, 0.0};
  return n;
}

Nonlinearity sine_nonlinearity(double a) {
  Nonlinearity n;
  n.name = "sine";
  n.f = [a](double r) { return a * std::sin(r); };
  n.df = [a](double r) { return a * std::cos(r); };
  n.h = {0.0, std::abs(a), 0.0, 0.0};
  n.hp = {std::abs(a), 0.0, 0.0};
  return n;
}

Nonlinearity superlinear_nonlinearity(double beta, double p, double sign) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidValue, "beta_star must be positive");
  if (!(p >= 0.0 && p <= 1.5)) throw Error(ErrorCode::InvalidValue, "p must lie in [0, 3/2]");
  Nonlinearity n;
  n.name = sign < 0.0 ? "superlinear_neg" : "superlinear";
  const double b = sign < 0.0 ? -beta : beta;
  n.f = [b, p](double r) { return b * r * std::pow(std::log1p(std::abs(r)), p); };
  n.df = [b, p](double r) {
    const double a = std::abs(r);
    const double g = std::log1p(a);
    if (a == 0.0) return p == 0.0 ? b : 0.0;
    return b * (std::pow(g, p) + p * a / (1.0 + a) * std::pow(g, p - 1.0));
  };
  // ln(1+|r|) <= ln 2 + ln_+|r| and (x + y)^p <= k_p (x^p + y^p).
  const double kp = std::max(1.0, std::pow(2.0, p - 1.0));
  const double ln2 = std::numbers::ln2;
  n.h = {0.0, beta * kp * std::pow(ln2, p), beta * kp, p};
  if (p <= 1.0) {
    n.hp = {beta * (std::pow(ln2, p) + p), beta, p};
  } else {
    n.hp = {beta * (kp * std::pow(ln2, p) + p * (std::pow(ln2, p - 1.0) + 1.0)), beta * (kp + p), p};
  }
  n.superlinear = true;
  return n;
}

Nonlinearity make_nonlinearity(const std::string& name, const std::map<std::string, double>& params) {
  auto get = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "zero") return zero_nonlinearity();
  if (name == "linear") return linear_nonlinearity(get("a", 0.05));
  if (name == "sine") return sine_nonlinearity(get("a", 0.05));
  if (name == "superlinear") return superlinear_nonlinearity(get("beta_star", 0.05), get("p", 1.0));
  if (name == "superlinear_neg") return superlinear_nonlinearity(get("beta_star", 0.05), get("p", 1.0), -1.0);
  throw Error(ErrorCode::InvalidValue, "unknown nonlinearity '" + name + "'");
}

GrowthCertificate verify_growth(const Nonlinearity& f, double R, int samples, bool throw_on_failure) {
  if (!(R > 1.0) || samples < 2) throw Error(ErrorCode::InvalidValue, "growth check needs R > 1 and 2+ samples");
  if (f.superlinear && !(f.h.beta_star > 0.0 && f.hp.beta_star > 0.0)) {
    throw Error(ErrorCode::GrowthViolated, f.name + ": superlinear map declared with beta_star = 0");
  }
  std::vector<double> rs{0.0};
  const double lo = std::log(1e-6), hi = std::log(R);
  for (int i = 0; i < samples; ++i) {
    const double r = std::exp(lo + (hi - lo) * i / (samples - 1));
    rs.push_back(r);
    rs.push_back(-r);
  }
  GrowthCertificate cert;
  cert.samples = static_cast<int>(rs.size());
  cert.worst_slack = std::numeric_limits<double>::infinity();
  auto consider = [&](double bound, double value, double r, const char* cond) {
    const double slack = (bound - std::abs(value)) / std::max(bound, 1.0);
    if (slack < cert.worst_slack) {
      cert.worst_slack = slack;
      cert.worst_r = r;
      cert.condition = cond;
    }
    // Allow round-off in the evaluation of f itself.
    if (std::abs(value) > bound * (1.0 + 1e-12) + 1e-300) {
      cert.pass = false;
      if (throw_on_failure) {
        std::ostringstream msg;
        msg << f.name << " violates (" << cond << ") at r = " << r << ": |value| = " << std::abs(value)
            << " > bound " << bound;
        throw Error(ErrorCode::GrowthViolated, msg.str());
      }
    }
  };
  for (double r : rs) {
    const double a = std::abs(r);
    const double lp = ln_plus_p(r, f.h.p);
    consider(f.h.alpha1 + a * (f.h.alpha2 + f.h.beta_star * lp), f.f(r), r, "H");
    if (f.df) consider(f.hp.alpha + f.hp.beta_star * ln_plus_p(r, f.hp.p), f.df(r), r, "H'");
  }
  return cert;
}

}  // namespace wavectl
