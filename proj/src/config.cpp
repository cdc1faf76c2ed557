#include "wavectl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "wavectl/error.hpp"
#include "wavectl/field_io.hpp"
#include "wavectl/norms.hpp"

namespace wavectl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidValue, msg); }

double to_double(const std::string& text) {
  const std::string t = trim(text);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(x)) {
    invalid("expected a finite number, got '" + t + "'");
  }
  return x;
}

long long to_integer(const std::string& text) {
  const std::string t = trim(text);
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) invalid("expected an integer, got '" + t + "'");
  return x;
}

std::vector<double> to_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item));
  return out;
}

bool to_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "on" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "off" || t == "0" || t == "no") return false;
  invalid("expected true or false, got '" + t + "'");
}

std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + num(xs[i]);
  return out;
}

ProfileSpec to_profile(const std::string& text) {
  ProfileSpec p;
  std::string t = trim(text);
  if (t.rfind("csv:", 0) != 0) {
    const auto star = t.find('*');
    if (star != std::string::npos) {
      p.scale = to_double(t.substr(0, star));
      t = trim(t.substr(star + 1));
    }
  }
  if (t.rfind("csv:", 0) == 0) {
    p.name = "csv";
    p.csv = trim(t.substr(4));
    if (p.csv.empty()) invalid("csv profile needs a path");
    return p;
  }
  if (t != "zero" && t != "sin_pi" && t != "x1mx" && t != "bump") {
    invalid("unknown profile '" + t + "' (zero, sin_pi, x1mx, bump, csv:<path>)");
  }
  p.name = t;
  return p;
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::SparseDirect: return "sparse_direct";
    case SolverKind::JacobiCG: return "jacobi_cg";
    case SolverKind::Dense: return "dense";
  }
  return "sparse_direct";
}

std::string number_param(const RunConfig& c, const char* key) { return num(c.nonlinearity.params.at(key)); }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add = [&](const char* sec, const char* name, auto set, auto get) { k.push_back({sec, name, set, get}); };

    add("geometry", "domain",
        [](RunConfig& c, const std::string& v) {
          const auto xs = to_list(v);
          if (xs.size() == 2) c.geometry.domain = Domain::interval(xs[0], xs[1]);
          else if (xs.size() == 4) c.geometry.domain = Domain::rectangle(xs[0], xs[1], xs[2], xs[3]);
          else invalid("domain takes a,b or a1,b1,a2,b2");
          if (!(xs[1] > xs[0]) || (xs.size() == 4 && !(xs[3] > xs[2]))) invalid("domain bounds must increase");
        },
        [](const RunConfig& c) {
          const Domain& d = c.geometry.domain;
          if (d.dim == 1) return join({d.lower[0], d.upper[0]});
          return join({d.lower[0], d.upper[0], d.lower[1], d.upper[1]});
        });
    add("geometry", "x0",
        [](RunConfig& c, const std::string& v) {
          const auto xs = to_list(v);
          if (xs.empty() || xs.size() > 2) invalid("x0 takes one or two coordinates");
          c.geometry.x0 = {xs[0], xs.size() == 2 ? xs[1] : 0.0};
        },
        [](const RunConfig& c) {
          if (c.geometry.domain.dim == 1) return num(c.geometry.x0[0]);
          return join({c.geometry.x0[0], c.geometry.x0[1]});
        });
    add("geometry", "T", [](RunConfig& c, const std::string& v) { c.geometry.T = to_double(v); },
        [](const RunConfig& c) { return num(c.geometry.T); });
    add("geometry", "delta", [](RunConfig& c, const std::string& v) { c.geometry.delta = to_double(v); },
        [](const RunConfig& c) { return num(c.geometry.delta); });
    add("geometry", "gamma0_margin",
        [](RunConfig& c, const std::string& v) { c.geometry.gamma0_margin = to_double(v); },
        [](const RunConfig& c) { return num(c.geometry.gamma0_margin); });

    add("weights", "beta", [](RunConfig& c, const std::string& v) { c.weights.beta = to_double(v); },
        [](const RunConfig& c) { return num(c.weights.beta); });
    add("weights", "lambda", [](RunConfig& c, const std::string& v) { c.weights.lambda = to_double(v); },
        [](const RunConfig& c) { return num(c.weights.lambda); });
    add("weights", "s",
        [](RunConfig& c, const std::string& v) {
          c.auto_s = trim(v) == "auto";
          if (!c.auto_s) c.weights.s = to_double(v);
        },
        [](const RunConfig& c) { return c.auto_s ? std::string("auto") : num(c.weights.s); });
    add("weights", "s0", [](RunConfig& c, const std::string& v) { c.weights.s0 = to_double(v); },
        [](const RunConfig& c) { return num(c.weights.s0); });
    add("weights", "M0",
        [](RunConfig& c, const std::string& v) {
          if (trim(v) == "auto") c.weights.M0.reset();
          else c.weights.M0 = to_double(v);
        },
        [](const RunConfig& c) { return c.weights.M0 ? num(*c.weights.M0) : std::string("auto"); });
    add("weights", "normalization",
        [](RunConfig& c, const std::string& v) {
          const std::string t = trim(v);
          if (t != "normalized" && t != "raw") invalid("normalization is normalized or raw");
          c.weights.normalized = t == "normalized";
        },
        [](const RunConfig& c) { return std::string(c.weights.normalized ? "normalized" : "raw"); });

    add("grid", "nx",
        [](RunConfig& c, const std::string& v) {
          const auto xs = to_list(v);
          if (xs.empty() || xs.size() > 2) invalid("nx takes one or two counts");
          for (double x : xs) {
            if (x != std::floor(x)) invalid("nx must be integral");
          }
          c.grid.nx = {static_cast<int>(xs[0]), static_cast<int>(xs.size() == 2 ? xs[1] : xs[0])};
        },
        [](const RunConfig& c) {
          if (c.geometry.domain.dim == 1) return std::to_string(c.grid.nx[0]);
          return std::to_string(c.grid.nx[0]) + "," + std::to_string(c.grid.nx[1]);
        });
    add("grid", "nt",
        [](RunConfig& c, const std::string& v) {
          if (trim(v) == "auto") c.grid.nt.reset();
          else c.grid.nt = static_cast<int>(to_integer(v));
        },
        [](const RunConfig& c) { return c.grid.nt ? std::to_string(*c.grid.nt) : std::string("auto"); });
    add("grid", "cfl", [](RunConfig& c, const std::string& v) { c.grid.cfl = to_double(v); },
        [](const RunConfig& c) { return num(c.grid.cfl); });

    add("data", "u0", [](RunConfig& c, const std::string& v) { c.data.u0 = to_profile(v); },
        [](const RunConfig& c) { return c.data.u0.to_string(); });
    add("data", "u1", [](RunConfig& c, const std::string& v) { c.data.u1 = to_profile(v); },
        [](const RunConfig& c) { return c.data.u1.to_string(); });
    add("data", "z0", [](RunConfig& c, const std::string& v) { c.data.z0 = to_profile(v); },
        [](const RunConfig& c) { return c.data.z0.to_string(); });
    add("data", "z1", [](RunConfig& c, const std::string& v) { c.data.z1 = to_profile(v); },
        [](const RunConfig& c) { return c.data.z1.to_string(); });

    add("nonlinearity", "name", [](RunConfig& c, const std::string& v) { c.nonlinearity.name = trim(v); },
        [](const RunConfig& c) { return c.nonlinearity.name; });
    for (const char* p : {"a", "beta_star", "p"}) {
      add("nonlinearity", p, [p](RunConfig& c, const std::string& v) { c.nonlinearity.params[p] = to_double(v); },
          [p](const RunConfig& c) { return number_param(c, p); });
    }

    add("solver", "kind",
        [](RunConfig& c, const std::string& v) {
          const std::string t = trim(v);
          if (t == "sparse_direct") c.solver.kind = SolverKind::SparseDirect;
          else if (t == "jacobi_cg") c.solver.kind = SolverKind::JacobiCG;
          else if (t == "dense") c.solver.kind = SolverKind::Dense;
          else invalid("kind is sparse_direct, jacobi_cg or dense");
        },
        [](const RunConfig& c) { return solver_name(c.solver.kind); });
    add("solver", "epsilon",
        [](RunConfig& c, const std::string& v) {
          if (trim(v) == "auto") c.solver.epsilon.reset();
          else c.solver.epsilon = to_double(v);
        },
        [](const RunConfig& c) { return c.solver.epsilon ? num(*c.solver.epsilon) : std::string("auto"); });
    add("solver", "tolerance", [](RunConfig& c, const std::string& v) { c.solver.tolerance = to_double(v); },
        [](const RunConfig& c) { return num(c.solver.tolerance); });
    add("solver", "max_iter",
        [](RunConfig& c, const std::string& v) { c.solver.max_iter = static_cast<int>(to_integer(v)); },
        [](const RunConfig& c) { return std::to_string(c.solver.max_iter); });
    add("solver", "trace_order",
        [](RunConfig& c, const std::string& v) {
          const std::string t = trim(v);
          if (t == "first") c.solver.trace_order = TraceOrder::First;
          else if (t == "second") c.solver.trace_order = TraceOrder::Second;
          else invalid("trace_order is first or second");
        },
        [](const RunConfig& c) {
          return std::string(c.solver.trace_order == TraceOrder::First ? "first" : "second");
        });
    add("solver", "fp_tol", [](RunConfig& c, const std::string& v) { c.solver.fp_tol = to_double(v); },
        [](const RunConfig& c) { return num(c.solver.fp_tol); });
    add("solver", "fp_max_iter",
        [](RunConfig& c, const std::string& v) { c.solver.fp_max_iter = static_cast<int>(to_integer(v)); },
        [](const RunConfig& c) { return std::to_string(c.solver.fp_max_iter); });
    add("solver", "class",
        [](RunConfig& c, const std::string& v) {
          const std::string t = trim(v);
          if (t == "C_s") c.solver.class_kind = ClassKind::C_s;
          else if (t == "C_tilde_s") c.solver.class_kind = ClassKind::C_tilde_s;
          else invalid("class is C_s or C_tilde_s");
        },
        [](const RunConfig& c) {
          return std::string(c.solver.class_kind == ClassKind::C_s ? "C_s" : "C_tilde_s");
        });
    add("solver", "residual_bound",
        [](RunConfig& c, const std::string& v) { c.solver.residual_bound = to_double(v); },
        [](const RunConfig& c) { return num(c.solver.residual_bound); });
    add("solver", "kkt_bound", [](RunConfig& c, const std::string& v) { c.solver.kkt_bound = to_double(v); },
        [](const RunConfig& c) { return num(c.solver.kkt_bound); });
    add("solver", "samples",
        [](RunConfig& c, const std::string& v) { c.solver.samples = static_cast<int>(to_integer(v)); },
        [](const RunConfig& c) { return std::to_string(c.solver.samples); });
    add("solver", "seed",
        [](RunConfig& c, const std::string& v) {
          const long long x = to_integer(v);
          if (x < 0) invalid("seed must be non-negative");
          c.solver.seed = static_cast<unsigned long long>(x);
        },
        [](const RunConfig& c) { return std::to_string(c.solver.seed); });

    add("output", "directory", [](RunConfig& c, const std::string& v) { c.output.directory = trim(v); },
        [](const RunConfig& c) { return c.output.directory.string(); });
    add("output", "plots", [](RunConfig& c, const std::string& v) { c.output.plots = to_bool(v); },
        [](const RunConfig& c) { return std::string(c.output.plots ? "true" : "false"); });
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  for (const auto& k : keys()) {
    if (k.section == section) return true;
  }
  return false;
}

void check(bool ok, const std::string& msg) {
  if (!ok) invalid(msg);
}

void validate(const RunConfig& c) {
  const int dim = c.geometry.domain.dim;
  check(c.geometry.T > 0.0, "geometry.T must be positive");
  try {
    validate_geometry(c.geometry);
  } catch (const Error& e) {
    invalid(std::string("geometry: ") + e.what());
  }
  check(c.weights.beta > 0.0 && c.weights.beta < 1.0, "weights.beta must lie in (0, 1)");
  check(c.weights.lambda > 0.0, "weights.lambda must be positive");
  check(c.auto_s || c.weights.s > 0.0, "weights.s must be positive");
  check(c.weights.s0 > 0.0, "weights.s0 must be positive");
  check(!c.weights.M0 || *c.weights.M0 > 0.0, "weights.M0 must be positive");
  for (int a = 0; a < dim; ++a) check(c.grid.nx[static_cast<std::size_t>(a)] >= 4, "grid.nx must be at least 4");
  check(!c.grid.nt || *c.grid.nt >= 4, "grid.nt must be at least 4");
  check(c.grid.cfl > 0.0 && c.grid.cfl <= 0.95, "grid.cfl must lie in (0, 0.95]");
  try {
    make_nonlinearity(c.nonlinearity.name, c.nonlinearity.params);
  } catch (const Error& e) {
    invalid(std::string("nonlinearity: ") + e.what());
  }
  check(!c.solver.epsilon || *c.solver.epsilon >= 0.0, "solver.epsilon must be non-negative");
  check(c.solver.tolerance > 0.0, "solver.tolerance must be positive");
  check(c.solver.max_iter >= 0, "solver.max_iter must be non-negative");
  check(c.solver.fp_tol > 0.0, "solver.fp_tol must be positive");
  check(c.solver.fp_max_iter >= 1, "solver.fp_max_iter must be at least 1");
  check(c.solver.residual_bound > 0.0, "solver.residual_bound must be positive");
  check(c.solver.kkt_bound > 0.0, "solver.kkt_bound must be positive");
  check(c.solver.samples >= 1, "solver.samples must be at least 1");
}

std::string location(const std::string& origin, int line, std::size_t column) {
  return origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": ";
}

double shape(const std::string& name, double xi) {
  if (name == "sin_pi") return std::sin(std::numbers::pi * xi);
  if (name == "x1mx") return xi * (1.0 - xi);
  const double u = (xi - 0.5) / 0.25;
  return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
}

}  // namespace

std::string ProfileSpec::to_string() const {
  const std::string body = name == "csv" ? "csv:" + csv.string() : name;
  if (name == "csv" || scale == 1.0) return body;
  return num(scale) + "*" + body;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    std::string body = raw;
    const auto hash = body.find_first_of("#;");
    if (hash != std::string::npos) body = body.substr(0, hash);
    if (trim(body).empty()) continue;
    const std::size_t indent = body.find_first_not_of(" \t") + 1;
    const std::string t = trim(body);
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw Error(ErrorCode::ParseError, location(origin, line, indent + t.size() - 1) + "expected ']'");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (!known_section(section)) {
        throw Error(ErrorCode::UnknownKey, location(origin, line, indent + 1) + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, location(origin, line, indent) + "expected key = value");
    }
    if (section.empty()) {
      throw Error(ErrorCode::ParseError, location(origin, line, indent) + "key outside of any section");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::ParseError, location(origin, line, indent) + "empty key");
    const Key* k = find_key(section, key);
    if (!k) {
      throw Error(ErrorCode::UnknownKey, location(origin, line, indent) + "unknown key '" + key + "' in [" + section + "]");
    }
    const std::string full = section + "." + key;
    for (const auto& s : seen) {
      if (s == full) throw Error(ErrorCode::ParseError, location(origin, line, indent) + "duplicate key '" + full + "'");
    }
    seen.push_back(full);
    const std::string value = body.substr(eq + 1);
    const std::size_t vcol = eq + 2 + (value.find_first_not_of(" \t") == std::string::npos ? 0 : value.find_first_not_of(" \t"));
    try {
      k->set(cfg, value);
    } catch (const Error& e) {
      throw Error(e.code(), location(origin, line, vcol) + full + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config_text(buf.str(), path.string());
  cfg.base_dir = path.parent_path();
  return cfg;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  const Key* k = nullptr;
  if (dot != std::string::npos) {
    k = find_key(key.substr(0, dot), key.substr(dot + 1));
  } else {
    for (const auto& e : keys()) {
      if (e.name != key) continue;
      if (k) throw Error(ErrorCode::UnknownKey, "ambiguous key '" + key + "'; use section.key");
      k = &e;
    }
  }
  if (!k) throw Error(ErrorCode::UnknownKey, "unknown key '" + key + "'");
  try {
    k->set(cfg, value);
  } catch (const Error& e) {
    throw Error(e.code(), k->section + "." + k->name + ": " + e.what());
  }
  validate(cfg);
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out << "\n";
      section = k.section;
      out << "[" << section << "]\n";
    }
    out << k.name << " = " << k.get(cfg) << "\n";
  }
  return out.str();
}

Eigen::VectorXd sample_profile(const ProfileSpec& spec, const SpaceTimeGrid& grid, const std::filesystem::path& base) {
  if (spec.name == "csv") {
    const auto path = spec.csv.is_absolute() ? spec.csv : base / spec.csv;
    return spec.scale * read_slice_csv(path, grid.spatial_nodes());
  }
  if (spec.name == "zero") return Eigen::VectorXd::Zero(grid.spatial_nodes());
  const Domain& d = grid.domain();
  return sample_slice(grid, [&](double x1, double x2) {
    double v = spec.scale * shape(spec.name, (x1 - d.lower[0]) / d.extent(0));
    if (d.dim == 2) v *= shape(spec.name, (x2 - d.lower[1]) / d.extent(1));
    return v;
  });
}

RunSetup resolve(const RunConfig& cfg) {
  const BoundaryPartition partition = validate_geometry(cfg.geometry);
  const int nt = cfg.grid.nt ? *cfg.grid.nt : auto_time_steps(cfg.geometry, cfg.grid.nx, cfg.grid.cfl);
  SpaceTimeGrid grid = build_grid(cfg.geometry, cfg.grid.nx, nt);

  ControlData data = ControlData::zero(grid);
  data.u0 = sample_profile(cfg.data.u0, grid, cfg.base_dir);
  data.u1 = sample_profile(cfg.data.u1, grid, cfg.base_dir);
  data.z0 = sample_profile(cfg.data.z0, grid, cfg.base_dir);
  data.z1 = sample_profile(cfg.data.z1, grid, cfg.base_dir);

  RunConfig resolved = cfg;
  if (cfg.auto_s) {
    resolved.weights.s = default_s(cfg.weights.s0, l2_slice(grid, data.u0) + hminus1_slice(grid, data.u1));
    resolved.auto_s = false;
  }
  if (!resolved.grid.nt) resolved.grid.nt = nt;
  WeightModel model(cfg.geometry, resolved.weights);
  CutoffProfile profile(cfg.geometry, partition);
  return RunSetup{std::move(resolved), std::move(grid), std::move(model), std::move(profile), std::move(data)};
}

}  // namespace wavectl
