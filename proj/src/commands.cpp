#include "wavectl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "wavectl/error.hpp"
#include "wavectl/field_io.hpp"
#include "wavectl/fixed_point.hpp"
#include "wavectl/forward_wave.hpp"
#include "wavectl/norms.hpp"

namespace wavectl {

namespace {

namespace fs = std::filesystem;

/// Dense KKT solves above this many unknowns take minutes.
constexpr int kMaxKKTUnknowns = 6000;

struct Report {
  std::vector<std::vector<std::string>> rows;
  bool failed = false;

  void check(const std::string& name, double lhs, double rhs, bool ok) {
    rows.push_back({name, format_number(lhs), format_number(rhs), format_number(rhs != 0.0 ? lhs / rhs : 0.0),
                    ok ? "pass" : "fail"});
    failed = failed || !ok;
  }
  void info(const std::string& name, double lhs, double rhs = 0.0, const std::string& status = "info") {
    rows.push_back({name, format_number(lhs), format_number(rhs), format_number(rhs != 0.0 ? lhs / rhs : 0.0), status});
  }
  void write(const fs::path& dir) const { write_csv(dir / "report.csv", {"name", "lhs", "rhs", "ratio", "status"}, rows); }
};

class Summary {
 public:
  explicit Summary(const std::string& command) { add("command", command); }
  Summary& add(const std::string& key, const std::string& value) {
    out_ << (out_.tellp() > 0 ? " " : "") << key << "=" << value;
    return *this;
  }
  Summary& add(const std::string& key, double value) { return add(key, format_number(value)); }
  Summary& add(const std::string& key, int value) { return add(key, std::to_string(value)); }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
}

void prepare(const RunConfig& cfg, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  write_text(dir / "resolved.cfg", render_config(cfg));
}

struct Context {
  RunSetup setup;
  WeightedSystem system;
  DualSolver solver;
};

Context build_context(const RunConfig& cfg, const fs::path& dir) {
  RunSetup setup = resolve(cfg);
  write_text(dir / "resolved.cfg", render_config(setup.config));
  AssemblyOptions ao;
  ao.epsilon = cfg.solver.epsilon;
  ao.trace_order = cfg.solver.trace_order;
  WeightedSystem system = assemble_system(setup.grid, setup.model, setup.profile, ao);
  SolverOptions so{cfg.solver.kind, cfg.solver.tolerance, cfg.solver.max_iter};
  DualSolver solver(system, so);
  return {std::move(setup), std::move(system), std::move(solver)};
}

const char* kPlotState = R"py(import sys
import numpy as np
import pandas as pd
import matplotlib.pyplot as plt

d = sys.argv[1] if len(sys.argv) > 1 else "."
y = pd.read_csv(f"{d}/y.csv", comment="#")
v = pd.read_csv(f"{d}/v.csv", comment="#")
grid = y.pivot(index="it", columns="ix", values="value").to_numpy()
fig, ax = plt.subplots(1, 2, figsize=(10, 4))
im = ax[0].imshow(grid, origin="lower", aspect="auto", cmap="RdBu_r")
ax[0].set_xlabel("node")
ax[0].set_ylabel("time level")
ax[0].set_title("state y")
fig.colorbar(im, ax=ax[0])
for ib, g in v.groupby("ib"):
    ax[1].plot(g["it"], g["value"], label=f"point {ib}")
ax[1].set_xlabel("time level")
ax[1].set_title("control v")
ax[1].legend()
fig.tight_layout()
fig.savefig(f"{d}/state.png", dpi=120)
)py";

const char* kPlotTrace = R"py(import sys
import pandas as pd
import matplotlib.pyplot as plt

d = sys.argv[1] if len(sys.argv) > 1 else "."
t = pd.read_csv(f"{d}/trace.csv")
fig, ax = plt.subplots(1, 2, figsize=(10, 4))
ax[0].semilogy(t["k"], t["d_k"].clip(lower=1e-300), "o-")
ax[0].set_xlabel("k")
ax[0].set_ylabel("d_k")
ax[1].plot(t["k"], t["ratio"], "o-")
ax[1].set_xlabel("k")
ax[1].set_ylabel("d_k / d_(k-1)")
fig.tight_layout()
fig.savefig(f"{d}/trace.png", dpi=120)
)py";

const char* kPlotCarleman = R"py(import sys
import pandas as pd
import matplotlib.pyplot as plt

d = sys.argv[1] if len(sys.argv) > 1 else "."
c = pd.read_csv(f"{d}/carleman.csv")
c = c[c["sample"] != "max"]
plt.hist(c["ratio"].astype(float), bins=20)
plt.xlabel("Carleman quotient")
plt.ylabel("count")
plt.savefig(f"{d}/carleman.png", dpi=120)
)py";

const char* kPlotSweep = R"py(import sys
import pandas as pd
import matplotlib.pyplot as plt

d = sys.argv[1] if len(sys.argv) > 1 else "."
s = pd.read_csv(f"{d}/sweep.csv")
s = s[s["mean_ratio"] > 0]
plt.loglog(s["value"].astype(float), s["mean_ratio"], "o-", label="mean ratio")
plt.loglog(s["value"].astype(float), s["max_ratio"], "s--", label="max ratio")
plt.xlabel(s["param"].iloc[0] if len(s) else "value")
plt.legend()
plt.savefig(f"{d}/sweep.png", dpi=120)
)py";

void maybe_plot(const RunConfig& cfg, const fs::path& dir, const char* name, const char* script) {
  if (cfg.output.plots) write_text(dir / name, script);
}

std::vector<std::string> class_columns(ClassKind kind) {
  if (kind == ClassKind::C_s) return {"margin_L2Q", "margin_LinfL2"};
  return {"margin_L2Q", "margin_t_L2Q", "margin_grad_L2Q"};
}

int finish(const Report& report, const fs::path& dir) {
  report.write(dir);
  return report.failed ? kExitVerification : kExitOk;
}

}  // namespace

fs::path output_root(const RunConfig& cfg) {
  if (const char* env = std::getenv("WAVECTL_OUT"); env && *env) return fs::path(env);
  return cfg.output.directory;
}

CommandResult cmd_linear_solve(const RunConfig& cfg, const fs::path& dir) {
  prepare(cfg, dir);
  Context ctx = build_context(cfg, dir);
  const SpaceTimeGrid& g = ctx.setup.grid;
  const StateControlPair pair = solve_linear(ctx.system, ctx.setup.data, ctx.solver);
  const ControlResidual res = verify_control(g, pair.v, ctx.setup.data, {});

  write_field_csv(dir / "y.csv", pair.y, g);
  write_boundary_csv(dir / "v.csv", pair.v);
  write_field_csv(dir / "w.csv", pair.w, g);
  Report report;
  report.check("verify_residual", res.relative, cfg.solver.residual_bound, res.relative <= cfg.solver.residual_bound);
  report.info("dual_solver_residual", pair.stats.residual);
  report.info("extracted_final_residual", pair.final_residual);
  for (const auto& row : estimate_report(pair, ctx.system, ctx.setup.data, 0.0)) {
    report.info("estimate_" + row.name, row.lhs, row.rhs);
  }
  maybe_plot(cfg, dir, "plot_state.py", kPlotState);

  CommandResult out;
  out.exit_code = finish(report, dir);
  out.directory = dir;
  out.summary = Summary("linear-solve")
                    .add("status", out.exit_code == kExitOk ? "ok" : "verification_failed")
                    .add("exit", out.exit_code)
                    .add("residual", res.relative)
                    .add("bound", cfg.solver.residual_bound)
                    .add("solver_residual", pair.stats.residual)
                    .add("nx", cfg.grid.nx[0])
                    .add("nt", g.nt())
                    .add("s", ctx.system.s)
                    .add("dir", dir.string())
                    .str();
  return out;
}

CommandResult cmd_semilinear_solve(const RunConfig& cfg, const fs::path& dir) {
  prepare(cfg, dir);
  const Nonlinearity f = make_nonlinearity(cfg.nonlinearity.name, cfg.nonlinearity.params);
  Report report;
  const GrowthCertificate cert = verify_growth(f, 1e8, 4001, false);
  report.check("growth_certificate_slack", cert.worst_slack, 0.0, cert.pass);
  if (!cert.pass) {
    CommandResult out;
    out.exit_code = finish(report, dir);
    out.directory = dir;
    out.summary = Summary("semilinear-solve")
                      .add("status", "verification_failed")
                      .add("exit", out.exit_code)
                      .add("failed", "growth_certificate")
                      .add("dir", dir.string())
                      .str();
    return out;
  }

  Context ctx = build_context(cfg, dir);
  const SpaceTimeGrid& g = ctx.setup.grid;
  FixedPointOptions fo;
  fo.tol = cfg.solver.fp_tol;
  fo.max_iter = cfg.solver.fp_max_iter;
  fo.kind = cfg.solver.class_kind;
  const FixedPointResult fp = run_fixed_point(ctx.system, ctx.solver, ctx.setup.data, f, fo);
  const IterationTrace& tr = fp.trace;
  const ContractionReport cr = contraction_report(tr, f, ctx.system.s, ctx.system.weights.c);

  std::vector<std::string> header{"k", "d_k", "d_boundary_k", "ratio"};
  for (const auto& c : class_columns(fo.kind)) header.push_back(c);
  header.push_back("forward_residual");
  std::vector<std::vector<std::string>> rows;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : tr.records) {
    std::vector<std::string> row{std::to_string(r.k), format_number(r.d), format_number(r.d_boundary),
                                 std::isfinite(r.ratio) ? format_number(r.ratio) : "nan"};
    for (double m : r.margins.margins) {
      row.push_back(format_number(m));
      min_margin = std::min(min_margin, m);
    }
    row.push_back(format_number(r.forward_residual));
    rows.push_back(std::move(row));
  }
  write_csv(dir / "trace.csv", header, rows);
  write_field_csv(dir / "y.csv", fp.pair.y, g);
  write_boundary_csv(dir / "v.csv", fp.pair.v);
  write_field_csv(dir / "w.csv", fp.pair.w, g);

  const double residual = fp.verification.relative;
  report.check("verify_residual", residual, cfg.solver.residual_bound, residual <= cfg.solver.residual_bound);
  report.check("converged", tr.converged ? 1.0 : 0.0, 1.0, tr.converged);
  if (!cr.ratios.empty()) report.check("max_contraction_ratio", cr.max_ratio, 1.0, cr.max_ratio < 1.0);
  report.info("mean_contraction_ratio", cr.mean_ratio);
  report.info("predicted_shape", cr.predicted_shape);
  report.info("C_emp", cr.C_emp);
  for (std::size_t i = 0; i < tr.initial.values.size(); ++i) {
    report.info("y0_" + tr.initial.names[i], tr.initial.values[i], tr.initial.thresholds[i],
                tr.initial.margins[i] > 0.0 ? "pass" : "warn");
  }
  report.info("min_class_margin", min_margin, 0.0, tr.class_escape ? "warn" : "pass");
  const SourceBound sb = source_bound_check(g, fp.pair.y, f, ctx.system.s, ctx.system.weights.c,
                                            ctx.system.weights.rho_raw);
  report.info("source_bound", sb.lhs, sb.rhs);
  maybe_plot(cfg, dir, "plot_trace.py", kPlotTrace);
  maybe_plot(cfg, dir, "plot_state.py", kPlotState);

  CommandResult out;
  out.exit_code = finish(report, dir);
  out.directory = dir;
  out.summary = Summary("semilinear-solve")
                    .add("status", out.exit_code == kExitOk ? "ok" : "verification_failed")
                    .add("exit", out.exit_code)
                    .add("termination", tr.termination)
                    .add("iterations", static_cast<int>(tr.records.size()))
                    .add("max_ratio", cr.max_ratio)
                    .add("mean_ratio", cr.mean_ratio)
                    .add("residual", residual)
                    .add("class_escape", tr.class_escape ? "true" : "false")
                    .add("s", ctx.system.s)
                    .add("dir", dir.string())
                    .str();
  return out;
}

CommandResult cmd_verify_carleman(const RunConfig& cfg, const fs::path& dir) {
  prepare(cfg, dir);
  Context ctx = build_context(cfg, dir);
  const auto fields = random_dual_fields(ctx.setup.grid, cfg.solver.samples, cfg.solver.seed);
  std::vector<std::vector<std::string>> rows;
  double max_ratio = 0.0;
  int nonfinite = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double q = carleman_ratio(fields[i], ctx.system);
    if (!std::isfinite(q)) ++nonfinite;
    else max_ratio = std::max(max_ratio, q);
    rows.push_back({std::to_string(i), format_number(ctx.system.s), format_number(q)});
  }
  rows.push_back({"max", format_number(ctx.system.s), format_number(max_ratio)});
  write_csv(dir / "carleman.csv", {"sample", "s", "ratio"}, rows);
  Report report;
  report.check("nonfinite_ratios", nonfinite, 0.0, nonfinite == 0);
  report.info("max_ratio", max_ratio);
  maybe_plot(cfg, dir, "plot_carleman.py", kPlotCarleman);

  CommandResult out;
  out.exit_code = finish(report, dir);
  out.directory = dir;
  out.summary = Summary("verify-carleman")
                    .add("status", out.exit_code == kExitOk ? "ok" : "verification_failed")
                    .add("exit", out.exit_code)
                    .add("samples", cfg.solver.samples)
                    .add("seed", std::to_string(cfg.solver.seed))
                    .add("max_ratio", max_ratio)
                    .add("s", ctx.system.s)
                    .add("dir", dir.string())
                    .str();
  return out;
}

CommandResult cmd_verify_optimality(const RunConfig& cfg, const fs::path& dir) {
  prepare(cfg, dir);
  Context ctx = build_context(cfg, dir);
  const int unknowns = 2 * ctx.system.dual_size() + ctx.setup.grid.trace_count() * ctx.setup.grid.levels();
  if (unknowns > kMaxKKTUnknowns) {
    throw Error(ErrorCode::InvalidValue, "grid too large for the dense KKT oracle (" + std::to_string(unknowns) +
                                             " unknowns, limit " + std::to_string(kMaxKKTUnknowns) + ")");
  }
  const StateControlPair pair = solve_linear(ctx.system, ctx.setup.data, ctx.solver);
  const KKTResult kkt = optimality_check(pair, ctx.system, ctx.setup.data);
  Report report;
  report.check("kkt_discrepancy", kkt.discrepancy, cfg.solver.kkt_bound, kkt.discrepancy <= cfg.solver.kkt_bound);
  report.info("kkt_cost", kkt.cost);
  write_field_csv(dir / "y.csv", pair.y, ctx.setup.grid);
  write_boundary_csv(dir / "v.csv", pair.v);

  CommandResult out;
  out.exit_code = finish(report, dir);
  out.directory = dir;
  out.summary = Summary("verify-optimality")
                    .add("status", out.exit_code == kExitOk ? "ok" : "verification_failed")
                    .add("exit", out.exit_code)
                    .add("discrepancy", kkt.discrepancy)
                    .add("bound", cfg.solver.kkt_bound)
                    .add("cost", kkt.cost)
                    .add("dir", dir.string())
                    .str();
  return out;
}

CommandResult cmd_growth_check(const RunConfig& cfg, const fs::path& dir) {
  prepare(cfg, dir);
  const Nonlinearity f = make_nonlinearity(cfg.nonlinearity.name, cfg.nonlinearity.params);
  const GrowthCertificate cert = verify_growth(f, 1e8, 4001, false);
  std::vector<std::vector<std::string>> rows;
  for (double e = -6.0; e <= 8.0 + 1e-12; e += 0.25) {
    const double r = std::pow(10.0, e);
    const double bh = f.h.alpha1 + r * (f.h.alpha2 + f.h.beta_star * ln_plus_p(r, f.h.p));
    const double bp = f.hp.alpha + f.hp.beta_star * ln_plus_p(r, f.hp.p);
    rows.push_back({format_number(r), format_number(f(r)), format_number(bh),
                    f.df ? format_number(f.df(r)) : "nan", format_number(bp)});
  }
  write_csv(dir / "growth.csv", {"r", "f", "bound_H", "df", "bound_Hprime"}, rows);
  Report report;
  report.check("growth_" + cert.condition, cert.worst_slack, 0.0, cert.pass);
  report.info("alpha1", f.h.alpha1);
  report.info("alpha2", f.h.alpha2);
  report.info("beta_star_H", f.h.beta_star);
  report.info("alpha_Hprime", f.hp.alpha);
  report.info("beta_star_Hprime", f.hp.beta_star);

  CommandResult out;
  out.exit_code = finish(report, dir);
  out.directory = dir;
  out.summary = Summary("growth-check")
                    .add("status", out.exit_code == kExitOk ? "ok" : "verification_failed")
                    .add("exit", out.exit_code)
                    .add("nonlinearity", f.name)
                    .add("worst_slack", cert.worst_slack)
                    .add("worst_r", cert.worst_r)
                    .add("condition", cert.condition)
                    .add("dir", dir.string())
                    .str();
  return out;
}

CommandResult cmd_sweep(const RunConfig& cfg, const fs::path& dir, const std::string& param,
                        const std::vector<std::string>& values) {
  if (param.empty() || values.empty()) throw Error(ErrorCode::InvalidValue, "sweep needs --param and --values");
  std::vector<RunConfig> configs;
  for (const auto& v : values) {
    RunConfig c = cfg;
    set_config_value(c, param, v);
    configs.push_back(std::move(c));
  }
  prepare(cfg, dir);

  struct Outcome {
    int exit_code = kExitOk;
    std::string message;
    std::vector<std::string> metrics;
  };
  std::vector<Outcome> outcomes(values.size());
  auto run_one = [&](std::size_t i) {
    const fs::path sub = dir / (param + "=" + values[i]);
    Outcome& o = outcomes[i];
    try {
      const CommandResult r = cmd_semilinear_solve(configs[i], sub);
      o.exit_code = r.exit_code;
      o.message = r.summary;
    } catch (const Error& e) {
      o.exit_code = kExitSolver;
      o.message = std::string(to_string(e.code())) + ": " + e.what();
      std::error_code ec;
      fs::create_directories(sub, ec);
      std::ofstream(sub / "error.txt") << o.message << "\n";
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(values.size(), std::thread::hardware_concurrency()));
  std::size_t next = 0;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(m);
          if (next >= values.size()) return;
          i = next++;
        }
        run_one(i);
      }
    });
  }
  for (auto& t : pool) t.join();

  auto field = [](const std::string& summary, const std::string& key) {
    std::istringstream in(summary);
    std::string tok;
    while (in >> tok) {
      if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
    }
    return std::string("nan");
  };
  std::vector<std::vector<std::string>> rows;
  std::vector<double> xs, means;
  int worst = kExitOk;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Outcome& o = outcomes[i];
    worst = std::max(worst, o.exit_code);
    rows.push_back({param, values[i], std::to_string(o.exit_code), field(o.message, "termination"),
                    field(o.message, "iterations"), field(o.message, "mean_ratio"), field(o.message, "max_ratio"),
                    field(o.message, "residual"), field(o.message, "class_escape")});
    if (o.exit_code != kExitSolver) {
      try {
        const double x = std::stod(values[i]);
        const double y = std::stod(field(o.message, "mean_ratio"));
        if (x > 0.0 && y > 0.0) {
          xs.push_back(x);
          means.push_back(y);
        }
      } catch (const std::exception&) {
      }
    }
  }
  write_csv(dir / "sweep.csv",
            {"param", "value", "exit_code", "termination", "iterations", "mean_ratio", "max_ratio", "residual",
             "class_escape"},
            rows);
  Report report;
  for (std::size_t i = 0; i < values.size(); ++i) {
    report.info("run_" + param + "=" + values[i], outcomes[i].exit_code, 0.0,
                outcomes[i].exit_code == kExitOk ? "pass" : "fail");
  }
  std::string exponent = "nan";
  if (xs.size() >= 2) {
    const PowerLawFit fit = fit_power_law(xs, means);
    report.info("mean_ratio_exponent", fit.exponent);
    exponent = format_number(fit.exponent);
  }
  report.write(dir);
  maybe_plot(cfg, dir, "plot_sweep.py", kPlotSweep);

  CommandResult out;
  out.exit_code = worst;
  out.directory = dir;
  out.summary = Summary("sweep")
                    .add("status", worst == kExitOk ? "ok" : (worst == kExitVerification ? "verification_failed" : "error"))
                    .add("exit", worst)
                    .add("param", param)
                    .add("runs", static_cast<int>(values.size()))
                    .add("mean_ratio_exponent", exponent)
                    .add("dir", dir.string())
                    .str();
  return out;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"linear-solve",     "semilinear-solve", "verify-carleman",
                                              "verify-optimality", "growth-check",     "sweep"};
  return names;
}

CommandResult run_command(const CommandRequest& req) {
  CommandResult out;
  fs::path dir;
  auto fail = [&](int code, const std::string& kind, const std::string& message) {
    out.exit_code = code;
    out.directory = dir;
    std::string flat = message;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    out.summary = Summary(req.command).add("status", "error").add("exit", code).add("error", kind).str();
    if (!dir.empty()) {
      std::error_code ec;
      fs::create_directories(dir, ec);
      std::ofstream(dir / "error.txt") << kind << ": " << flat << "\n";
      out.summary += " dir=" + dir.string();
    }
    out.summary += " message=\"" + flat + "\"";
    return out;
  };

  if (std::find(command_names().begin(), command_names().end(), req.command) == command_names().end()) {
    return fail(kExitUsage, "UnknownCommand", "unknown command '" + req.command + "'");
  }
  RunConfig cfg;
  try {
    cfg = parse_config(req.config);
    if (req.seed) cfg.solver.seed = *req.seed;
  } catch (const Error& e) {
    if (const char* env = std::getenv("WAVECTL_OUT"); env && *env) dir = fs::path(env) / req.command;
    return fail(kExitUsage, to_string(e.code()), e.what());
  }
  dir = output_root(cfg) / req.command;
  try {
    if (req.command == "linear-solve") return cmd_linear_solve(cfg, dir);
    if (req.command == "semilinear-solve") return cmd_semilinear_solve(cfg, dir);
    if (req.command == "verify-carleman") return cmd_verify_carleman(cfg, dir);
    if (req.command == "verify-optimality") return cmd_verify_optimality(cfg, dir);
    if (req.command == "growth-check") return cmd_growth_check(cfg, dir);
    return cmd_sweep(cfg, dir, req.param, req.values);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::UnknownKey:
      case ErrorCode::InvalidValue:
      case ErrorCode::IoError:
        return fail(kExitUsage, to_string(e.code()), e.what());
      default:
        return fail(kExitSolver, to_string(e.code()), e.what());
    }
  } catch (const std::exception& e) {
    return fail(kExitSolver, "InternalError", e.what());
  }
}

}  // namespace wavectl
