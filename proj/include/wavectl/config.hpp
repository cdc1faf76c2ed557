#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "wavectl/fixed_point.hpp"
#include "wavectl/geometry.hpp"
#include "wavectl/linear_control.hpp"
#include "wavectl/nonlinearity.hpp"

namespace wavectl {

struct GridSettings {
  std::array<int, 2> nx{64, 64};  ///< interior nodes per axis
  std::optional<int> nt;          ///< unset selects the smallest count with CFL <= cfl
  double cfl = 0.9;
};

/// Named analytic profile (zero, sin_pi, x1mx, bump) or "csv:<path>", optionally
/// preceded by a factor as in "2*sin_pi".
struct ProfileSpec {
  double scale = 1.0;
  std::string name = "zero";
  std::filesystem::path csv;

  std::string to_string() const;
};

struct DataSettings {
  ProfileSpec u0{1.0, "sin_pi", {}};
  ProfileSpec u1;
  ProfileSpec z0;
  ProfileSpec z1;
};

struct NonlinearitySettings {
  std::string name = "superlinear";
  std::map<std::string, double> params{{"a", 0.05}, {"beta_star", 0.05}, {"p", 1.0}};
};

struct SolverSettings {
  SolverKind kind = SolverKind::SparseDirect;
  std::optional<double> epsilon;  ///< unset selects h dt
  double tolerance = 1e-10;
  int max_iter = 0;
  TraceOrder trace_order = TraceOrder::First;
  double fp_tol = 1e-8;
  int fp_max_iter = 50;
  ClassKind class_kind = ClassKind::C_s;
  double residual_bound = 5e-2;  ///< acceptance bound on the relative verify residual
  double kkt_bound = 1e-6;
  int samples = 100;             ///< dual fields drawn by verify-carleman
  unsigned long long seed = 42;
};

struct OutputSettings {
  std::filesystem::path directory = "wavectl_runs";
  bool plots = true;
};

struct RunConfig {
  GeometryConfig geometry;
  WeightParams weights;
  bool auto_s = false;  ///< s resolved from the data size
  GridSettings grid;
  DataSettings data;
  NonlinearitySettings nonlinearity;
  SolverSettings solver;
  OutputSettings output;
  std::filesystem::path base_dir;  ///< directory of the config file, for relative CSV paths
};

/// Parses INI text. `origin` names the source in error messages.
/// Throws ParseError (line:column), UnknownKey or InvalidValue.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

/// Sets one key given as "section.key" or a bare key searched in every section.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its resolved value, in a form parse_config_text reads back.
std::string render_config(const RunConfig& cfg);

/// Fully resolved run inputs: grid, weight model, cut-offs and data.
struct RunSetup {
  RunConfig config;
  SpaceTimeGrid grid;
  WeightModel model;
  CutoffProfile profile;
  ControlData data;
};

/// Builds the grid and data; resolves s = "auto" against the data size.
RunSetup resolve(const RunConfig& cfg);

Eigen::VectorXd sample_profile(const ProfileSpec& spec, const SpaceTimeGrid& grid, const std::filesystem::path& base);

}  // namespace wavectl
