#include "wavectl/field_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "wavectl/error.hpp"

namespace wavectl {

std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return in;
}

// key=value tokens after '#' in the header line.
std::map<std::string, long> header_meta(const std::string& line, const std::filesystem::path& path) {
  std::map<std::string, long> meta;
  const auto hash = line.find('#');
  if (hash == std::string::npos) throw Error(ErrorCode::ParseError, path.string() + ":1: missing grid metadata");
  std::istringstream tokens(line.substr(hash + 1));
  std::string tok;
  while (tokens >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    meta[tok.substr(0, eq)] = std::stol(tok.substr(eq + 1));
  }
  return meta;
}

struct Row {
  long a = 0;
  long b = 0;
  double value = 0.0;
};

Row parse_row(const std::string& line, int line_no, const std::filesystem::path& path, bool three) {
  Row r;
  std::istringstream in(line);
  std::string cell;
  std::vector<std::string> cells;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  const std::size_t want = three ? 3 : 2;
  if (cells.size() != want) {
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                           std::to_string(want) + " columns");
  }
  try {
    r.a = std::stol(cells[0]);
    if (three) r.b = std::stol(cells[1]);
    r.value = std::stod(cells[want - 1]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": malformed number");
  }
  return r;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field, const SpaceTimeGrid& grid) {
  auto out = open_out(path);
  out << "ix,it,value # nodes_x=" << grid.nodes_along(0) << " nodes_y=" << grid.nodes_along(1)
      << " levels=" << field.levels << '\n';
  for (int n = 0; n < field.levels; ++n) {
    for (int k = 0; k < field.spatial_nodes; ++k) out << k << ',' << n << ',' << format_number(field(k, n)) << '\n';
  }
}

ScalarField read_field_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  auto meta = header_meta(line, path);
  const int spatial = static_cast<int>(meta["nodes_x"] * std::max(1L, meta["nodes_y"]));
  const int levels = static_cast<int>(meta["levels"]);
  ScalarField f(spatial, levels);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Row r = parse_row(line, line_no, path, true);
    if (r.a < 0 || r.a >= spatial || r.b < 0 || r.b >= levels) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": index out of range");
    }
    f(static_cast<int>(r.a), static_cast<int>(r.b)) = r.value;
  }
  return f;
}

void write_boundary_csv(const std::filesystem::path& path, const BoundaryField& field) {
  auto out = open_out(path);
  out << "ib,it,value # points=" << field.points << " levels=" << field.levels << '\n';
  for (int n = 0; n < field.levels; ++n) {
    for (int b = 0; b < field.points; ++b) out << b << ',' << n << ',' << format_number(field(b, n)) << '\n';
  }
}

BoundaryField read_boundary_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  auto meta = header_meta(line, path);
  BoundaryField f(static_cast<int>(meta["points"]), static_cast<int>(meta["levels"]));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Row r = parse_row(line, line_no, path, true);
    if (r.a < 0 || r.a >= f.points || r.b < 0 || r.b >= f.levels) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": index out of range");
    }
    f(static_cast<int>(r.a), static_cast<int>(r.b)) = r.value;
  }
  return f;
}

Eigen::VectorXd read_slice_csv(const std::filesystem::path& path, int expected_nodes) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(expected_nodes);
  int line_no = 1;
  int count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Row r = parse_row(line, line_no, path, false);
    if (r.a < 0 || r.a >= expected_nodes) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": node index out of range");
    }
    out[r.a] = r.value;
    ++count;
  }
  if (count != expected_nodes) {
    throw Error(ErrorCode::NonSquareSliceMismatch, path.string() + ": expected " + std::to_string(expected_nodes) +
                                                       " values, found " + std::to_string(count));
  }
  return out;
}

}  // namespace wavectl
