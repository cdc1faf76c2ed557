#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wavectl/grid.hpp"

namespace wavectl {

/// Shortest text that reads back to the same double.
std::string format_number(double x);

/// Header line plus rows; cells are written verbatim.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Field CSV: "ix,it,value # nodes_x=.. nodes_y=.. levels=..", ix the flattened spatial index.
void write_field_csv(const std::filesystem::path& path, const ScalarField& field, const SpaceTimeGrid& grid);
ScalarField read_field_csv(const std::filesystem::path& path);

/// Boundary CSV: "ib,it,value # points=.. levels=..".
void write_boundary_csv(const std::filesystem::path& path, const BoundaryField& field);
BoundaryField read_boundary_csv(const std::filesystem::path& path);

/// One value per spatial node: "ix,value"; used for initial-data profiles.
Eigen::VectorXd read_slice_csv(const std::filesystem::path& path, int expected_nodes);

}  // namespace wavectl
