#pragma once

// Plain-text output: legacy VTK polydata for fields on lattices, CSV with
// full-precision numbers, JSON summaries.

#include <trilbm/lattice.hh>
#include <trilbm/types.hh>

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace trilbm {

// point cloud (d2t7) or triangle cells (d2t4, when the triangulation is
// kept) with one scalar array per (name, values) pair
void write_vtk(std::ostream& os, const Lattice& lat,
               const std::vector<std::pair<std::string, VecX>>& fields);
void write_vtk(const std::string& path, const Lattice& lat,
               const std::vector<std::pair<std::string, VecX>>& fields);

// 17 significant digits, comma separated, one header row
void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const std::vector<VecX>& data);
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<VecX>& data);

std::string format_full(double x);  // shortest round-trip-exact decimal

nlohmann::json lattice_summary(const Lattice& lat);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace trilbm
