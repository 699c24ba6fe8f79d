#include <trilbm/io.hh>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

namespace trilbm {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  return os;
}

void write_points(std::ostream& os, const Mat2X& pts) {
  os << "POINTS " << pts.cols() << " double\n";
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    os << format_full(pts(0, i)) << " " << format_full(pts(1, i)) << " 0\n";
  }
}

void write_scalars(std::ostream& os, const std::string& name, const VecX& v) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << format_full(v[i]) << "\n";
}

}  // namespace

void write_vtk(std::ostream& os, const Lattice& lat,
               const std::vector<std::pair<std::string, VecX>>& fields) {
  for (const auto& [name, v] : fields) {
    if (v.size() != lat.n_nodes()) {
      throw ConfigError("field '" + name + "' does not match the lattice size");
    }
  }
  os << "# vtk DataFile Version 3.0\ntri-lbm\nASCII\nDATASET POLYDATA\n";

  if (fields.empty()) {
    // mesh view: nodes plus wall points, one line per link
    const Eigen::Index n = lat.n_nodes();
    Mat2X pts(2, n + Eigen::Index(lat.boundary_links.size()));
    pts.leftCols(n) = lat.positions;
    for (std::size_t b = 0; b < lat.boundary_links.size(); ++b) {
      pts.col(n + Eigen::Index(b)) = lat.boundary_links[b].wall_point;
    }
    write_points(os, pts);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> lines;
    for (Eigen::Index node = 0; node < n; ++node) {
      for (int j = 1; j < lat.q; ++j) {
        const Eigen::Index to = lat.neighbors(j, node);
        if (to >= 0) {
          if (to > node) lines.emplace_back(node, to);
        } else {
          lines.emplace_back(node, n + Eigen::Index(-(to + 1)));
        }
      }
    }
    os << "LINES " << lines.size() << " " << 3 * lines.size() << "\n";
    for (auto [a, b] : lines) os << "2 " << a << " " << b << "\n";
    return;
  }

  if (lat.tri) {
    // cell-centered data on the kept triangulation
    const Triangulation& tri = *lat.tri;
    write_points(os, tri.vertices);
    os << "POLYGONS " << tri.triangles.cols() << " " << 4 * tri.triangles.cols() << "\n";
    for (Eigen::Index t = 0; t < tri.triangles.cols(); ++t) {
      os << "3 " << tri.triangles(0, t) << " " << tri.triangles(1, t) << " "
         << tri.triangles(2, t) << "\n";
    }
    os << "CELL_DATA " << tri.triangles.cols() << "\n";
    for (const auto& [name, v] : fields) {
      VecX per_cell(tri.triangles.cols());
      for (Eigen::Index t = 0; t < tri.triangles.cols(); ++t) per_cell[t] = v[tri.tri_node[std::size_t(t)]];
      write_scalars(os, name, per_cell);
    }
    return;
  }

  write_points(os, lat.positions);
  os << "VERTICES " << lat.n_nodes() << " " << 2 * lat.n_nodes() << "\n";
  for (Eigen::Index i = 0; i < lat.n_nodes(); ++i) os << "1 " << i << "\n";
  os << "POINT_DATA " << lat.n_nodes() << "\n";
  for (const auto& [name, v] : fields) write_scalars(os, name, v);
}

void write_vtk(const std::string& path, const Lattice& lat,
               const std::vector<std::pair<std::string, VecX>>& fields) {
  std::ofstream os = open_out(path);
  write_vtk(os, lat, fields);
}

void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const std::vector<VecX>& data) {
  if (columns.size() != data.size()) throw ConfigError("csv header does not match the data");
  Eigen::Index rows = data.empty() ? 0 : data[0].size();
  for (const VecX& c : data) {
    if (c.size() != rows) throw ConfigError("csv columns have unequal lengths");
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os << (i ? "," : "") << columns[i];
  }
  os << "\n";
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < data.size(); ++c) {
      os << (c ? "," : "") << format_full(data[c][r]);
    }
    os << "\n";
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<VecX>& data) {
  std::ofstream os = open_out(path);
  write_csv(os, columns, data);
}

std::string format_full(double x) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

nlohmann::json lattice_summary(const Lattice& lat) {
  nlohmann::json j;
  j["kind"] = lat.kind == SchemeKind::d2t7 ? "d2t7" : "d2t4";
  j["q"] = lat.q;
  j["dx"] = lat.dx;
  j["nodes"] = lat.n_nodes();
  j["bravais"] = lat.bravais;
  j["boundary_links"] = lat.boundary_links.size();
  for (const Vec2& w : lat.wraps) j["wraps"].push_back({w.x(), w.y()});
  if (lat.corners) {
    for (const Vec2& c : *lat.corners) j["corners"].push_back({c.x(), c.y()});
  }
  nlohmann::json pos = nlohmann::json::array(), nbr = nlohmann::json::array(),
                 dual = nlohmann::json::array();
  for (Eigen::Index n = 0; n < lat.n_nodes(); ++n) {
    pos.push_back({lat.positions(0, n), lat.positions(1, n)});
    nlohmann::json row = nlohmann::json::array(), drow = nlohmann::json::array();
    for (int k = 0; k < lat.q; ++k) {
      row.push_back(lat.neighbors(k, n));
      drow.push_back(lat.dual_index(k, n));
    }
    nbr.push_back(row);
    dual.push_back(drow);
  }
  j["positions"] = pos;
  j["neighbors"] = nbr;
  j["dual_index"] = dual;
  j["node_class"] = std::vector<int>(lat.node_class.data(), lat.node_class.data() + lat.n_nodes());
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << "\n";
}

}  // namespace trilbm
