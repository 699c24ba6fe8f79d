#pragma once

// Constant-degree lattices for the two triangular schemes.
//
// d2t7: hexagonal Bravais lattice, one node class, six unit velocities at
//       90 + 60*(j-1) degrees plus rest.  The 0-degree anchoring would make
//       the odd cubic moment row vanish on the velocity set and the moment
//       matrix singular, so the 90-degree anchoring is load-bearing.
// d2t4: centroids of a triangulation, two node classes (the two triangle
//       orientations), three unit velocities plus rest, dual index j -> j.
//
// Nodes always carry q slots; slot 0 is the rest direction and refers back
// to the node itself.  Missing neighbors across a wall are boundary links.

#include <trilbm/types.hh>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace trilbm {

enum class SchemeKind { d2t7, d2t4 };

struct BoundaryLink {
  NodeId node = -1;    // owning node
  int direction = -1;  // velocity slot cut by the wall
  Vec2 wall_point{0, 0};
};

// Underlying triangulation, kept so centroid lattices can be perturbed and
// so wall points can sit on physical triangle edges.
struct Triangulation {
  Mat2X vertices;                   // 2 x V
  MatXi triangles;                  // 3 x T, vertex ids, positive orientation
  std::vector<NodeId> tri_node;     // triangle -> lattice node
  std::vector<std::uint8_t> vertex_on_boundary;
};

struct Lattice {
  SchemeKind kind = SchemeKind::d2t7;
  int q = 0;          // slots per node including rest
  double dx = 1.0;    // node-to-node link length (exact for unperturbed builds)
  Mat2X positions;    // 2 x N

  // class c velocity table, 2 x q, column 0 zero; unperturbed lattices have
  // one (d2t7) or two (d2t4) classes
  std::vector<Mat2X> class_velocities;
  VecXi node_class;   // N

  // neighbors(j, n): node id, or encoded boundary link b as -(b+1)
  MatXi neighbors;    // q x N
  MatXi dual_index;   // q x N; slot at the neighbor pointing back here
  std::vector<BoundaryLink> boundary_links;

  std::vector<Vec2> wraps;  // periodic wrap vectors; empty for walled domains
  bool bravais = false;     // single node-independent, symmetric velocity set

  // exact per-node velocities after perturbation, 2 x (q*N); unset otherwise
  std::optional<Mat2X> node_velocities;
  std::optional<Triangulation> tri;
  // corners of the triangular domain (node corners for d2t7, physical
  // corners for d2t4); unset for periodic builds
  std::optional<std::array<Vec2, 3>> corners;

  int n_nodes() const { return int(positions.cols()); }

  bool link_is_boundary(NodeId n, int j) const { return neighbors(j, n) < 0; }
  const BoundaryLink& link(NodeId n, int j) const {
    return boundary_links[std::size_t(-neighbors(j, n) - 1)];
  }

  Vec2 velocity(NodeId n, int j) const {
    if (node_velocities) return node_velocities->col(Eigen::Index(n) * q + j);
    return class_velocities[std::size_t(node_class[n])].col(j);
  }

  // displacement to the j-neighbor reduced by the wrap lattice (periodic
  // domains only); equals velocity(n,j)*dx up to round-off
  Vec2 link_vector(NodeId n, int j) const;
};

// Triangular patch of the hexagonal lattice with n_edge nodes per side,
// n_edge*(n_edge+1)/2 nodes total.  Walls cut the missing links; wall points
// sit at the half-link.
Lattice build_d2t7_triangle(int n_edge, double dx);

// Fully periodic parallelogram patch, nx*ny nodes, wrap vectors along two of
// the lattice directions (both exact lattice vectors).  nx = ny = 1 wraps
// every link back onto the single node.
Lattice build_d2t7_periodic(int nx, int ny, double dx);

// Centroid lattice of the equilateral triangle cut into n_edge^2 triangles.
// dx is the centroid-to-centroid distance, i.e. triangle edge / sqrt(3).
// Boundary wall points sit on the midpoints of the physical boundary edges,
// which for the unperturbed mesh coincide with the half-link points.
Lattice build_d2t4_equilateral(int n_edge, double dx);

// Periodic rhombus of nx*ny cells, two nodes (one of each orientation) per
// cell.
Lattice build_d2t4_periodic(int nx, int ny, double dx);

enum class WallPlacement { half_link, edge_midpoint };

// Displaces interior triangulation vertices by a seeded uniform draw in a
// disc of radius amplitude*dx and rebuilds centroids and per-node velocities.
// Local duality is preserved exactly (each link vector is one subtraction).
// Boundary vertices stay put.  amplitude must stay below 0.3.
Lattice perturb(const Lattice& lat, double amplitude, std::uint64_t seed,
                WallPlacement wall = WallPlacement::edge_midpoint);

struct LatticeReport {
  struct Violation {
    std::string kind;
    NodeId node = -1;
    int slot = -1;
    double magnitude = 0.0;
  };
  std::vector<Violation> violations;
  bool positions_consistent = true;  // x_j = x + xi_j dx (mod wraps)
  bool duality_ok = true;            // xi_j(x) + xi_{n_j(x)}(x_j) = 0
  bool degree_ok = true;
  bool streaming_bijective = true;
  bool bravais_symmetric = true;     // single class, closed under xi -> -xi
  bool ok() const { return violations.empty(); }
};

LatticeReport validate(const Lattice& lat);

// Corners of the triangle on which Dirichlet data effectively lives: the
// d2t7 wall points lie on lines offset sqrt(3)*dx/4 outward from the node
// triangle, the d2t4 wall points on the physical triangle itself.
std::array<Vec2, 3> dirichlet_domain_corners(const Lattice& lat);

// shifts all node positions (and domain corners) so the domain centroid is
// at the origin
void center_domain(Lattice& lat);

}  // namespace trilbm
