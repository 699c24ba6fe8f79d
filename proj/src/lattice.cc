#include <trilbm/lattice.hh>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace trilbm {

namespace {

const double kSqrt3 = std::sqrt(3.0);

// columns j = 1..6 at angles 90 + 60*(j-1) degrees
Mat2X d2t7_velocities() {
  Mat2X xi(2, 7);
  xi.col(0) = Vec2(0.0, 0.0);
  xi.col(1) = Vec2(0.0, 1.0);
  xi.col(2) = Vec2(-kSqrt3 / 2, 0.5);
  xi.col(3) = Vec2(-kSqrt3 / 2, -0.5);
  xi.col(4) = Vec2(0.0, -1.0);
  xi.col(5) = Vec2(kSqrt3 / 2, -0.5);
  xi.col(6) = Vec2(kSqrt3 / 2, 0.5);
  return xi;
}

int sigma7(int j) { return j == 0 ? 0 : 1 + (j + 2) % 6; }

// index offsets matching d2t7_velocities on the basis a1 = dx(sqrt3/2, 1/2),
// a2 = dx(0, 1)
constexpr int kOff7[7][2] = {{0, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}, {1, 0}};

std::pair<Mat2X, Mat2X> d2t4_velocities() {
  Mat2X left(2, 4);
  left.col(0) = Vec2(0.0, 0.0);
  left.col(1) = Vec2(-1.0, 0.0);
  left.col(2) = Vec2(0.5, -kSqrt3 / 2);
  left.col(3) = Vec2(0.5, kSqrt3 / 2);
  return {left, -left};
}

void check_size(const char* what, int n, int least) {
  if (n < least) {
    throw ConfigError(std::string(what) + " must be at least " + std::to_string(least) +
                      ", got " + std::to_string(n));
  }
}

void check_dx(double dx) {
  if (!(dx > 0.0)) throw ConfigError("dx must be positive");
}

int add_wall(Lattice& lat, NodeId n, int j, const Vec2& w) {
  lat.boundary_links.push_back({n, j, w});
  return -int(lat.boundary_links.size());
}

double uniform01(std::mt19937_64& rng) {
  // fixed mapping instead of std::uniform_real_distribution, whose output is
  // implementation defined; determinism across toolchains matters here
  return double(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Vec2 Lattice::link_vector(NodeId n, int j) const {
  const NodeId m = neighbors(j, n);
  Vec2 d = positions.col(m) - positions.col(n);
  if (wraps.empty()) return d;
  const Vec2 target = velocity(n, j) * dx;
  Vec2 best = d;
  double best_err = (d - target).norm();
  for (int c1 = -1; c1 <= 1; ++c1) {
    for (int c2 = -1; c2 <= 1; ++c2) {
      const Vec2 cand = d + c1 * wraps[0] + (wraps.size() > 1 ? c2 * wraps[1] : Vec2(0, 0));
      const double err = (cand - target).norm();
      if (err < best_err) {
        best_err = err;
        best = cand;
      }
    }
  }
  return best;
}

Lattice build_d2t7_triangle(int n_edge, double dx) {
  check_size("n_edge", n_edge, 2);
  check_dx(dx);
  const int n = n_edge;
  const int N = n * (n + 1) / 2;
  const Vec2 a1 = dx * Vec2(kSqrt3 / 2, 0.5);
  const Vec2 a2 = dx * Vec2(0.0, 1.0);

  // row i holds nodes (i, 0..n-1-i)
  std::vector<int> base(std::size_t(n) + 1, 0);
  for (int i = 0; i < n; ++i) base[std::size_t(i) + 1] = base[std::size_t(i)] + (n - i);
  auto id = [&](int i, int j) { return NodeId(base[std::size_t(i)] + j); };

  Lattice lat;
  lat.kind = SchemeKind::d2t7;
  lat.q = 7;
  lat.dx = dx;
  lat.bravais = true;
  lat.positions.resize(2, N);
  lat.class_velocities = {d2t7_velocities()};
  lat.node_class = VecXi::Zero(N);
  lat.neighbors.resize(7, N);
  lat.dual_index.resize(7, N);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - i; ++j) {
      const NodeId me = id(i, j);
      lat.positions.col(me) = double(i) * a1 + double(j) * a2;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - i; ++j) {
      const NodeId me = id(i, j);
      lat.neighbors(0, me) = me;
      lat.dual_index(0, me) = 0;
      for (int d = 1; d < 7; ++d) {
        const int ti = i + kOff7[d][0];
        const int tj = j + kOff7[d][1];
        lat.dual_index(d, me) = sigma7(d);
        if (ti >= 0 && tj >= 0 && ti + tj <= n - 1) {
          lat.neighbors(d, me) = id(ti, tj);
        } else {
          const Vec2 w = lat.positions.col(me) + 0.5 * dx * lat.class_velocities[0].col(d);
          lat.neighbors(d, me) = add_wall(lat, me, d, w);
        }
      }
    }
  }
  lat.corners = {{Vec2(0, 0), double(n - 1) * a1, double(n - 1) * a2}};
  return lat;
}

Lattice build_d2t7_periodic(int nx, int ny, double dx) {
  check_size("nx", nx, 1);
  check_size("ny", ny, 1);
  check_dx(dx);
  const Vec2 a1 = dx * Vec2(kSqrt3 / 2, 0.5);
  const Vec2 a2 = dx * Vec2(0.0, 1.0);
  const int N = nx * ny;
  auto id = [&](int i, int j) { return NodeId(i + nx * j); };

  Lattice lat;
  lat.kind = SchemeKind::d2t7;
  lat.q = 7;
  lat.dx = dx;
  lat.bravais = true;
  lat.positions.resize(2, N);
  lat.class_velocities = {d2t7_velocities()};
  lat.node_class = VecXi::Zero(N);
  lat.neighbors.resize(7, N);
  lat.dual_index.resize(7, N);
  lat.wraps = {double(nx) * a1, double(ny) * a2};

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const NodeId me = id(i, j);
      lat.positions.col(me) = double(i) * a1 + double(j) * a2;
      lat.neighbors(0, me) = me;
      lat.dual_index(0, me) = 0;
      for (int d = 1; d < 7; ++d) {
        const int ti = ((i + kOff7[d][0]) % nx + nx) % nx;
        const int tj = ((j + kOff7[d][1]) % ny + ny) % ny;
        lat.neighbors(d, me) = id(ti, tj);
        lat.dual_index(d, me) = sigma7(d);
      }
    }
  }
  return lat;
}

Lattice build_d2t4_equilateral(int n_edge, double dx) {
  check_size("n_edge", n_edge, 1);
  check_dx(dx);
  const int n = n_edge;
  const double a = dx * kSqrt3;  // physical triangle edge
  const Vec2 A1 = a * Vec2(kSqrt3 / 2, 0.5);
  const Vec2 A2 = a * Vec2(0.0, 1.0);

  // vertex lattice i + j <= n
  std::vector<int> vbase(std::size_t(n) + 2, 0);
  for (int i = 0; i <= n; ++i) vbase[std::size_t(i) + 1] = vbase[std::size_t(i)] + (n + 1 - i);
  auto vid = [&](int i, int j) { return vbase[std::size_t(i)] + j; };
  const int V = vbase[std::size_t(n) + 1];

  // lower cells i + j <= n-1, upper cells i + j <= n-2
  std::vector<int> lbase(std::size_t(n) + 1, 0);
  for (int i = 0; i < n; ++i) lbase[std::size_t(i) + 1] = lbase[std::size_t(i)] + (n - i);
  auto lid = [&](int i, int j) { return NodeId(lbase[std::size_t(i)] + j); };
  const int nL = lbase[std::size_t(n)];
  std::vector<int> rbase(std::size_t(n), 0);
  for (int i = 0; i + 1 < n; ++i) rbase[std::size_t(i) + 1] = rbase[std::size_t(i)] + (n - 1 - i);
  auto rid = [&](int i, int j) { return NodeId(nL + rbase[std::size_t(i)] + j); };
  const int N = n * n;

  Lattice lat;
  lat.kind = SchemeKind::d2t4;
  lat.q = 4;
  lat.dx = dx;
  lat.positions.resize(2, N);
  auto [vl, vr] = d2t4_velocities();
  lat.class_velocities = {vl, vr};
  lat.node_class.resize(N);
  lat.neighbors.resize(4, N);
  lat.dual_index.resize(4, N);

  Triangulation tri;
  tri.vertices.resize(2, V);
  tri.triangles.resize(3, N);
  tri.tri_node.resize(std::size_t(N));
  tri.vertex_on_boundary.resize(std::size_t(V));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n - i; ++j) {
      tri.vertices.col(vid(i, j)) = double(i) * A1 + double(j) * A2;
      tri.vertex_on_boundary[std::size_t(vid(i, j))] = (i == 0 || j == 0 || i + j == n) ? 1 : 0;
    }
  }
  auto centroid = [&](int va, int vb, int vc) {
    return Vec2((tri.vertices.col(va) + tri.vertices.col(vb) + tri.vertices.col(vc)) / 3.0);
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - i; ++j) {
      const NodeId me = lid(i, j);
      const int va = vid(i, j), vb = vid(i + 1, j), vc = vid(i, j + 1);
      tri.triangles.col(me) << va, vb, vc;
      tri.tri_node[std::size_t(me)] = me;
      lat.positions.col(me) = centroid(va, vb, vc);
      lat.node_class[me] = 0;
      lat.neighbors(0, me) = me;
      for (int d = 0; d < 4; ++d) lat.dual_index(d, me) = d;
      // slot 1 crosses edge (i,j)-(i,j+1); 2 crosses (i,j)-(i+1,j); 3 the
      // shared edge (i+1,j)-(i,j+1)
      if (i >= 1) {
        lat.neighbors(1, me) = rid(i - 1, j);
      } else {
        lat.neighbors(1, me) =
            add_wall(lat, me, 1, 0.5 * (tri.vertices.col(va) + tri.vertices.col(vc)));
      }
      if (j >= 1) {
        lat.neighbors(2, me) = rid(i, j - 1);
      } else {
        lat.neighbors(2, me) =
            add_wall(lat, me, 2, 0.5 * (tri.vertices.col(va) + tri.vertices.col(vb)));
      }
      if (i + j <= n - 2) {
        lat.neighbors(3, me) = rid(i, j);
      } else {
        lat.neighbors(3, me) =
            add_wall(lat, me, 3, 0.5 * (tri.vertices.col(vb) + tri.vertices.col(vc)));
      }
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < n - 1 - i; ++j) {
      const NodeId me = rid(i, j);
      const int va = vid(i + 1, j), vb = vid(i + 1, j + 1), vc = vid(i, j + 1);
      tri.triangles.col(me) << va, vb, vc;
      tri.tri_node[std::size_t(me)] = me;
      lat.positions.col(me) = centroid(va, vb, vc);
      lat.node_class[me] = 1;
      lat.neighbors(0, me) = me;
      for (int d = 0; d < 4; ++d) lat.dual_index(d, me) = d;
      lat.neighbors(1, me) = lid(i + 1, j);
      lat.neighbors(2, me) = lid(i, j + 1);
      lat.neighbors(3, me) = lid(i, j);
    }
  }
  lat.tri = std::move(tri);
  lat.corners = {{Vec2(0, 0), double(n) * A1, double(n) * A2}};
  return lat;
}

Lattice build_d2t4_periodic(int nx, int ny, double dx) {
  check_size("nx", nx, 1);
  check_size("ny", ny, 1);
  check_dx(dx);
  const double a = dx * kSqrt3;
  const Vec2 A1 = a * Vec2(kSqrt3 / 2, 0.5);
  const Vec2 A2 = a * Vec2(0.0, 1.0);
  const int cells = nx * ny;
  auto lid = [&](int i, int j) { return NodeId(i + nx * j); };
  auto rid = [&](int i, int j) { return NodeId(cells + i + nx * j); };
  auto wrap = [&](int i, int m) { return (i % m + m) % m; };

  Lattice lat;
  lat.kind = SchemeKind::d2t4;
  lat.q = 4;
  lat.dx = dx;
  lat.positions.resize(2, 2 * cells);
  auto [vl, vr] = d2t4_velocities();
  lat.class_velocities = {vl, vr};
  lat.node_class.resize(2 * cells);
  lat.neighbors.resize(4, 2 * cells);
  lat.dual_index.resize(4, 2 * cells);
  lat.wraps = {double(nx) * A1, double(ny) * A2};

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 p = double(i) * A1 + double(j) * A2;
      const NodeId l = lid(i, j), r = rid(i, j);
      lat.positions.col(l) = p + a * Vec2(kSqrt3 / 6, 0.5);
      lat.positions.col(r) = p + a * Vec2(kSqrt3 / 3, 1.0);
      lat.node_class[l] = 0;
      lat.node_class[r] = 1;
      for (int d = 0; d < 4; ++d) {
        lat.dual_index(d, l) = d;
        lat.dual_index(d, r) = d;
      }
      lat.neighbors(0, l) = l;
      lat.neighbors(1, l) = rid(wrap(i - 1, nx), j);
      lat.neighbors(2, l) = rid(i, wrap(j - 1, ny));
      lat.neighbors(3, l) = rid(i, j);
      lat.neighbors(0, r) = r;
      lat.neighbors(1, r) = lid(wrap(i + 1, nx), j);
      lat.neighbors(2, r) = lid(i, wrap(j + 1, ny));
      lat.neighbors(3, r) = lid(i, j);
    }
  }
  return lat;
}

Lattice perturb(const Lattice& lat, double amplitude, std::uint64_t seed, WallPlacement wall) {
  if (amplitude < 0.0) throw ConfigError("perturbation amplitude must be nonnegative");
  if (amplitude >= 0.3) throw ConfigError("perturbation amplitude must stay below 0.3");
  if (amplitude == 0.0) return lat;

  Lattice out = lat;
  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    const double r = amplitude * lat.dx * std::sqrt(uniform01(rng));
    const double phi = 2.0 * M_PI * uniform01(rng);
    return Vec2(r * std::cos(phi), r * std::sin(phi));
  };

  if (lat.kind == SchemeKind::d2t4) {
    if (!lat.tri) throw ConfigError("perturb needs the centroid lattice's triangulation");
    Triangulation& tri = *out.tri;
    for (Eigen::Index v = 0; v < tri.vertices.cols(); ++v) {
      if (!tri.vertex_on_boundary[std::size_t(v)]) tri.vertices.col(v) += draw();
    }
    for (Eigen::Index t = 0; t < tri.triangles.cols(); ++t) {
      const Vec2 pa = tri.vertices.col(tri.triangles(0, t));
      const Vec2 pb = tri.vertices.col(tri.triangles(1, t));
      const Vec2 pc = tri.vertices.col(tri.triangles(2, t));
      const Vec2 e1 = pb - pa, e2 = pc - pa;
      if (e1.x() * e2.y() - e1.y() * e2.x() <= 0.0) {
        throw GeometryError("perturbation inverted triangle " + std::to_string(t));
      }
      out.positions.col(tri.tri_node[std::size_t(t)]) = (pa + pb + pc) / 3.0;
    }
  } else {
    // move interior nodes directly; nodes with any cut link stay put
    for (NodeId n = 0; n < lat.n_nodes(); ++n) {
      bool interior = true;
      for (int j = 1; j < lat.q; ++j) interior = interior && !lat.link_is_boundary(n, j);
      if (interior) out.positions.col(n) += draw();
    }
  }

  Mat2X vel(2, Eigen::Index(lat.q) * lat.n_nodes());
  for (NodeId n = 0; n < lat.n_nodes(); ++n) {
    vel.col(Eigen::Index(n) * lat.q) = Vec2(0, 0);
    for (int j = 1; j < lat.q; ++j) {
      const Eigen::Index slot = Eigen::Index(n) * lat.q + j;
      if (!lat.link_is_boundary(n, j)) {
        Vec2 d = out.positions.col(lat.neighbors(j, n)) - out.positions.col(n);
        if (!lat.wraps.empty()) {
          // unperturbed wrap reduction still applies: the representative
          // nearest the original link vector
          const Vec2 ref = lat.velocity(n, j) * lat.dx;
          for (const Vec2& w : lat.wraps) {
            while ((d - w - ref).norm() < (d - ref).norm()) d -= w;
            while ((d + w - ref).norm() < (d - ref).norm()) d += w;
          }
        }
        vel.col(slot) = d / lat.dx;
      } else {
        const int b = -lat.neighbors(j, n) - 1;
        if (wall == WallPlacement::edge_midpoint && lat.kind == SchemeKind::d2t4) {
          // boundary edge endpoints never move, so the stored point stands
          const Vec2 w = out.boundary_links[std::size_t(b)].wall_point;
          vel.col(slot) = 2.0 * (w - Vec2(out.positions.col(n))) / lat.dx;
        } else {
          const Vec2 xi = lat.velocity(n, j);
          vel.col(slot) = xi;
          out.boundary_links[std::size_t(b)].wall_point =
              Vec2(out.positions.col(n)) + 0.5 * lat.dx * xi;
        }
      }
    }
  }
  out.node_velocities = std::move(vel);
  out.bravais = false;
  return out;
}

LatticeReport validate(const Lattice& lat) {
  LatticeReport rep;
  const int N = lat.n_nodes();
  const int q = lat.q;
  auto flag = [&](const char* kind, NodeId n, int j, double mag, bool& ok) {
    rep.violations.push_back({kind, n, j, mag});
    ok = false;
  };

  std::vector<std::uint8_t> hit(std::size_t(q) * std::size_t(N), 0);
  for (NodeId n = 0; n < N; ++n) {
    if (lat.neighbors(0, n) != n || lat.dual_index(0, n) != 0) {
      flag("rest-slot", n, 0, 0.0, rep.degree_ok);
    }
    std::vector<NodeId> seen;
    for (int j = 0; j < q; ++j) {
      const NodeId m = lat.neighbors(j, n);
      if (m < 0) {
        const std::size_t b = std::size_t(-m - 1);
        if (b >= lat.boundary_links.size()) {
          flag("range", n, j, 0.0, rep.degree_ok);
          continue;
        }
        const BoundaryLink& bl = lat.boundary_links[b];
        if (bl.node != n || bl.direction != j) flag("wall-ref", n, j, 0.0, rep.degree_ok);
        const Vec2 d = bl.wall_point - Vec2(lat.positions.col(n));
        const Vec2 full = lat.velocity(n, j) * lat.dx;
        const double t = d.dot(full) / full.squaredNorm();
        const double off = (d - t * full).norm();
        if (t < -1e-12 || t > 1.0 + 1e-12 || off > 1e-9 * lat.dx) {
          flag("wall-point", n, j, off, rep.degree_ok);
        }
        continue;
      }
      if (m >= N) {
        flag("range", n, j, 0.0, rep.degree_ok);
        continue;
      }
      if (j == 0) continue;
      seen.push_back(m);
      const int dj = lat.dual_index(j, n);
      if (dj < 0 || dj >= q) {
        flag("range", n, j, 0.0, rep.degree_ok);
        continue;
      }
      if (lat.neighbors(dj, m) != n) flag("reciprocity", n, j, 0.0, rep.duality_ok);
      if (lat.dual_index(dj, m) != j) flag("involution", n, j, 0.0, rep.duality_ok);

      const Vec2 dual_sum = lat.velocity(n, j) + lat.velocity(m, dj);
      if (dual_sum.norm() > 1e-14) flag("duality", n, j, dual_sum.norm(), rep.duality_ok);

      const Vec2 gap = lat.link_vector(n, j) - lat.velocity(n, j) * lat.dx;
      if (gap.norm() > 1e-9 * lat.dx) flag("position", n, j, gap.norm(), rep.positions_consistent);

      std::uint8_t& cell = hit[std::size_t(m) * std::size_t(q) + std::size_t(dj)];
      if (cell) flag("stream-collision", m, dj, 0.0, rep.streaming_bijective);
      cell = 1;
    }
    if (lat.wraps.empty()) {
      std::sort(seen.begin(), seen.end());
      if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
        flag("degree", n, -1, 0.0, rep.degree_ok);
      }
    }
  }
  // every incoming slot must be fed exactly once, by a link or by a wall
  for (const BoundaryLink& bl : lat.boundary_links) {
    std::uint8_t& cell = hit[std::size_t(bl.node) * std::size_t(q) + std::size_t(bl.direction)];
    if (cell) flag("stream-collision", bl.node, bl.direction, 0.0, rep.streaming_bijective);
    cell = 1;
  }
  for (NodeId n = 0; n < N; ++n) {
    for (int j = 1; j < q; ++j) {
      if (!hit[std::size_t(n) * std::size_t(q) + std::size_t(j)]) {
        flag("stream-gap", n, j, 0.0, rep.streaming_bijective);
      }
    }
  }

  if (lat.bravais) {
    bool sym = lat.class_velocities.size() == 1 && !lat.node_velocities;
    if (sym) {
      const Mat2X& xi = lat.class_velocities[0];
      for (int j = 1; j < q; ++j) {
        bool found = false;
        for (int l = 1; l < q; ++l) found = found || (xi.col(j) + xi.col(l)).norm() < 1e-14;
        sym = sym && found;
      }
    }
    if (!sym) flag("bravais", -1, -1, 0.0, rep.bravais_symmetric);
  }
  return rep;
}

std::array<Vec2, 3> dirichlet_domain_corners(const Lattice& lat) {
  if (!lat.corners) throw GeometryError("lattice has no walled triangular domain");
  if (lat.kind == SchemeKind::d2t4) return *lat.corners;
  // d2t7 wall points lie on lines offset sqrt(3)dx/4 outward; offsetting all
  // three sides of an equilateral triangle scales it about its center
  const auto& c = *lat.corners;
  const Vec2 g = (c[0] + c[1] + c[2]) / 3.0;
  const double side = (c[1] - c[0]).norm();
  const double factor = (side + 1.5 * lat.dx) / side;
  return {g + factor * (c[0] - g), g + factor * (c[1] - g), g + factor * (c[2] - g)};
}

void center_domain(Lattice& lat) {
  Vec2 g;
  if (lat.corners) {
    const auto c = dirichlet_domain_corners(lat);
    g = (c[0] + c[1] + c[2]) / 3.0;
  } else {
    g = lat.positions.rowwise().mean();
  }
  lat.positions.colwise() -= g;
  if (lat.tri) lat.tri->vertices.colwise() -= g;
  if (lat.corners) {
    for (Vec2& c : *lat.corners) c -= g;
  }
  for (BoundaryLink& b : lat.boundary_links) b.wall_point -= g;
}

}  // namespace trilbm
