// Lattice builders: frozen sizes, structural invariants, perturbation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <trilbm/lattice.hh>

#include <cmath>
#include <set>

using namespace trilbm;

TEST_CASE("triangle patch sizes are the closed forms") {
  // n(n+1)/2 nodes, 6n cut links
  Lattice l61 = build_d2t7_triangle(61, 1.0);
  CHECK(l61.n_nodes() == 1891);
  CHECK(l61.q == 7);
  CHECK(int(l61.boundary_links.size()) == 366);
  CHECK(l61.bravais);
  CHECK(validate(l61).ok());

  Lattice l10 = build_d2t7_triangle(10, 0.25);
  CHECK(l10.n_nodes() == 55);
  CHECK(int(l10.boundary_links.size()) == 60);
  CHECK(validate(l10).ok());

  // n^2 centroids, 3n wall edges
  Lattice t8 = build_d2t4_equilateral(8, 1.0);
  CHECK(t8.n_nodes() == 64);
  CHECK(t8.q == 4);
  CHECK(int(t8.boundary_links.size()) == 24);
  CHECK_FALSE(t8.bravais);
  CHECK(validate(t8).ok());
  // both orientations present
  std::set<int> classes(t8.node_class.begin(), t8.node_class.end());
  CHECK(classes == std::set<int>{0, 1});
}

TEST_CASE("periodic patches wrap without walls") {
  Lattice pipe = build_d2t7_periodic(96, 4, 1.0);
  CHECK(pipe.n_nodes() == 384);
  CHECK(pipe.boundary_links.empty());
  CHECK(pipe.wraps.size() == 2);
  CHECK(validate(pipe).ok());

  Lattice rect = build_d2t4_periodic(8, 8, 1.0);
  CHECK(rect.n_nodes() == 128);
  CHECK(rect.boundary_links.empty());
  CHECK(validate(rect).ok());

  // wrap-all case: every link returns to the single node
  Lattice one = build_d2t7_periodic(1, 1, 1.0);
  CHECK(one.n_nodes() == 1);
  for (int j = 0; j < one.q; ++j) CHECK(one.neighbors(j, 0) == 0);
  CHECK(validate(one).ok());
}

TEST_CASE("velocity geometry") {
  Lattice l = build_d2t7_triangle(5, 2.0);
  const Mat2X& xi = l.class_velocities[0];
  CHECK(xi.col(0).norm() == 0.0);
  for (int j = 1; j < 7; ++j) {
    CHECK(xi.col(j).norm() == doctest::Approx(1.0).epsilon(1e-15));
    // 90 + 60(j-1) degrees
    const double th = M_PI / 2 + (j - 1) * M_PI / 3;
    CHECK(xi(0, j) == doctest::Approx(std::cos(th)).epsilon(1e-14));
    CHECK(xi(1, j) == doctest::Approx(std::sin(th)).epsilon(1e-14));
  }

  Lattice t = build_d2t4_equilateral(4, 1.0);
  // the two orientation classes carry opposite velocity sets
  const Mat2X& a = t.class_velocities[0];
  const Mat2X& b = t.class_velocities[1];
  CHECK((a + b).norm() == 0.0);
  // centroid spacing equals dx on every interior link
  for (NodeId n = 0; n < t.n_nodes(); ++n) {
    for (int j = 1; j < t.q; ++j) {
      if (t.link_is_boundary(n, j)) continue;
      CHECK(t.link_vector(n, j).norm() == doctest::Approx(t.dx).epsilon(1e-12));
    }
  }
}

TEST_CASE("duality and streaming are exact on the builders") {
  for (const Lattice& l : {build_d2t7_triangle(12, 1.0), build_d2t4_equilateral(9, 0.5),
                           build_d2t7_periodic(6, 4, 1.0), build_d2t4_periodic(5, 3, 1.0)}) {
    LatticeReport rep = validate(l);
    CHECK(rep.ok());
    CHECK(rep.duality_ok);
    CHECK(rep.streaming_bijective);
    CHECK(rep.positions_consistent);
    // dual index is an involution across each link
    for (NodeId n = 0; n < l.n_nodes(); ++n) {
      for (int j = 1; j < l.q; ++j) {
        if (l.link_is_boundary(n, j)) continue;
        const NodeId m = l.neighbors(j, n);
        const int dj = l.dual_index(j, n);
        CHECK(l.neighbors(dj, m) == n);
        CHECK(l.dual_index(dj, m) == j);
      }
    }
  }
}

TEST_CASE("centroid duality uses the same slot both ways") {
  // the orientation pairing makes n_j = j on the unperturbed mesh
  Lattice t = build_d2t4_equilateral(6, 1.0);
  for (NodeId n = 0; n < t.n_nodes(); ++n) {
    for (int j = 1; j < t.q; ++j) {
      if (!t.link_is_boundary(n, j)) CHECK(t.dual_index(j, n) == j);
    }
  }
}

TEST_CASE("validation flags an injected duality fault") {
  Lattice t = perturb(build_d2t4_equilateral(6, 1.0), 0.05, 7);
  REQUIRE(validate(t).ok());
  // bend one interior link's velocity below the position tolerance but above
  // the duality one: the fault is seen from both ends, nothing else trips
  NodeId n = -1;
  int j = -1;
  for (NodeId c = 0; c < t.n_nodes() && n < 0; ++c) {
    for (int d = 1; d < t.q; ++d) {
      if (!t.link_is_boundary(c, d)) {
        n = c;
        j = d;
        break;
      }
    }
  }
  REQUIRE(n >= 0);
  t.node_velocities->col(Eigen::Index(n) * t.q + j) += Vec2(1e-10, 0);
  LatticeReport rep = validate(t);
  CHECK_FALSE(rep.ok());
  CHECK_FALSE(rep.duality_ok);
  CHECK(rep.positions_consistent);
  CHECK(rep.streaming_bijective);
  REQUIRE(rep.violations.size() == 2);
  for (const auto& v : rep.violations) CHECK(v.kind == "duality");
}

TEST_CASE("perturbation is seeded, boundary-fixed and duality-preserving") {
  Lattice base = build_d2t4_equilateral(10, 1.0);
  Lattice p1 = perturb(base, 0.1, 42);
  Lattice p2 = perturb(base, 0.1, 42);
  Lattice p3 = perturb(base, 0.1, 43);
  CHECK((p1.positions - p2.positions).norm() == 0.0);
  CHECK((p1.positions - p3.positions).norm() > 0.0);
  CHECK((p1.positions - base.positions).norm() > 0.0);
  CHECK_FALSE(p1.bravais);

  // wall points still sit on the fixed boundary edges
  for (std::size_t b = 0; b < p1.boundary_links.size(); ++b) {
    CHECK((p1.boundary_links[b].wall_point - base.boundary_links[b].wall_point).norm() == 0.0);
  }

  LatticeReport rep = validate(p1);
  CHECK(rep.ok());

  // per-node velocities come from single subtractions: duality is exact
  for (NodeId n = 0; n < p1.n_nodes(); ++n) {
    for (int j = 1; j < p1.q; ++j) {
      if (p1.link_is_boundary(n, j)) continue;
      const NodeId m = p1.neighbors(j, n);
      const int dj = p1.dual_index(j, n);
      CHECK((p1.velocity(n, j) + p1.velocity(m, dj)).norm() == 0.0);
    }
  }

  CHECK_THROWS_AS(perturb(base, 0.5, 1), ConfigError);

  // a perturbed lattice can no longer claim node-independent velocities
  Lattice bad = p1;
  bad.bravais = true;
  LatticeReport brep = validate(bad);
  CHECK_FALSE(brep.bravais_symmetric);
}

TEST_CASE("perturbing the node lattice keeps hexagonal wall nodes fixed") {
  Lattice base = build_d2t7_triangle(10, 1.0);
  Lattice p = perturb(base, 0.1, 42);
  CHECK(validate(p).ok());
  int moved = 0;
  for (NodeId n = 0; n < base.n_nodes(); ++n) {
    bool wallnode = false;
    for (int j = 1; j < base.q; ++j) wallnode = wallnode || base.link_is_boundary(n, j);
    const double d = (p.positions.col(n) - base.positions.col(n)).norm();
    if (wallnode) {
      CHECK(d == 0.0);
    } else {
      CHECK(d <= 0.1 * base.dx * (1 + 1e-12));
      moved += d > 0 ? 1 : 0;
    }
  }
  CHECK(moved > 0);
}

TEST_CASE("domain corners and centering") {
  Lattice t = build_d2t4_equilateral(8, 1.0);
  REQUIRE(t.corners.has_value());
  auto c = dirichlet_domain_corners(t);
  // physical triangle side = n * edge = n * dx * sqrt(3)
  const double side = 8.0 * std::sqrt(3.0);
  CHECK((c[1] - c[0]).norm() == doctest::Approx(side).epsilon(1e-12));
  CHECK((c[2] - c[1]).norm() == doctest::Approx(side).epsilon(1e-12));
  CHECK((c[0] - c[2]).norm() == doctest::Approx(side).epsilon(1e-12));

  center_domain(t);
  auto cc = dirichlet_domain_corners(t);
  CHECK((cc[0] + cc[1] + cc[2]).norm() < 1e-12 * side);

  // d2t7 Dirichlet lines sit sqrt(3)dx/4 outside the node triangle, which
  // grows the side from (n-1)dx to (n+1/2)dx
  Lattice h = build_d2t7_triangle(10, 1.0);
  auto hc = dirichlet_domain_corners(h);
  const double grown = (hc[1] - hc[0]).norm();
  CHECK(grown == doctest::Approx(10.5).epsilon(1e-10));

  CHECK_THROWS_AS(dirichlet_domain_corners(build_d2t7_periodic(4, 4, 1.0)), GeometryError);
}
