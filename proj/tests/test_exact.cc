// Closed-form triangle eigenmodes: boundary values, Laplacian residual,
// eigenvalue formula, placement helpers.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <trilbm/exact.hh>

#include <array>
#include <cmath>

using namespace trilbm;

namespace {

const double rt3 = std::sqrt(3.0);

std::array<Vec2, 3> reference_corners(double side) {
  return {Vec2(0, 0), Vec2(side, 0), Vec2(side / 2, side * rt3 / 2)};
}

}  // namespace

TEST_CASE("modes vanish on all three walls") {
  for (auto [m, n] : {std::pair(1, 1), std::pair(2, 1), std::pair(2, 2), std::pair(4, 4)}) {
    TriangleMode mode(m, n, reference_corners(2.5));
    auto c = reference_corners(2.5);
    for (int e = 0; e < 3; ++e) {
      for (double t : {0.05, 0.3, 0.52, 0.77, 0.95}) {
        const Vec2 p = c[std::size_t(e)] + t * (c[std::size_t((e + 1) % 3)] - c[std::size_t(e)]);
        CHECK(std::abs(mode(p)) < 1e-12);
      }
    }
  }
}

TEST_CASE("fundamental mode peaks at the centroid with value 1") {
  const double side = 1.0;
  TriangleMode mode(1, 1, reference_corners(side));
  const Vec2 centroid(side / 2, side / (2 * rt3));
  CHECK(mode(centroid) == doctest::Approx(1.0).epsilon(1e-12));
  // nearby values stay below the peak
  for (double dx : {-0.03, 0.03}) {
    for (double dy : {-0.03, 0.03}) {
      CHECK(mode(centroid + Vec2(dx, dy)) < 1.0);
    }
  }
}

TEST_CASE("eigenvalue formula and the Laplacian residual") {
  const double side = 3.0;
  for (auto [m, n] : {std::pair(1, 1), std::pair(2, 1), std::pair(3, 2)}) {
    TriangleMode mode(m, n, reference_corners(side));
    const double lam = 16.0 * M_PI * M_PI / (9.0 * side * side) * double(m * m + m * n + n * n);
    CHECK(mode.eigenvalue() == doctest::Approx(lam).epsilon(1e-13));
    CHECK(triangle_mode_eigenvalue(m, n, side) == doctest::Approx(lam).epsilon(1e-13));

    // five-point stencil: -lap u = lam u at interior points
    const double h = 1e-4;
    for (const Vec2& p : {Vec2(1.5, 0.7), Vec2(1.1, 0.4), Vec2(1.9, 0.9)}) {
      const double u = mode(p);
      if (std::abs(u) < 0.05) continue;  // avoid relative noise at mode zeros
      const double lap = (mode(p + Vec2(h, 0)) + mode(p - Vec2(h, 0)) + mode(p + Vec2(0, h)) +
                          mode(p - Vec2(0, h)) - 4.0 * u) /
                         (h * h);
      CHECK(-lap / u == doctest::Approx(lam).epsilon(1e-5));
    }
  }
}

TEST_CASE("mode index order and normalization") {
  // (m,n) and (n,m) are the same eigenvalue; shapes are reflections, so the
  // max-abs normalization gives both peak 1
  const double side = 2.0;
  TriangleMode a(2, 1, reference_corners(side));
  TriangleMode b(1, 2, reference_corners(side));
  CHECK(a.eigenvalue() == doctest::Approx(b.eigenvalue()).epsilon(1e-14));
  double amax = 0.0, bmax = 0.0;
  for (double x = 0.1; x < 1.9; x += 0.04) {
    for (double y = 0.05; y < x * rt3 && y < (side - x) * rt3; y += 0.04) {
      amax = std::max(amax, std::abs(a({x, y})));
      bmax = std::max(bmax, std::abs(b({x, y})));
    }
  }
  CHECK(amax == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(bmax == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("placement helper matches the class on its reference triangle") {
  const double side = 4.0;
  TriangleMode mode(2, 2, reference_corners(side));
  for (const Vec2& p : {Vec2(2.0, 1.0), Vec2(1.2, 0.8), Vec2(2.7, 1.5)}) {
    CHECK(exact_triangle_mode(p, 2, 2, side) == doctest::Approx(mode(p)).epsilon(1e-13));
  }
}

TEST_CASE("evaluation outside the padded triangle throws") {
  TriangleMode mode(1, 1, reference_corners(1.0));
  CHECK_THROWS_AS(mode({-0.2, 0.5}), GeometryError);
  CHECK_THROWS_AS(mode({0.5, 0.9}), GeometryError);
  // a hair outside the edge still evaluates (mesh wall points sit there)
  CHECK_NOTHROW(mode({0.5, -1e-10}));
  CHECK_THROWS_AS(mode({0.5, -1e-8}), GeometryError);
}

TEST_CASE("harmonic reference") {
  CHECK(exact_harmonic({2.0, 3.0}) == -5.0);
  CHECK(exact_harmonic({-1.0, 1.0}) == 0.0);
  // harmonic: the five-point stencil cancels exactly
  const double h = 0.125;
  const Vec2 p(0.3, -0.2);
  const double lap = exact_harmonic(p + Vec2(h, 0)) + exact_harmonic(p - Vec2(h, 0)) +
                     exact_harmonic(p + Vec2(0, h)) + exact_harmonic(p - Vec2(0, h)) -
                     4.0 * exact_harmonic(p);
  CHECK(lap == 0.0);
}
