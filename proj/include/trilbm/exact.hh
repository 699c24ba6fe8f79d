#pragma once

// Closed-form reference solutions on the equilateral triangle.

#include <trilbm/types.hh>

#include <array>

namespace trilbm {

// harmonic steady state used by the walled relaxation study
inline double exact_harmonic(const Vec2& p) { return p.x() * p.x() - p.y() * p.y(); }

// Dirichlet eigenfunction of the Laplacian on an equilateral triangle,
// built as the alternating six-wave sum generated by reflecting a plane
// wave across the edge lines.  Modes are indexed by integers m, n >= 1 with
// eigenvalue (16 pi^2 / (9 H^2)) (m^2 + mn + n^2) for side length H, and are
// normalized to max |value| = 1 over the triangle.
class TriangleMode {
 public:
  // corners in counterclockwise order
  TriangleMode(int m, int n, const std::array<Vec2, 3>& corners);

  double eigenvalue() const { return eigenvalue_; }
  int m() const { return m_; }
  int n() const { return n_; }

  // throws GeometryError when p lies outside the (slightly padded) triangle
  double operator()(const Vec2& p) const;

 private:
  double eval_reference(const Vec2& r) const;  // on the side-1 reference triangle

  int m_, n_;
  double eigenvalue_;
  Eigen::Matrix2d to_ref_;  // affine world -> reference
  Vec2 shift_;
  std::array<Vec2, 6> waves_;
  std::array<double, 6> phases_;
  std::array<double, 6> signs_;
  bool use_imag_ = true;
  double scale_ = 1.0;
};

// reference-placement helper: triangle (0,0), (H,0), (H/2, sqrt(3)H/2)
double exact_triangle_mode(const Vec2& p, int m, int n, double side);
double triangle_mode_eigenvalue(int m, int n, double side);

}  // namespace trilbm
