#include <trilbm/exact.hh>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

namespace trilbm {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

struct Wave {
  Vec2 k;
  double phase;
  double sign;
};

// mirror lines n.p = c of the side-1 reference triangle
struct Line {
  Vec2 n;
  double c;
};

const std::array<Line, 3> kEdges = {{
    {{0.0, 1.0}, 0.0},
    {{kSqrt3 / 2, -0.5}, 0.0},
    {{kSqrt3 / 2, 0.5}, kSqrt3 / 2},
}};

Wave reflect(const Wave& w, const Line& e) {
  const double kn = w.k.dot(e.n);
  return {w.k - 2.0 * kn * e.n, w.phase + 2.0 * e.c * kn, -w.sign};
}

std::complex<double> wave_sum(const std::array<Vec2, 6>& k, const std::array<double, 6>& phase,
                              const std::array<double, 6>& sign, const Vec2& r) {
  std::complex<double> acc = 0.0;
  for (int w = 0; w < 6; ++w) {
    acc += sign[w] * std::exp(std::complex<double>(0.0, k[w].dot(r) + phase[w]));
  }
  return acc;
}

}  // namespace

TriangleMode::TriangleMode(int m, int n, const std::array<Vec2, 3>& corners) : m_(m), n_(n) {
  if (m < 1 || n < 1) throw ConfigError("triangle mode indices start at 1");
  const Vec2 w1 = corners[1] - corners[0], w2 = corners[2] - corners[0];
  const double side = w1.norm();
  const double cross = w1.x() * w2.y() - w1.y() * w2.x();
  if (side <= 0.0 || cross <= 0.0 || std::abs(w2.norm() - side) > 1e-6 * side ||
      std::abs((corners[2] - corners[1]).norm() - side) > 1e-6 * side) {
    throw GeometryError("corners do not form a counterclockwise equilateral triangle");
  }
  Eigen::Matrix2d W, R;
  W.col(0) = w1;
  W.col(1) = w2;
  R.col(0) = Vec2(1.0, 0.0);
  R.col(1) = Vec2(0.5, kSqrt3 / 2);
  to_ref_ = R * W.inverse();
  shift_ = corners[0];
  eigenvalue_ = triangle_mode_eigenvalue(m, n, side);

  // grow the image orbit of the seed wave under edge reflections
  const Vec2 seed(2.0 * M_PI / 3.0 * (m + 2 * n), 2.0 * M_PI / 3.0 * kSqrt3 * m);
  std::vector<Wave> orbit = {{seed, 0.0, 1.0}};
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    for (const Line& e : kEdges) {
      const Wave img = reflect(orbit[i], e);
      bool known = false;
      for (const Wave& w : orbit) {
        if ((w.k - img.k).norm() < 1e-9 * seed.norm()) {
          const std::complex<double> a = w.sign * std::exp(std::complex<double>(0.0, w.phase));
          const std::complex<double> b =
              img.sign * std::exp(std::complex<double>(0.0, img.phase));
          if (std::abs(a - b) > 1e-9) throw NumericalError("inconsistent mode image set");
          known = true;
          break;
        }
      }
      if (!known) orbit.push_back(img);
      if (orbit.size() > 6) throw NumericalError("mode image orbit exceeds six waves");
    }
  }
  if (orbit.size() != 6) throw NumericalError("mode image orbit did not close");
  for (int w = 0; w < 6; ++w) {
    waves_[std::size_t(w)] = orbit[std::size_t(w)].k;
    phases_[std::size_t(w)] = orbit[std::size_t(w)].phase;
    signs_[std::size_t(w)] = orbit[std::size_t(w)].sign;
  }

  // pick the nonvanishing component and scale so the strongest extremum
  // on the triangle is exactly +1
  const int N = 240;
  double ext_re = 0.0, ext_im = 0.0;
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N - i; ++j) {
      const Vec2 r(double(i) / N + 0.5 * double(j) / N, kSqrt3 / 2 * double(j) / N);
      const std::complex<double> v = wave_sum(waves_, phases_, signs_, r);
      if (std::abs(v.real()) > std::abs(ext_re)) ext_re = v.real();
      if (std::abs(v.imag()) > std::abs(ext_im)) ext_im = v.imag();
    }
  }
  use_imag_ = std::abs(ext_im) >= std::abs(ext_re);
  const double peak = use_imag_ ? ext_im : ext_re;
  if (std::abs(peak) < 1e-9) throw NumericalError("mode amplitude vanishes");
  scale_ = 1.0 / peak;
}

double TriangleMode::eval_reference(const Vec2& r) const {
  const std::complex<double> v = wave_sum(waves_, phases_, signs_, r);
  return scale_ * (use_imag_ ? v.imag() : v.real());
}

double TriangleMode::operator()(const Vec2& p) const {
  const Vec2 r = to_ref_ * (p - shift_);
  const double b2 = r.y() / (kSqrt3 / 2);
  const double b1 = r.x() - 0.5 * b2;
  const double b0 = 1.0 - b1 - b2;
  if (b0 < -1e-9 || b1 < -1e-9 || b2 < -1e-9) {
    throw GeometryError("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                        ") lies outside the triangle");
  }
  return eval_reference(r);
}

double exact_triangle_mode(const Vec2& p, int m, int n, double side) {
  static std::map<std::tuple<int, int, double>, TriangleMode> cache;
  static std::mutex gate;
  std::lock_guard<std::mutex> lock(gate);
  const auto key = std::make_tuple(m, n, side);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const std::array<Vec2, 3> corners = {Vec2(0.0, 0.0), Vec2(side, 0.0),
                                         Vec2(side / 2, kSqrt3 / 2 * side)};
    it = cache.emplace(key, TriangleMode(m, n, corners)).first;
  }
  return it->second(p);
}

double triangle_mode_eigenvalue(int m, int n, double side) {
  if (m < 1 || n < 1 || side <= 0.0) throw ConfigError("bad triangle mode parameters");
  return 16.0 * M_PI * M_PI / (9.0 * side * side) * double(m * m + m * n + n * n);
}

}  // namespace trilbm
