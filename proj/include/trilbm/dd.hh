#pragma once

// Double-double ("compensated") arithmetic, roughly 31 significant digits.
// The dispersion and pipe-mode measurements compare eigenvalues against 1,
// where plain doubles lose everything to cancellation once the signal drops
// below ~1e-15/k^2; the handful of primitives here (Dekker/Knuth splits,
// a small complex type, pivoted elimination and a bordered Newton step)
// push that floor far below any quantity we fit against.

#include <trilbm/types.hh>

#include <cmath>
#include <cstdlib>
#include <vector>

namespace trilbm {

struct Dd {
  double hi = 0.0;
  double lo = 0.0;
  Dd() = default;
  Dd(double h) : hi(h) {}
  Dd(double h, double l) : hi(h), lo(l) {}
  explicit operator double() const { return hi + lo; }
};

inline Dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

// requires |a| >= |b| (or a == 0)
inline Dd quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline Dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline Dd operator+(Dd a, Dd b) {
  Dd s = two_sum(a.hi, b.hi);
  Dd t = two_sum(a.lo, b.lo);
  Dd r = quick_two_sum(s.hi, s.lo + t.hi);
  return quick_two_sum(r.hi, r.lo + t.lo);
}

inline Dd operator-(Dd a) { return {-a.hi, -a.lo}; }
inline Dd operator-(Dd a, Dd b) { return a + (-b); }

inline Dd operator*(Dd a, Dd b) {
  Dd p = two_prod(a.hi, b.hi);
  return quick_two_sum(p.hi, p.lo + (a.hi * b.lo + a.lo * b.hi));
}

inline Dd operator/(Dd a, Dd b) {
  double q1 = a.hi / b.hi;
  Dd r = a - Dd(q1) * b;
  double q2 = r.hi / b.hi;
  r = r - Dd(q2) * b;
  double q3 = r.hi / b.hi;
  return quick_two_sum(q1, q2) + Dd(q3);
}

inline Dd& operator+=(Dd& a, Dd b) { return a = a + b; }
inline Dd& operator-=(Dd& a, Dd b) { return a = a - b; }
inline Dd& operator*=(Dd& a, Dd b) { return a = a * b; }
inline Dd& operator/=(Dd& a, Dd b) { return a = a / b; }

inline bool operator<(Dd a, Dd b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(Dd a, Dd b) { return b < a; }
inline bool operator==(Dd a, Dd b) { return a.hi == b.hi && a.lo == b.lo; }

inline Dd abs(Dd a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline Dd sqrt(Dd a) {
  if (a.hi == 0.0) return Dd(0.0);
  double x = 1.0 / std::sqrt(a.hi);
  double ax = a.hi * x;
  Dd err = a - Dd(ax) * Dd(ax);
  return quick_two_sum(ax, err.hi * (x * 0.5));
}

// Taylor series, only valid on |x| <= 0.6 (all phase arguments we form are
// k * xi * dx with k <= ~0.2 in lattice units, so no range reduction).
inline Dd dd_sin(Dd x) {
  Dd x2 = x * x;
  Dd term = x;
  Dd sum = x;
  for (int k = 1; k < 24; ++k) {
    term = term * x2;
    term = -term / Dd(double(2 * k) * double(2 * k + 1));
    sum += term;
    if (std::abs(term.hi) < 1e-40) break;
  }
  return sum;
}

inline Dd dd_cos(Dd x) {
  Dd x2 = x * x;
  Dd term(1.0);
  Dd sum(1.0);
  for (int k = 1; k < 24; ++k) {
    term = term * x2;
    term = -term / Dd(double(2 * k - 1) * double(2 * k));
    sum += term;
    if (std::abs(term.hi) < 1e-40) break;
  }
  return sum;
}

// minimal complex template usable with both double and Dd
template <class T>
struct Cx {
  T re{};
  T im{};
  Cx() = default;
  Cx(T r) : re(r) {}
  Cx(T r, T i) : re(r), im(i) {}
};

template <class T> Cx<T> operator+(Cx<T> a, Cx<T> b) { return {a.re + b.re, a.im + b.im}; }
template <class T> Cx<T> operator-(Cx<T> a, Cx<T> b) { return {a.re - b.re, a.im - b.im}; }
template <class T> Cx<T> operator-(Cx<T> a) { return {-a.re, -a.im}; }
template <class T> Cx<T> operator*(Cx<T> a, Cx<T> b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T> Cx<T> conj(Cx<T> a) { return {a.re, -a.im}; }
template <class T> T norm2(Cx<T> a) { return a.re * a.re + a.im * a.im; }
template <class T> Cx<T> operator/(Cx<T> a, Cx<T> b) {
  T d = norm2(b);
  Cx<T> n = a * conj(b);
  return {n.re / d, n.im / d};
}
template <class T> Cx<T>& operator+=(Cx<T>& a, Cx<T> b) { return a = a + b; }
template <class T> Cx<T>& operator-=(Cx<T>& a, Cx<T> b) { return a = a - b; }
template <class T> Cx<T>& operator*=(Cx<T>& a, Cx<T> b) { return a = a * b; }

using CDd = Cx<Dd>;

inline CDd to_cdd(Cplx z) { return {Dd(z.real()), Dd(z.imag())}; }
inline Cplx to_cplx(CDd z) { return {double(z.re), double(z.im)}; }
inline CDd dd_polar(Dd phase) { return {dd_cos(phase), dd_sin(phase)}; }

// ln(1 + u) by its series; the eigenvalues we convert sit within ~1e-2 of
// unity, so a few dozen terms reach the dd floor. Growth rates must be read
// off as -ln(lambda): the plain difference 1 - lambda keeps the mu^2 k^4 / 2
// term of exp(-mu k^2) and would bury every error order above two.
inline CDd dd_log1p(CDd u) {
  CDd pw = u;
  CDd sum = u;
  for (int n = 2; n <= 64; ++n) {
    pw *= u;
    CDd term{pw.re / Dd(double(n)), pw.im / Dd(double(n))};
    if (n % 2 == 0) sum -= term;
    else sum += term;
    if (std::abs(double(term.re)) + std::abs(double(term.im)) < 1e-42) break;
  }
  return sum;
}

// dense square matrix of CDd, row-major; enough structure for the bordered
// Newton solve below (q <= 9)
struct CDdMat {
  int n = 0;
  std::vector<CDd> a;
  explicit CDdMat(int n_ = 0) : n(n_), a(std::size_t(n_) * n_) {}
  CDd& at(int i, int j) { return a[std::size_t(i) * n + j]; }
  const CDd& at(int i, int j) const { return a[std::size_t(i) * n + j]; }
};

// in-place elimination with partial pivoting; b overwritten with the solution
inline void solve_cdd(CDdMat A, std::vector<CDd>& b) {
  const int n = A.n;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    Dd best = norm2(A.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      Dd m = norm2(A.at(r, col));
      if (best < m) {
        best = m;
        piv = r;
      }
    }
    if (best.hi == 0.0) throw NumericalError("singular system in compensated solve");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(A.at(col, j), A.at(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      CDd f = A.at(r, col) / A.at(col, col);
      A.at(r, col) = CDd{};
      for (int j = col + 1; j < n; ++j) A.at(r, j) -= f * A.at(col, j);
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    CDd s = b[r];
    for (int j = r + 1; j < n; ++j) s -= A.at(r, j) * b[j];
    b[r] = s / A.at(r, r);
  }
}

struct RefinedPair {
  CDd lambda;
  std::vector<CDd> v;
  double residual = 0.0;  // max |Av - lambda v| after the last sweep
};

// Newton polish of an eigenpair of A starting from a double-precision guess.
// The normalization row pins the largest component of v, which keeps the
// bordered matrix nonsingular for simple eigenvalues.
inline RefinedPair refine_eigenpair(const CDdMat& A, Cplx lambda0, const CVecX& v0,
                                    int sweeps = 4) {
  const int n = A.n;
  RefinedPair out;
  out.lambda = to_cdd(lambda0);
  out.v.resize(n);
  int pin = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(v0[i]) > std::abs(v0[pin])) pin = i;
  }
  for (int i = 0; i < n; ++i) out.v[i] = to_cdd(v0[i] / v0[pin]);

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    std::vector<CDd> rhs(n + 1);
    double rmax = 0.0;
    for (int i = 0; i < n; ++i) {
      CDd acc = -(out.lambda * out.v[i]);
      for (int j = 0; j < n; ++j) acc += A.at(i, j) * out.v[j];
      rhs[i] = -acc;
      rmax = std::max(rmax, std::abs(double(acc.re)) + std::abs(double(acc.im)));
    }
    out.residual = rmax;
    rhs[n] = CDd{};
    CDdMat B(n + 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) B.at(i, j) = A.at(i, j);
      B.at(i, i) -= out.lambda;
      B.at(i, n) = -out.v[i];
    }
    B.at(n, pin) = CDd{Dd(1.0), Dd(0.0)};
    solve_cdd(B, rhs);
    for (int i = 0; i < n; ++i) out.v[i] += rhs[i];
    out.lambda += rhs[n];
  }
  return out;
}

// compensated dot products for the Rayleigh-quotient polish of large
// matrix-free eigenproblems
inline Dd dd_dot(const VecX& a, const VecX& b) {
  Dd acc;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += two_prod(a[i], b[i]);
  return acc;
}

}  // namespace trilbm
