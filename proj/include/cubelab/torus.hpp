#pragma once

// Arithmetic on T^d = R^d / Z^d with doubles reduced to [0, 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace cubelab {

/// A point of T^d (or of Z/N stored as integral doubles, see CyclicRotation).
using Point = std::vector<double>;

namespace torus {

inline double frac(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// n * a mod 1, accurate to ~1e-16 for |n| < 2^53 (error-free product via fma).
inline double mul(std::int64_t n, double a) {
  const double nd = static_cast<double>(n);
  const double p = nd * a;
  const double e = std::fma(nd, a, -p);
  return frac(frac(p) + e);
}

/// Distance on T: min(|x - y|, 1 - |x - y|) after reduction.
inline double dist1(double x, double y) {
  double d = frac(x - y);
  return std::min(d, 1.0 - d);
}

inline double dist(const Point& x, const Point& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, dist1(x[i], y[i]));
  return m;
}

inline Point zero(std::size_t d) { return Point(d, 0.0); }

inline Point add(const Point& x, const Point& y) {
  Point r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = frac(x[i] + y[i]);
  return r;
}

inline Point sub(const Point& x, const Point& y) {
  Point r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = frac(x[i] - y[i]);
  return r;
}

inline Point neg(const Point& x) {
  Point r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = frac(-x[i]);
  return r;
}

inline Point scale(std::int64_t n, const Point& x) {
  Point r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = mul(n, x[i]);
  return r;
}

inline void add_in_place(Point& x, const Point& y) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = frac(x[i] + y[i]);
}

inline Point reduce(Point x) {
  for (double& v : x) v = frac(v);
  return x;
}

/// Binomial coefficient C(n, j) for any integer n (generalised, so negative n
/// works), as an int64. Requires |C(n, j)| < 2^53 for exact use with mul().
std::int64_t binomial(std::int64_t n, int j);

}  // namespace torus
}  // namespace cubelab
