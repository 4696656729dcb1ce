#pragma once

// Gowers / Host-Kra seminorms: exact values on Z/N, Monte-Carlo cube
// integrals for general systems, and nonconventional ergodic averages.

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubelab/cube.hpp"
#include "cubelab/cubespace.hpp"
#include "cubelab/systems.hpp"

namespace cubelab::seminorms {

using Complex = std::complex<double>;

/// e(x) = exp(2 pi i x)
Complex e(double x);

/// A finite Fourier series sum_m c_m e(m x) on T.
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(std::map<std::int64_t, Complex> coeffs);

  Complex operator()(double x) const;
  const std::map<std::int64_t, Complex>& coeffs() const { return coeffs_; }
  Complex coefficient(std::int64_t m) const;
  TrigPoly operator*(const TrigPoly& other) const;
  TrigPoly operator+(const TrigPoly& other) const;
  double sup_bound() const;

 private:
  std::map<std::int64_t, Complex> coeffs_;
};

/// A bounded complex function on system points. On Z/N points are residues;
/// on tori the observable reads coordinate `coordinate` of the point.
struct Observable {
  enum class Kind { Constant, Character, Quadratic, Arc, Table, Trig };

  Kind kind = Kind::Constant;
  Complex value = 1.0;  // Constant
  std::int64_t xi = 0;  // Character: e(xi x) on T, e(xi x / N) on Z/N
  std::int64_t a = 0;   // Quadratic: e(a x^2 / N) on Z/N, e(a x^2) on T
  double lo = 0.0, hi = 0.0;  // Arc: indicator of [lo, hi) (on Z/N of x/N)
  std::vector<Complex> table;  // Table: values on Z/N
  TrigPoly trig;
  std::size_t coordinate = 0;

  static Observable constant(Complex c);
  static Observable character(std::int64_t xi);
  static Observable quadratic(std::int64_t a);
  static Observable arc(double lo, double hi);
  static Observable from_table(std::vector<Complex> values);
  static Observable from_trig(TrigPoly p);

  Complex on_cyclic(std::int64_t x, std::int64_t N) const;
  Complex on_torus(double x) const;
  /// Dispatch on the system type.
  Complex at(const systems::System& X, const Point& p) const;
  /// Values on Z/N.
  std::vector<Complex> tabulate(std::int64_t N) const;
  double sup_bound() const;
  /// Trigonometric-polynomial view (Character / Constant / Trig only).
  TrigPoly as_trig() const;
  nlohmann::json to_json() const;
};

/// {"f":"char","xi":1}, {"f":"quad","a":1}, {"f":"arc","lo":0,"hi":0.5},
/// {"f":"table","values":[...]}, {"f":"trig","terms":[[m, re, im], ...]},
/// {"f":"const","value":1}. Throws ConfigError naming the field.
Observable observable_from_json(const nlohmann::json& spec, const std::string& field = "f");

struct SeminormReport {
  int k = 0;
  std::int64_t N = 0;
  double value = 0.0;
  /// The 2^k-th power (the raw cube average), before taking the root.
  double power = 0.0;
  std::string method;
  std::size_t samples = 0;
  double stderr_value = 0.0;
  double imag_residual = 0.0;
};

void to_json(nlohmann::json& j, const SeminormReport& r);
std::string csv_header();
std::string csv_row(const SeminormReport& r, std::uint64_t seed);

/// Caps for the exact routes: complex tables need N^{k+1} <= kNaiveCap;
/// +-1 tables with N <= 64 use a bit-packed route up to kNaiveSignCap.
inline constexpr double kNaiveCap = 2.2e9;
inline constexpr double kNaiveSignCap = 7.0e10;
inline constexpr double kRecursiveCap = 2.2e9;
inline constexpr double kImagTolerance = 1e-10;

/// |||f|||_k^{2^k} = E_{x,h} prod_v C^{|v|} f(x + h.v) by enumeration of all
/// (x, h_1..h_k), with the vertex product built incrementally as iterated
/// multiplicative derivatives.
SeminormReport gowers_naive(const std::vector<Complex>& f, int k);

/// |||f|||_{k}^{2^k} = E_h |||f . conj(shift_h f)|||_{k-1}^{2^{k-1}}, base |E f|^2.
SeminormReport gowers_recursive(const std::vector<Complex>& f, int k);

struct Estimate {
  Complex mean = 0.0;
  double stderr_value = 0.0;
  std::size_t samples = 0;
};

void to_json(nlohmann::json& j, const Estimate& e);

/// Monte-Carlo estimate of the integral of prod_v f_v(c_v) over the cube
/// measure on C^k(X). `fs` has one observable per vertex, or a single one used
/// at every vertex. With conjugate_odd, odd-weight vertices are conjugated.
Estimate hk_integral_empirical(const systems::SystemPtr& X, int k, const std::vector<Observable>& fs,
                               std::size_t n_samples, Rng& rng, cubespace::CubeLaw law = cubespace::CubeLaw::Closure,
                               bool conjugate_odd = false);

/// Empirical |||f|||_k: the conjugated cube integral and its 2^k-th root.
SeminormReport gowers_empirical(const systems::SystemPtr& X, const Observable& f, int k, std::size_t n_samples,
                                Rng& rng, cubespace::CubeLaw law = cubespace::CubeLaw::Closure);

struct AveragePoint {
  std::int64_t n = 0;
  Complex value = 0.0;
};

/// A_N = (1/N) sum_{n<N} prod_i f_i(T^{i n} x), reported at each checkpoint.
std::vector<AveragePoint> nonconventional_average(const systems::System& X, const Point& x,
                                                  const std::vector<Observable>& fs, std::int64_t N,
                                                  const std::vector<std::int64_t>& checkpoints = {});

/// The limit of nonconventional averages for a circle rotation by an
/// irrational angle: frequency tuples with sum_i i xi_i = 0 survive and
/// contribute prod_i fhat_i(xi_i) e((sum_i xi_i) x).
TrigPoly kronecker_limit_rotation(const std::vector<Observable>& fs);

}  // namespace cubelab::seminorms
