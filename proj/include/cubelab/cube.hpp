#pragma once

// Combinatorics of the discrete cube {0,1}^k.
//
// Vertices are stored as bitmasks: coordinate j (1-based) is bit j-1. The
// canonical vertex order is increasing bitmask, i.e. little-endian
// lexicographic: (0,0), (1,0), (0,1), (1,1) for k = 2. Every configuration
// in the library is serialized in this order.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cubelab/error.hpp"
#include "cubelab/rng.hpp"
#include "cubelab/torus.hpp"

namespace cubelab::cube {

inline constexpr int kMaxDim = 16;
inline constexpr int kMaxTricubeDim = 8;

using Bits = std::uint32_t;

void check_dim(int k, int max_dim = kMaxDim);

inline std::size_t vertex_count(int k) { return std::size_t{1} << k; }
inline int weight(Bits v) { return std::popcount(v); }
/// (-1)^{|v|}
inline int parity_sign(Bits v) { return (std::popcount(v) & 1) ? -1 : 1; }
inline Bits top_vertex(int k) { return static_cast<Bits>(vertex_count(k) - 1); }

struct Vertex {
  Bits bits = 0;
  int dim = 0;

  int weight() const { return std::popcount(bits); }
  /// Coordinate j, 1-based.
  bool coord(int j) const { return ((bits >> (j - 1)) & 1U) != 0; }
  std::vector<int> coords() const;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// All 2^k vertices in canonical order.
std::vector<Vertex> vertices(int k);

/// Insert bit `b` as coordinate j (1-based) into a (k-1)-dimensional vertex w.
inline Bits insert_coord(Bits w, int j, bool b) {
  const Bits low_mask = (Bits{1} << (j - 1)) - 1;
  return (w & low_mask) | ((w & ~low_mask) << 1) | (static_cast<Bits>(b) << (j - 1));
}

/// Drop coordinate j (1-based) from a k-dimensional vertex.
inline Bits remove_coord(Bits v, int j) {
  const Bits low_mask = (Bits{1} << (j - 1)) - 1;
  return (v & low_mask) | ((v >> j) << (j - 1));
}

template <class T>
class CubeConfig {
 public:
  CubeConfig() = default;
  CubeConfig(int dim, std::vector<T> values) : dim_(dim), values_(std::move(values)) {
    check_dim(dim);
    if (values_.size() != vertex_count(dim))
      throw DimensionError("cube config of dimension " + std::to_string(dim) + " needs " +
                           std::to_string(vertex_count(dim)) + " values, got " +
                           std::to_string(values_.size()));
  }

  static CubeConfig constant(int dim, const T& value) {
    check_dim(dim);
    return CubeConfig(dim, std::vector<T>(vertex_count(dim), value));
  }

  /// Build from f(Bits) evaluated at every vertex.
  template <class F>
  static CubeConfig generate(int dim, F&& f) {
    check_dim(dim);
    std::vector<T> vals;
    vals.reserve(vertex_count(dim));
    for (Bits v = 0; v < vertex_count(dim); ++v) vals.push_back(f(v));
    return CubeConfig(dim, std::move(vals));
  }

  int dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<T>& values() const { return values_; }

  const T& operator[](Bits v) const { return values_[v]; }
  T& operator[](Bits v) { return values_[v]; }

  const T& at(const Vertex& v) const {
    if (v.dim != dim_) throw DimensionError("vertex dimension does not match cube");
    return values_[v.bits];
  }

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<decltype(f(values_[0]))>;
    std::vector<U> out;
    out.reserve(values_.size());
    for (const auto& x : values_) out.push_back(f(x));
    return CubeConfig<U>(dim_, std::move(out));
  }

  friend bool operator==(const CubeConfig&, const CubeConfig&) = default;
  friend auto operator<=>(const CubeConfig&, const CubeConfig&) = default;

 private:
  int dim_ = 0;
  std::vector<T> values_{T{}};
};

// ---------------------------------------------------------------------------
// Morphisms

struct CoordRule {
  enum class Kind { Zero, One, Coord, NegCoord };
  Kind kind = Kind::Zero;
  int index = 0;  // 1-based source coordinate for Coord / NegCoord

  static CoordRule zero() { return {Kind::Zero, 0}; }
  static CoordRule one() { return {Kind::One, 0}; }
  static CoordRule coord(int i) { return {Kind::Coord, i}; }
  static CoordRule neg(int i) { return {Kind::NegCoord, i}; }

  friend bool operator==(const CoordRule&, const CoordRule&) = default;
};

/// A morphism {0,1}^k -> {0,1}^l given by one rule per output coordinate.
class Morphism {
 public:
  Morphism(int arity, std::vector<CoordRule> rules);

  static Morphism identity(int k);

  int arity() const { return arity_; }
  int target_dim() const { return static_cast<int>(rules_.size()); }
  const std::vector<CoordRule>& rules() const { return rules_; }

  Bits apply(Bits w) const;

  friend bool operator==(const Morphism&, const Morphism&) = default;

 private:
  int arity_;
  std::vector<CoordRule> rules_;
};

/// outer o inner: w -> outer(inner(w)).
Morphism compose(const Morphism& outer, const Morphism& inner);

/// (c o p)(w) = c(p(w)).
template <class T>
CubeConfig<T> apply_morphism(const CubeConfig<T>& c, const Morphism& p) {
  if (p.target_dim() != c.dim())
    throw DimensionError("morphism targets dimension " + std::to_string(p.target_dim()) +
                         " but cube has dimension " + std::to_string(c.dim()));
  return CubeConfig<T>::generate(p.arity(), [&](Bits w) { return c[p.apply(w)]; });
}

/// sigma(v)_j = v_{delta(j)} xor [j in I1].
class CubeIsomorphism {
 public:
  CubeIsomorphism(std::vector<int> delta, Bits flips);

  static CubeIsomorphism identity(int k);
  static CubeIsomorphism reflection(int k, int j);
  static CubeIsomorphism transposition(int k, int i, int j);
  static CubeIsomorphism random(int k, Rng& rng);

  int dim() const { return static_cast<int>(delta_.size()); }
  const std::vector<int>& delta() const { return delta_; }
  Bits flips() const { return flips_; }

  /// (-1)^{|I1|}
  int sign() const { return (std::popcount(flips_) & 1) ? -1 : 1; }

  Bits apply(Bits v) const;
  CubeIsomorphism inverse() const;
  Morphism as_morphism() const;

  friend bool operator==(const CubeIsomorphism&, const CubeIsomorphism&) = default;

 private:
  std::vector<int> delta_;  // 1-based images
  Bits flips_;
};

/// a o b
CubeIsomorphism compose(const CubeIsomorphism& a, const CubeIsomorphism& b);

/// (c_{sigma(v)})_v
template <class T>
CubeConfig<T> act_iso(const CubeConfig<T>& c, const CubeIsomorphism& s) {
  if (s.dim() != c.dim()) throw DimensionError("isomorphism and cube dimensions differ");
  return CubeConfig<T>::generate(c.dim(), [&](Bits v) { return c[s.apply(v)]; });
}

// ---------------------------------------------------------------------------
// Faces, downward-closed sets, corners

class Face {
 public:
  Face(int dim, Bits fixed_mask, Bits fixed_values);

  static Face whole(int k) { return Face(k, 0, 0); }
  /// The upper face {v : v_j = 1}.
  static Face upper(int k, int j);
  static Face lower(int k, int j);
  /// The edge {from, to}; the two vertices must differ in exactly one coordinate.
  static Face edge(int k, Bits from, Bits to);

  int dim() const { return dim_; }
  int codim() const { return std::popcount(fixed_mask_); }
  Bits fixed_mask() const { return fixed_mask_; }
  Bits fixed_values() const { return fixed_values_; }

  bool contains(Bits v) const { return (v & fixed_mask_) == fixed_values_; }
  std::vector<Bits> vertices() const;

  friend bool operator==(const Face&, const Face&) = default;

 private:
  int dim_;
  Bits fixed_mask_;
  Bits fixed_values_;
};

class DownwardClosedSet {
 public:
  /// Throws PreconditionError if the set is not downward-closed.
  DownwardClosedSet(int dim, const std::vector<Bits>& members);

  static DownwardClosedSet full(int dim);
  static DownwardClosedSet weight_at_most(int dim, int w);

  int dim() const { return dim_; }
  bool contains(Bits v) const { return member_[v]; }
  std::size_t size() const;

 private:
  int dim_;
  std::vector<bool> member_;
};

/// Missing vertices in non-decreasing weight (ties by canonical order). Adding
/// them in this order keeps every prefix downward-closed.
std::vector<Vertex> extension_order(const DownwardClosedSet& set);

/// A labelling of {0,1}^l minus the top vertex.
template <class T>
class Corner {
 public:
  Corner(int dim, std::vector<T> values) : dim_(dim), values_(std::move(values)) {
    check_dim(dim);
    if (dim < 1) throw DimensionError("corner needs dimension >= 1");
    if (values_.size() + 1 != vertex_count(dim))
      throw DimensionError("corner of dimension " + std::to_string(dim) + " needs " +
                           std::to_string(vertex_count(dim) - 1) + " values");
  }

  static Corner from_cube(const CubeConfig<T>& c) {
    std::vector<T> vals(c.values().begin(), c.values().end() - 1);
    return Corner(c.dim(), std::move(vals));
  }

  int dim() const { return dim_; }
  const T& operator[](Bits v) const { return values_[v]; }
  const std::vector<T>& values() const { return values_; }

  /// The (l-1)-cube lambda restricted to {omega_i = 0}.
  CubeConfig<T> lower_face(int i) const {
    return CubeConfig<T>::generate(dim_ - 1, [&](Bits w) { return values_[insert_coord(w, i, false)]; });
  }

  CubeConfig<T> complete(const T& top) const {
    std::vector<T> vals = values_;
    vals.push_back(top);
    return CubeConfig<T>(dim_, std::move(vals));
  }

 private:
  int dim_;
  std::vector<T> values_;
};

/// Restriction to the face {v_j = b}, as a (k-1)-cube.
template <class T>
CubeConfig<T> restrict_face(const CubeConfig<T>& c, int j, bool b) {
  if (j < 1 || j > c.dim()) throw DimensionError("face coordinate out of range");
  return CubeConfig<T>::generate(c.dim() - 1, [&](Bits w) { return c[insert_coord(w, j, b)]; });
}

/// c o (reflection of coordinate j).
template <class T>
CubeConfig<T> reflect(const CubeConfig<T>& c, int j) {
  return act_iso(c, CubeIsomorphism::reflection(c.dim(), j));
}

/// Glue along the last coordinate: result(v0) = c1(v0), result(v1) = c2(v1).
/// Requires c1(v1) == c2(v0) up to `tol` in `dist`.
template <class T, class Dist>
CubeConfig<T> glue(const CubeConfig<T>& c1, const CubeConfig<T>& c2, Dist&& dist, double tol) {
  if (c1.dim() != c2.dim()) throw DimensionError("glue: dimension mismatch");
  const int k = c1.dim();
  if (k < 1) throw DimensionError("glue needs dimension >= 1");
  double worst = 0.0;
  for (Bits w = 0; w < vertex_count(k - 1); ++w)
    worst = std::max(worst, static_cast<double>(dist(c1[insert_coord(w, k, true)], c2[insert_coord(w, k, false)])));
  if (worst > tol) throw NotGlueable(worst);
  const Bits last = Bits{1} << (k - 1);
  return CubeConfig<T>::generate(k, [&](Bits v) { return (v & last) ? c2[v] : c1[v]; });
}

template <class T>
CubeConfig<T> glue(const CubeConfig<T>& c1, const CubeConfig<T>& c2) {
  return glue(c1, c2, [](const T& a, const T& b) { return a == b ? 0.0 : 1.0; }, 0.0);
}

inline constexpr double kGlueTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Abelian value operations and the alternating sum theta.

struct IntegerOps {
  std::int64_t zero() const { return 0; }
  std::int64_t add(std::int64_t a, std::int64_t b) const { return a + b; }
  std::int64_t sub(std::int64_t a, std::int64_t b) const { return a - b; }
  bool equal(std::int64_t a, std::int64_t b) const { return a == b; }
};

struct ModOps {
  std::int64_t modulus;
  std::int64_t zero() const { return 0; }
  std::int64_t norm(std::int64_t a) const { return ((a % modulus) + modulus) % modulus; }
  std::int64_t add(std::int64_t a, std::int64_t b) const { return norm(a + b); }
  std::int64_t sub(std::int64_t a, std::int64_t b) const { return norm(a - b); }
  bool equal(std::int64_t a, std::int64_t b) const { return norm(a) == norm(b); }
};

/// T^d, values as Point.
struct TorusOps {
  std::size_t dimension = 1;
  Point zero() const { return Point(dimension, 0.0); }
  Point add(const Point& a, const Point& b) const { return torus::add(a, b); }
  Point sub(const Point& a, const Point& b) const { return torus::sub(a, b); }
  double distance(const Point& a, const Point& b) const { return torus::dist(a, b); }
  bool equal(const Point& a, const Point& b) const { return torus::dist(a, b) <= 1e-12; }
};

/// theta(a) = sum_v (-1)^{|v|} a_v
template <class T, class Ops>
T theta(const CubeConfig<T>& a, const Ops& ops) {
  T plus = ops.zero();
  T minus = ops.zero();
  for (Bits v = 0; v < a.size(); ++v) {
    if (parity_sign(v) > 0)
      plus = ops.add(plus, a[v]);
    else
      minus = ops.add(minus, a[v]);
  }
  return ops.sub(plus, minus);
}

// ---------------------------------------------------------------------------
// Tricube index maps

/// A vertex of {-1,0,1}^n.
struct TriVertex {
  int dim = 0;
  std::array<std::int8_t, kMaxTricubeDim> coords{};

  /// Base-3 index, digit (w_j + 1) at position j-1.
  std::size_t index() const;
  static TriVertex from_index(int dim, std::size_t index);

  friend bool operator==(const TriVertex&, const TriVertex&) = default;
};

inline std::size_t tricube_size(int n) {
  std::size_t s = 1;
  for (int i = 0; i < n; ++i) s *= 3;
  return s;
}

/// Psi_v(eps)_j = (1 - 2 v_j)(1 - eps_j).
TriVertex psi_embed(int n, Bits v, Bits eps);
/// Omega(v) = Psi_v(0).
TriVertex omega_embed(int n, Bits v);
/// Coordinatewise 1 -> (0,0), 0 -> (1,0), -1 -> (0,1), into {0,1}^{2n}.
Bits q_embed(const TriVertex& w);

/// Tabulated Psi / Omega / q for one dimension n.
class TricubeMaps {
 public:
  explicit TricubeMaps(int n);

  int n() const { return n_; }
  std::size_t size() const { return q_.size(); }
  std::size_t psi(Bits v, Bits eps) const { return psi_[(static_cast<std::size_t>(v) << n_) | eps]; }
  std::size_t omega(Bits v) const { return omega_[v]; }
  Bits q(std::size_t tri_index) const { return q_[tri_index]; }

 private:
  int n_;
  std::vector<std::size_t> psi_;
  std::vector<std::size_t> omega_;
  std::vector<Bits> q_;
};

// ---------------------------------------------------------------------------
// JSON: {"dim": k, "values": [...]} in canonical order.

template <class T>
void to_json(nlohmann::json& j, const CubeConfig<T>& c) {
  j = nlohmann::json{{"dim", c.dim()}, {"values", c.values()}};
}

template <class T>
void from_json(const nlohmann::json& j, CubeConfig<T>& c) {
  c = CubeConfig<T>(j.at("dim").get<int>(), j.at("values").get<std::vector<T>>());
}

}  // namespace cubelab::cube
