#include "cubelab/cube.hpp"

#include <numeric>

namespace cubelab::cube {

void check_dim(int k, int max_dim) {
  if (k < 0 || k > max_dim)
    throw DimensionError("dimension " + std::to_string(k) + " outside [0, " + std::to_string(max_dim) + "]");
}

std::vector<int> Vertex::coords() const {
  std::vector<int> out(dim);
  for (int j = 0; j < dim; ++j) out[j] = static_cast<int>((bits >> j) & 1U);
  return out;
}

std::vector<Vertex> vertices(int k) {
  check_dim(k);
  std::vector<Vertex> out;
  out.reserve(vertex_count(k));
  for (Bits v = 0; v < vertex_count(k); ++v) out.push_back(Vertex{v, k});
  return out;
}

// ---------------------------------------------------------------------------

Morphism::Morphism(int arity, std::vector<CoordRule> rules) : arity_(arity), rules_(std::move(rules)) {
  check_dim(arity);
  check_dim(static_cast<int>(rules_.size()));
  for (const auto& r : rules_) {
    if ((r.kind == CoordRule::Kind::Coord || r.kind == CoordRule::Kind::NegCoord) &&
        (r.index < 1 || r.index > arity))
      throw DimensionError("morphism rule refers to coordinate " + std::to_string(r.index) +
                           " of a " + std::to_string(arity) + "-cube");
  }
}

Morphism Morphism::identity(int k) {
  std::vector<CoordRule> rules;
  for (int i = 1; i <= k; ++i) rules.push_back(CoordRule::coord(i));
  return Morphism(k, std::move(rules));
}

Bits Morphism::apply(Bits w) const {
  Bits out = 0;
  for (std::size_t j = 0; j < rules_.size(); ++j) {
    const auto& r = rules_[j];
    bool bit = false;
    switch (r.kind) {
      case CoordRule::Kind::Zero: bit = false; break;
      case CoordRule::Kind::One: bit = true; break;
      case CoordRule::Kind::Coord: bit = (w >> (r.index - 1)) & 1U; break;
      case CoordRule::Kind::NegCoord: bit = !((w >> (r.index - 1)) & 1U); break;
    }
    out |= static_cast<Bits>(bit) << j;
  }
  return out;
}

Morphism compose(const Morphism& outer, const Morphism& inner) {
  if (outer.arity() != inner.target_dim()) throw DimensionError("morphism composition: dimension mismatch");
  std::vector<CoordRule> rules;
  for (const auto& r : outer.rules()) {
    using K = CoordRule::Kind;
    if (r.kind == K::Zero || r.kind == K::One) {
      rules.push_back(r);
      continue;
    }
    CoordRule in = inner.rules()[r.index - 1];
    if (r.kind == K::NegCoord) {
      switch (in.kind) {
        case K::Zero: in.kind = K::One; break;
        case K::One: in.kind = K::Zero; break;
        case K::Coord: in.kind = K::NegCoord; break;
        case K::NegCoord: in.kind = K::Coord; break;
      }
    }
    rules.push_back(in);
  }
  return Morphism(inner.arity(), std::move(rules));
}

// ---------------------------------------------------------------------------

CubeIsomorphism::CubeIsomorphism(std::vector<int> delta, Bits flips) : delta_(std::move(delta)), flips_(flips) {
  const int k = static_cast<int>(delta_.size());
  check_dim(k);
  std::vector<bool> seen(k, false);
  for (int d : delta_) {
    if (d < 1 || d > k || seen[d - 1]) throw PreconditionError("isomorphism permutation is not a bijection");
    seen[d - 1] = true;
  }
  if (flips_ >> k) throw DimensionError("flip set outside the cube's coordinates");
}

CubeIsomorphism CubeIsomorphism::identity(int k) {
  std::vector<int> d(k);
  std::iota(d.begin(), d.end(), 1);
  return CubeIsomorphism(std::move(d), 0);
}

CubeIsomorphism CubeIsomorphism::reflection(int k, int j) {
  auto id = identity(k);
  if (j < 1 || j > k) throw DimensionError("reflection coordinate out of range");
  return CubeIsomorphism(id.delta(), Bits{1} << (j - 1));
}

CubeIsomorphism CubeIsomorphism::transposition(int k, int i, int j) {
  auto d = identity(k).delta();
  if (i < 1 || i > k || j < 1 || j > k) throw DimensionError("transposition coordinate out of range");
  std::swap(d[i - 1], d[j - 1]);
  return CubeIsomorphism(std::move(d), 0);
}

CubeIsomorphism CubeIsomorphism::random(int k, Rng& rng) {
  auto d = identity(k).delta();
  for (int i = k - 1; i > 0; --i) std::swap(d[i], d[uniform_index(rng, i + 1)]);
  const Bits flips = k == 0 ? 0 : static_cast<Bits>(uniform_index(rng, vertex_count(k)));
  return CubeIsomorphism(std::move(d), flips);
}

Bits CubeIsomorphism::apply(Bits v) const {
  Bits out = 0;
  for (std::size_t j = 0; j < delta_.size(); ++j) out |= ((v >> (delta_[j] - 1)) & 1U) << j;
  return out ^ flips_;
}

CubeIsomorphism CubeIsomorphism::inverse() const {
  // sigma(v)_j = v_{delta(j)} ^ f_j; solving for v gives v_i = w_{delta^-1(i)} ^ f_{delta^-1(i)}.
  const int k = dim();
  std::vector<int> inv(k);
  Bits flips = 0;
  for (int j = 0; j < k; ++j) {
    inv[delta_[j] - 1] = j + 1;
    if ((flips_ >> j) & 1U) flips |= Bits{1} << (delta_[j] - 1);
  }
  return CubeIsomorphism(std::move(inv), flips);
}

Morphism CubeIsomorphism::as_morphism() const {
  std::vector<CoordRule> rules;
  for (std::size_t j = 0; j < delta_.size(); ++j)
    rules.push_back(((flips_ >> j) & 1U) ? CoordRule::neg(delta_[j]) : CoordRule::coord(delta_[j]));
  return Morphism(dim(), std::move(rules));
}

CubeIsomorphism compose(const CubeIsomorphism& a, const CubeIsomorphism& b) {
  if (a.dim() != b.dim()) throw DimensionError("isomorphism composition: dimension mismatch");
  const int k = a.dim();
  std::vector<int> d(k);
  Bits flips = a.flips();
  for (int j = 0; j < k; ++j) {
    const int aj = a.delta()[j];
    d[j] = b.delta()[aj - 1];
    if ((b.flips() >> (aj - 1)) & 1U) flips ^= Bits{1} << j;
  }
  return CubeIsomorphism(std::move(d), flips);
}

// ---------------------------------------------------------------------------

Face::Face(int dim, Bits fixed_mask, Bits fixed_values) : dim_(dim), fixed_mask_(fixed_mask), fixed_values_(fixed_values) {
  check_dim(dim);
  if (fixed_mask_ >> dim) throw DimensionError("face fixes coordinates outside the cube");
  if (fixed_values_ & ~fixed_mask_) throw PreconditionError("face values set on free coordinates");
}

Face Face::upper(int k, int j) {
  if (j < 1 || j > k) throw DimensionError("face coordinate out of range");
  return Face(k, Bits{1} << (j - 1), Bits{1} << (j - 1));
}

Face Face::lower(int k, int j) {
  if (j < 1 || j > k) throw DimensionError("face coordinate out of range");
  return Face(k, Bits{1} << (j - 1), 0);
}

Face Face::edge(int k, Bits from, Bits to) {
  const Bits diff = from ^ to;
  if (std::popcount(diff) != 1) throw PreconditionError("edge endpoints must differ in one coordinate");
  const Bits mask = top_vertex(k) & ~diff;
  return Face(k, mask, from & mask);
}

std::vector<Bits> Face::vertices() const {
  std::vector<Bits> out;
  for (Bits v = 0; v < vertex_count(dim_); ++v)
    if (contains(v)) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------

DownwardClosedSet::DownwardClosedSet(int dim, const std::vector<Bits>& members) : dim_(dim) {
  check_dim(dim);
  member_.assign(vertex_count(dim), false);
  for (Bits v : members) {
    if (v >= vertex_count(dim)) throw DimensionError("vertex outside the cube");
    member_[v] = true;
  }
  for (Bits v = 0; v < vertex_count(dim); ++v) {
    if (!member_[v]) continue;
    for (int j = 0; j < dim; ++j)
      if (((v >> j) & 1U) && !member_[v & ~(Bits{1} << j)])
        throw PreconditionError("vertex set is not downward-closed");
  }
}

DownwardClosedSet DownwardClosedSet::full(int dim) {
  std::vector<Bits> all;
  for (Bits v = 0; v < vertex_count(dim); ++v) all.push_back(v);
  return DownwardClosedSet(dim, all);
}

DownwardClosedSet DownwardClosedSet::weight_at_most(int dim, int w) {
  std::vector<Bits> out;
  for (Bits v = 0; v < vertex_count(dim); ++v)
    if (weight(v) <= w) out.push_back(v);
  return DownwardClosedSet(dim, out);
}

std::size_t DownwardClosedSet::size() const {
  return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), true));
}

std::vector<Vertex> extension_order(const DownwardClosedSet& set) {
  std::vector<Vertex> out;
  for (Bits v = 0; v < vertex_count(set.dim()); ++v)
    if (!set.contains(v)) out.push_back(Vertex{v, set.dim()});
  std::stable_sort(out.begin(), out.end(), [](const Vertex& a, const Vertex& b) { return a.weight() < b.weight(); });
  return out;
}

// ---------------------------------------------------------------------------

std::size_t TriVertex::index() const {
  std::size_t idx = 0;
  for (int j = dim - 1; j >= 0; --j) idx = idx * 3 + static_cast<std::size_t>(coords[j] + 1);
  return idx;
}

TriVertex TriVertex::from_index(int dim, std::size_t index) {
  TriVertex w;
  w.dim = dim;
  for (int j = 0; j < dim; ++j) {
    w.coords[j] = static_cast<std::int8_t>(static_cast<int>(index % 3) - 1);
    index /= 3;
  }
  return w;
}

TriVertex psi_embed(int n, Bits v, Bits eps) {
  check_dim(n, kMaxTricubeDim);
  TriVertex w;
  w.dim = n;
  for (int j = 0; j < n; ++j) {
    const int vj = (v >> j) & 1U;
    const int ej = (eps >> j) & 1U;
    w.coords[j] = static_cast<std::int8_t>((1 - 2 * vj) * (1 - ej));
  }
  return w;
}

TriVertex omega_embed(int n, Bits v) { return psi_embed(n, v, 0); }

Bits q_embed(const TriVertex& w) {
  Bits out = 0;
  for (int j = 0; j < w.dim; ++j) {
    if (w.coords[j] == 0) out |= Bits{1} << (2 * j);
    else if (w.coords[j] == -1) out |= Bits{1} << (2 * j + 1);
  }
  return out;
}

TricubeMaps::TricubeMaps(int n) : n_(n) {
  check_dim(n, kMaxTricubeDim);
  if (n < 1) throw DimensionError("tricube dimension must be >= 1");
  const std::size_t m = vertex_count(n);
  psi_.resize(m * m);
  omega_.resize(m);
  for (Bits v = 0; v < m; ++v) {
    omega_[v] = omega_embed(n, v).index();
    for (Bits e = 0; e < m; ++e) psi_[(static_cast<std::size_t>(v) << n) | e] = psi_embed(n, v, e).index();
  }
  q_.resize(tricube_size(n));
  for (std::size_t i = 0; i < q_.size(); ++i) q_[i] = q_embed(TriVertex::from_index(n, i));
}

}  // namespace cubelab::cube
