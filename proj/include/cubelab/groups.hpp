#pragma once

// Finitely generated groups with explicit arithmetic, Host-Kra cube groups
// over them, the alternating-sum kernel and its edge decomposition.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cubelab/cube.hpp"
#include "cubelab/rng.hpp"

namespace cubelab::groups {

using Element = std::vector<std::int64_t>;
using cube::Bits;
using cube::CubeConfig;
using cube::Face;
using GroupCube = CubeConfig<Element>;

/// Z^d, finite abelian products of cyclic groups, the integer Heisenberg
/// group and its reduction mod p. A modulus of 0 stands for a Z factor.
class Group {
 public:
  enum class Kind { Abelian, Heisenberg };

  static Group integers(int d);
  static Group cyclic(std::int64_t n);
  static Group finite_abelian(std::vector<std::int64_t> moduli);
  /// (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')
  static Group heisenberg();
  /// Heisenberg group with all three coordinates reduced mod p.
  static Group heisenberg_mod(std::int64_t p);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t rank() const { return moduli_.size(); }
  const std::vector<std::int64_t>& moduli() const { return moduli_; }
  bool is_abelian() const { return kind_ == Kind::Abelian; }
  bool is_finite() const;
  /// Group order; nullopt for infinite groups.
  std::optional<std::uint64_t> order() const;

  Element identity() const { return Element(moduli_.size(), 0); }
  Element compose(const Element& a, const Element& b) const;
  Element invert(const Element& a) const;
  Element power(const Element& a, std::int64_t n) const;
  Element normalize(Element a) const;
  /// Well-formed and reduced.
  bool contains(const Element& a) const;
  const std::vector<Element>& generators() const { return generators_; }

  /// Membership in the n-th term of the lower central series (G_1 = G).
  bool lower_central_member(const Element& g, int n) const;

  /// All elements of a finite group in a fixed order.
  std::vector<Element> elements(std::uint64_t cap = 1u << 20) const;

  Element random_element(Rng& rng, std::int64_t int_range = 1000) const;

  // Abelian value operations, so a Group can be passed to cube::theta and
  // edge_decompose. Throw Unsupported for non-abelian groups.
  Element zero() const { return identity(); }
  Element add(const Element& a, const Element& b) const;
  Element sub(const Element& a, const Element& b) const;
  bool equal(const Element& a, const Element& b) const { return normalize(a) == normalize(b); }

 private:
  Group(Kind kind, std::string name, std::vector<std::int64_t> moduli);
  void require_abelian(const char* op) const;
  std::int64_t reduce(std::int64_t x, std::size_t i) const;

  Kind kind_;
  std::string name_;
  std::vector<std::int64_t> moduli_;
  std::vector<Element> generators_;
};

// ---------------------------------------------------------------------------
// Cube groups

/// (g^F)_v = g for v in F, identity elsewhere.
GroupCube face_element(const Group& G, const Element& g, const Face& F);
/// g^{[k]}
GroupCube diagonal_element(const Group& G, const Element& g, int k);
/// Vertex-wise product a_v * b_v.
GroupCube cube_compose(const Group& G, const GroupCube& a, const GroupCube& b);
GroupCube cube_invert(const Group& G, const GroupCube& a);

/// A product of `word_length` random factors g^F or (g^F)^{-1}, with g a
/// generator and F the whole cube or an upper face {v_j = 1}.
GroupCube hk_sample(const Group& G, int k, int word_length, Rng& rng);

struct AffineWitness {
  Element a;
  std::vector<Element> b;  // b_1..b_k
};

/// For abelian G: c_v = a + sum_j b_j v_j for some a, b_j. Returns the
/// witness a = c_0, b_j = c_{e_j} - a when it verifies at every vertex.
std::optional<AffineWitness> hk_member_abelian(const Group& G, const GroupCube& c);

/// The abelian HK_{+1} cube group is the diagonal: c is constant.
bool hk_plus_member_abelian(const Group& G, const GroupCube& c);

/// Closure of {identity} under left multiplication by `gens` (finite G).
std::set<GroupCube> bfs_closure(const Group& G, int k, const std::vector<GroupCube>& gens,
                                std::size_t cap = 2'000'000);

/// The exact Host-Kra cube group of a finite group by BFS from its
/// face and diagonal generators.
std::set<GroupCube> hk_generate_finite(const Group& G, int k, std::size_t cap = 2'000'000);

// ---------------------------------------------------------------------------
// Edge decomposition of theta-kernel elements

template <class T>
struct EdgeTerm {
  T g;
  Face edge;
};

namespace detail {

inline Face lift_face(const Face& f, int j, bool b) {
  return Face(f.dim() + 1, cube::insert_coord(f.fixed_mask(), j, true), cube::insert_coord(f.fixed_values(), j, b));
}

template <class T, class Ops>
void edge_decompose_into(const CubeConfig<T>& u, const Ops& ops, std::vector<EdgeTerm<T>>& out) {
  const int n = u.dim();
  if (n == 0) return;
  if (n == 1) {
    out.push_back({u[0], Face::edge(1, 0, 1)});
    return;
  }
  if (n == 2) {
    // Coordinates written (v1, v2): (0,1) is bits 0b10.
    const T g1 = u[0b00];
    const T g2 = ops.sub(u[0b10], g1);
    const T g3 = ops.sub(u[0b11], g2);
    out.push_back({g1, Face::edge(2, 0b00, 0b10)});
    out.push_back({g2, Face::edge(2, 0b10, 0b11)});
    out.push_back({g3, Face::edge(2, 0b11, 0b01)});
    return;
  }
  // Peel g0 on the edge {(0,..,0,0), (0,..,0,1)}, then both faces are in the kernel.
  const auto lower = cube::restrict_face(u, n, false);
  const T g0 = cube::theta(lower, ops);
  const Bits top_bit = Bits{1} << (n - 1);
  out.push_back({g0, Face::edge(n, 0, top_bit)});
  auto lower_rest = lower;
  lower_rest[0] = ops.sub(lower_rest[0], g0);
  auto upper_rest = cube::restrict_face(u, n, true);
  upper_rest[0] = ops.sub(upper_rest[0], g0);
  std::vector<EdgeTerm<T>> sub;
  edge_decompose_into(lower_rest, ops, sub);
  for (auto& t : sub) out.push_back({t.g, lift_face(t.edge, n, false)});
  sub.clear();
  edge_decompose_into(upper_rest, ops, sub);
  for (auto& t : sub) out.push_back({t.g, lift_face(t.edge, n, true)});
}

}  // namespace detail

/// Write u (theta(u) = 0) as a sum of edge elements g^alpha. Zero terms are dropped.
template <class T, class Ops>
std::vector<EdgeTerm<T>> edge_decompose(const CubeConfig<T>& u, const Ops& ops) {
  if (!ops.equal(cube::theta(u, ops), ops.zero())) throw PreconditionError("edge_decompose: theta(u) != 0");
  std::vector<EdgeTerm<T>> all;
  detail::edge_decompose_into(u, ops, all);
  std::vector<EdgeTerm<T>> out;
  for (auto& t : all)
    if (!ops.equal(t.g, ops.zero())) out.push_back(std::move(t));
  return out;
}

/// sum_s g_s^{alpha_s}
template <class T, class Ops>
CubeConfig<T> edge_sum(int n, const std::vector<EdgeTerm<T>>& terms, const Ops& ops) {
  auto out = CubeConfig<T>::constant(n, ops.zero());
  for (const auto& t : terms)
    for (Bits v : t.edge.vertices()) out[v] = ops.add(out[v], t.g);
  return out;
}

// ---------------------------------------------------------------------------

/// Uniform distribution on a coset H + a of a finite abelian group.
class HaarCosetMeasure {
 public:
  HaarCosetMeasure(const Group& A, const std::vector<Element>& h_generators, const Element& a);

  const std::vector<Element>& support() const { return support_; }
  double probability(const Element& x) const;
  Element sample(Rng& rng) const { return support_[uniform_index(rng, support_.size())]; }

 private:
  Group group_;
  std::vector<Element> support_;  // sorted
};

void to_json(nlohmann::json& j, const AffineWitness& w);

}  // namespace cubelab::groups
