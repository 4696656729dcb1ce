#include "cubelab/groups.hpp"

#include <algorithm>
#include <deque>

namespace cubelab::groups {

Group::Group(Kind kind, std::string name, std::vector<std::int64_t> moduli)
    : kind_(kind), name_(std::move(name)), moduli_(std::move(moduli)) {
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    if (moduli_[i] < 0) throw PreconditionError("negative modulus");
    Element e(moduli_.size(), 0);
    e[i] = 1;
    generators_.push_back(normalize(e));
  }
  // The central coordinate of the Heisenberg group is generated by commutators.
  if (kind_ == Kind::Heisenberg) generators_.pop_back();
}

Group Group::integers(int d) {
  if (d < 1) throw DimensionError("Z^d needs d >= 1");
  return Group(Kind::Abelian, "Z^" + std::to_string(d), std::vector<std::int64_t>(d, 0));
}

Group Group::cyclic(std::int64_t n) {
  if (n < 1) throw PreconditionError("cyclic group order must be >= 1");
  return Group(Kind::Abelian, "Z/" + std::to_string(n), {n});
}

Group Group::finite_abelian(std::vector<std::int64_t> moduli) {
  if (moduli.empty()) throw DimensionError("finite abelian group needs at least one factor");
  std::string name;
  for (auto m : moduli) {
    if (m < 1) throw PreconditionError("finite abelian factor order must be >= 1");
    name += (name.empty() ? "" : " x ") + ("Z/" + std::to_string(m));
  }
  return Group(Kind::Abelian, name, std::move(moduli));
}

Group Group::heisenberg() { return Group(Kind::Heisenberg, "Heisenberg(Z)", {0, 0, 0}); }

Group Group::heisenberg_mod(std::int64_t p) {
  if (p < 2) throw PreconditionError("Heisenberg modulus must be >= 2");
  return Group(Kind::Heisenberg, "Heisenberg(Z/" + std::to_string(p) + ")", {p, p, p});
}

bool Group::is_finite() const {
  return std::all_of(moduli_.begin(), moduli_.end(), [](std::int64_t m) { return m != 0; });
}

std::optional<std::uint64_t> Group::order() const {
  if (!is_finite()) return std::nullopt;
  std::uint64_t n = 1;
  for (auto m : moduli_) n *= static_cast<std::uint64_t>(m);
  return n;
}

std::int64_t Group::reduce(std::int64_t x, std::size_t i) const {
  const std::int64_t m = moduli_[i];
  if (m == 0) return x;
  x %= m;
  return x < 0 ? x + m : x;
}

Element Group::normalize(Element a) const {
  if (a.size() != moduli_.size()) throw DimensionError("element has wrong rank for " + name_);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = reduce(a[i], i);
  return a;
}

bool Group::contains(const Element& a) const {
  if (a.size() != moduli_.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != reduce(a[i], i)) return false;
  return true;
}

Element Group::compose(const Element& a, const Element& b) const {
  Element r(moduli_.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = reduce(a[i] + b[i], i);
  if (kind_ == Kind::Heisenberg) r[2] = reduce(r[2] + a[0] * b[1], 2);
  return r;
}

Element Group::invert(const Element& a) const {
  Element r(moduli_.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = reduce(-a[i], i);
  // (a,b,c)^{-1} = (-a, -b, -c + ab)
  if (kind_ == Kind::Heisenberg) r[2] = reduce(r[2] + a[0] * a[1], 2);
  return r;
}

Element Group::power(const Element& a, std::int64_t n) const {
  Element base = n < 0 ? invert(a) : a;
  std::uint64_t e = n < 0 ? static_cast<std::uint64_t>(-n) : static_cast<std::uint64_t>(n);
  Element r = identity();
  while (e) {
    if (e & 1U) r = compose(r, base);
    base = compose(base, base);
    e >>= 1;
  }
  return r;
}

bool Group::lower_central_member(const Element& g, int n) const {
  if (n < 1) throw PreconditionError("lower central series is indexed from 1");
  const Element x = normalize(g);
  if (n == 1) return true;
  if (kind_ == Kind::Abelian) return x == identity();
  // [G,G] is the centre {(0,0,c)}; the group is 2-step nilpotent.
  if (n == 2) return x[0] == 0 && x[1] == 0;
  return x == identity();
}

std::vector<Element> Group::elements(std::uint64_t cap) const {
  const auto n = order();
  if (!n) throw Unsupported("cannot enumerate the infinite group " + name_);
  if (*n > cap) throw CapExceeded("group " + name_ + " has more than " + std::to_string(cap) + " elements");
  std::vector<Element> out;
  out.reserve(*n);
  Element e = identity();
  for (std::uint64_t i = 0; i < *n; ++i) {
    out.push_back(e);
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (++e[j] < moduli_[j]) break;
      e[j] = 0;
    }
  }
  return out;
}

Element Group::random_element(Rng& rng, std::int64_t int_range) const {
  Element e(moduli_.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = moduli_[i] == 0 ? uniform_int(rng, -int_range, int_range)
                           : static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(moduli_[i])));
  return e;
}

void Group::require_abelian(const char* op) const {
  if (!is_abelian()) throw Unsupported(std::string(op) + " requires an abelian group, got " + name_);
}

Element Group::add(const Element& a, const Element& b) const {
  require_abelian("add");
  return compose(a, b);
}

Element Group::sub(const Element& a, const Element& b) const {
  require_abelian("sub");
  return compose(a, invert(b));
}

// ---------------------------------------------------------------------------

GroupCube face_element(const Group& G, const Element& g, const Face& F) {
  const Element e = G.identity();
  const Element x = G.normalize(g);
  return GroupCube::generate(F.dim(), [&](Bits v) { return F.contains(v) ? x : e; });
}

GroupCube diagonal_element(const Group& G, const Element& g, int k) { return face_element(G, g, Face::whole(k)); }

GroupCube cube_compose(const Group& G, const GroupCube& a, const GroupCube& b) {
  if (a.dim() != b.dim()) throw DimensionError("cube_compose: dimension mismatch");
  return GroupCube::generate(a.dim(), [&](Bits v) { return G.compose(a[v], b[v]); });
}

GroupCube cube_invert(const Group& G, const GroupCube& a) {
  return a.map([&](const Element& x) { return G.invert(x); });
}

GroupCube hk_sample(const Group& G, int k, int word_length, Rng& rng) {
  cube::check_dim(k);
  if (word_length < 1) throw PreconditionError("hk_sample: word_length must be >= 1");
  const auto& gens = G.generators();
  GroupCube c = diagonal_element(G, G.identity(), k);
  for (int i = 0; i < word_length; ++i) {
    const Element& g = gens[uniform_index(rng, gens.size())];
    const auto j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k) + 1));
    const Face F = j == 0 ? Face::whole(k) : Face::upper(k, j);
    const Element x = coin(rng) ? g : G.invert(g);
    c = cube_compose(G, c, face_element(G, x, F));
  }
  return c;
}

std::optional<AffineWitness> hk_member_abelian(const Group& G, const GroupCube& c) {
  if (!G.is_abelian()) throw Unsupported("hk_member_abelian requires an abelian group, got " + G.name());
  AffineWitness w;
  w.a = G.normalize(c[0]);
  for (int j = 0; j < c.dim(); ++j) w.b.push_back(G.sub(c[Bits{1} << j], w.a));
  for (Bits v = 0; v < c.size(); ++v) {
    Element x = w.a;
    for (int j = 0; j < c.dim(); ++j)
      if ((v >> j) & 1U) x = G.add(x, w.b[j]);
    if (x != G.normalize(c[v])) return std::nullopt;
  }
  return w;
}

bool hk_plus_member_abelian(const Group& G, const GroupCube& c) {
  if (!G.is_abelian()) throw Unsupported("HK_{+1} membership is only provided for abelian groups");
  const Element x = G.normalize(c[0]);
  for (Bits v = 1; v < c.size(); ++v)
    if (G.normalize(c[v]) != x) return false;
  return true;
}

std::set<GroupCube> bfs_closure(const Group& G, int k, const std::vector<GroupCube>& gens, std::size_t cap) {
  if (!G.is_finite()) throw Unsupported("BFS closure needs a finite group");
  std::set<GroupCube> seen;
  std::deque<GroupCube> queue;
  auto start = diagonal_element(G, G.identity(), k);
  seen.insert(start);
  queue.push_back(start);
  while (!queue.empty()) {
    GroupCube c = std::move(queue.front());
    queue.pop_front();
    for (const auto& g : gens) {
      auto next = cube_compose(G, g, c);
      if (seen.insert(next).second) {
        if (seen.size() > cap) throw CapExceeded("BFS closure exceeded " + std::to_string(cap) + " configurations");
        queue.push_back(std::move(next));
      }
    }
  }
  return seen;
}

std::set<GroupCube> hk_generate_finite(const Group& G, int k, std::size_t cap) {
  cube::check_dim(k);
  std::vector<GroupCube> gens;
  for (const auto& g : G.generators()) {
    gens.push_back(diagonal_element(G, g, k));
    for (int j = 1; j <= k; ++j) gens.push_back(face_element(G, g, Face::upper(k, j)));
  }
  return bfs_closure(G, k, gens, cap);
}

// ---------------------------------------------------------------------------

HaarCosetMeasure::HaarCosetMeasure(const Group& A, const std::vector<Element>& h_generators, const Element& a)
    : group_(A) {
  if (!A.is_abelian() || !A.is_finite()) throw Unsupported("Haar coset measure needs a finite abelian group");
  if (!A.contains(a)) throw PreconditionError("coset representative is not an element of " + A.name());
  for (const auto& h : h_generators)
    if (!A.contains(h)) throw PreconditionError("subgroup generator is not an element of " + A.name());
  std::set<Element> H{A.identity()};
  std::deque<Element> queue{A.identity()};
  while (!queue.empty()) {
    Element x = queue.front();
    queue.pop_front();
    for (const auto& h : h_generators) {
      Element y = A.add(x, h);
      if (H.insert(y).second) queue.push_back(y);
    }
  }
  for (const auto& h : H) support_.push_back(A.add(h, a));
  std::sort(support_.begin(), support_.end());
}

double HaarCosetMeasure::probability(const Element& x) const {
  const Element y = group_.normalize(x);
  return std::binary_search(support_.begin(), support_.end(), y) ? 1.0 / static_cast<double>(support_.size()) : 0.0;
}

void to_json(nlohmann::json& j, const AffineWitness& w) { j = nlohmann::json{{"a", w.a}, {"b", w.b}}; }

}  // namespace cubelab::groups
