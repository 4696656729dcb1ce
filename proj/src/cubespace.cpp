#include "cubelab/cubespace.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "cubelab/error.hpp"
#include "cubelab/groups.hpp"

namespace cubelab::cubespace {

using systems::CoordinateCocycle;
using systems::CyclicRotation;
using systems::SkewExtension;
using systems::TorusRotation;
using systems::TwistedCocycle;
using systems::WeylTower;
using systems::ZeroCocycle;

CubeLaw cube_law_from_string(const std::string& s) {
  if (s == "orbit") return CubeLaw::Orbit;
  if (s == "closure") return CubeLaw::Closure;
  throw PreconditionError("unknown cube law '" + s + "'");
}

std::string to_string(CubeLaw law) { return law == CubeLaw::Orbit ? "orbit" : "closure"; }

namespace {

void check_cube_dim(int k) { cube::check_dim(k, kMaxCubeDim); }

/// Moebius coefficients m_S = sum_{v subset S} (-1)^{|S|-|v|} f(v) of a
/// T-valued cube, reduced mod 1.
std::vector<double> mobius(std::vector<double> f, int k) {
  for (int j = 0; j < k; ++j) {
    const Bits bit = Bits{1} << j;
    for (Bits v = 0; v < f.size(); ++v)
      if (v & bit) f[v] = torus::frac(f[v] - f[v ^ bit]);
  }
  return f;
}

/// max dist(m_S, 0) over |S| > degree, for coordinate i of a point cube.
double coordinate_defect(const PointCube& c, std::size_t i, int degree) {
  std::vector<double> f(c.size());
  for (Bits v = 0; v < c.size(); ++v) f[v] = c[v][i];
  const auto m = mobius(std::move(f), c.dim());
  double worst = 0.0;
  for (Bits S = 0; S < m.size(); ++S)
    if (cube::weight(S) > degree) worst = std::max(worst, torus::dist1(m[S], 0.0));
  return worst;
}

/// Top vertex value making the top Moebius coefficient vanish.
double complete_coordinate(const cube::Corner<Point>& corner, std::size_t i) {
  const int l = corner.dim();
  const Bits top = cube::top_vertex(l);
  double s = 0.0;
  for (Bits v = 0; v < top; ++v) s += ((l - cube::weight(v)) % 2 ? -1.0 : 1.0) * corner[v][i];
  return torus::frac(-s);
}

PointCube base_of(const SkewExtension& E, const PointCube& c) {
  return c.map([&](const Point& y) { return E.base_part(y); });
}

PointCube fiber_of(const SkewExtension& E, const PointCube& c) {
  return c.map([&](const Point& y) { return E.fiber_part(y); });
}

/// Polynomial degree (in the multilinear sense) of fibers of cubes, or -1 if unknown.
int fiber_degree(const systems::Cocycle& beta) {
  if (dynamic_cast<const ZeroCocycle*>(&beta)) return 0;
  if (dynamic_cast<const CoordinateCocycle*>(&beta)) return 2;
  return -1;
}

std::int64_t gcd_mod(const CyclicRotation& X) { return std::gcd(X.step() % X.modulus(), X.modulus()); }

}  // namespace

PointCube affine_cube(const Point& x, const std::vector<Point>& t) {
  const int k = static_cast<int>(t.size());
  check_cube_dim(k);
  return PointCube::generate(k, [&](Bits v) {
    Point p = x;
    for (int j = 0; j < k; ++j)
      if ((v >> j) & 1U) torus::add_in_place(p, t[j]);
    return torus::reduce(p);
  });
}

PointCube act_words(const System& X, const CubeConfig<Word>& g, const PointCube& c) {
  if (g.dim() != c.dim()) throw DimensionError("act_words: dimension mismatch");
  return PointCube::generate(c.dim(), [&](Bits v) { return X.act(g[v], c[v]); });
}

std::int64_t orbit_word_range(const System& X) {
  if (const auto* W = dynamic_cast<const WeylTower*>(&X); W && W->depth() > 2)
    return (std::int64_t{1} << (50 / W->depth())) / 8;
  if (const auto* E = dynamic_cast<const SkewExtension*>(&X)) {
    const systems::Cocycle* beta = &E->cocycle();
    while (const auto* t = dynamic_cast<const TwistedCocycle*>(beta)) beta = t->inner().get();
    if (dynamic_cast<const systems::GeneratorCocycle*>(beta)) return 1 << 10;
    return std::min<std::int64_t>(orbit_word_range(E->base()), std::int64_t{1} << 20);
  }
  return std::int64_t{1} << 20;
}

CubeConfig<Word> random_affine_words(int k, int rank, std::int64_t range, Rng& rng) {
  check_cube_dim(k);
  std::vector<Word> steps(k, Word(rank));
  for (auto& w : steps)
    for (auto& x : w) x = uniform_int(rng, -range, range);
  return CubeConfig<Word>::generate(k, [&](Bits v) {
    Word n(rank, 0);
    for (int j = 0; j < k; ++j)
      if ((v >> j) & 1U) n = systems::word_add(n, steps[j]);
    return n;
  });
}

std::optional<PointCube> closure_fiber(const systems::Cocycle& beta, const PointCube& base_cube, const Point& u0,
                                       Rng& rng) {
  const int k = base_cube.dim();
  if (dynamic_cast<const ZeroCocycle*>(&beta)) return PointCube::constant(k, u0);
  if (dynamic_cast<const CoordinateCocycle*>(&beta)) {
    // u_v = u0 + sum_j s_j v_j + sum_{i<j} q_ij v_i v_j with s, q uniform.
    std::vector<double> s(k), q(static_cast<std::size_t>(k) * k);
    for (auto& x : s) x = uniform01(rng);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) q[i * k + j] = uniform01(rng);
    return PointCube::generate(k, [&](Bits v) {
      double y = u0[0];
      for (int i = 0; i < k; ++i) {
        if (!((v >> i) & 1U)) continue;
        y += s[i];
        for (int j = i + 1; j < k; ++j)
          if ((v >> j) & 1U) y += q[i * k + j];
      }
      return Point{torus::frac(y)};
    });
  }
  if (const auto* tw = dynamic_cast<const TwistedCocycle*>(&beta)) {
    auto inner = closure_fiber(*tw->inner(), base_cube, u0, rng);
    if (!inner) return std::nullopt;
    const Point h0 = tw->h()(base_cube[0]);
    for (Bits v = 0; v < inner->size(); ++v)
      (*inner)[v] = torus::add((*inner)[v], torus::sub(tw->h()(base_cube[v]), h0));
    return inner;
  }
  return std::nullopt;
}

bool supports_closure(const System& X) {
  if (dynamic_cast<const CyclicRotation*>(&X) || dynamic_cast<const TorusRotation*>(&X)) return true;
  if (const auto* W = dynamic_cast<const WeylTower*>(&X)) return W->depth() <= 2;
  if (const auto* E = dynamic_cast<const SkewExtension*>(&X)) {
    if (!supports_closure(E->base())) return false;
    const systems::Cocycle* beta = &E->cocycle();
    while (const auto* t = dynamic_cast<const TwistedCocycle*>(beta)) beta = t->inner().get();
    return fiber_degree(*beta) >= 0;
  }
  return false;
}

// ---------------------------------------------------------------------------

ConditionalCubeSampler::ConditionalCubeSampler(systems::SystemPtr X, int k, Point x, CubeLaw law)
    : X_(std::move(X)), k_(k), x_(std::move(x)), law_(law) {
  check_cube_dim(k);
  X_->check_point(x_);
  if (law_ == CubeLaw::Closure && !supports_closure(*X_))
    throw Unsupported("no closed-form cube law for system '" + X_->kind() + "'");
}

PointCube ConditionalCubeSampler::sample(Rng& rng) const {
  const System& X = *X_;
  if (law_ == CubeLaw::Orbit) {
    auto words = random_affine_words(k_, X.rank(), orbit_word_range(X), rng);
    return act_words(X, words, PointCube::constant(k_, x_));
  }
  if (const auto* C = dynamic_cast<const CyclicRotation*>(&X)) {
    std::vector<std::int64_t> m(k_);
    for (auto& s : m) s = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(C->modulus())));
    return PointCube::generate(k_, [&](Bits v) {
      std::int64_t n = 0;
      for (int j = 0; j < k_; ++j)
        if ((v >> j) & 1U) n += m[j];
      return C->act(n, x_);
    });
  }
  if (dynamic_cast<const TorusRotation*>(&X)) {
    std::vector<Point> t(k_, Point(x_.size()));
    for (auto& p : t)
      for (auto& c : p) c = uniform01(rng);
    return affine_cube(x_, t);
  }
  if (const auto* W = dynamic_cast<const WeylTower*>(&X)) {
    std::vector<Point> t(k_, Point{0.0});
    for (auto& p : t) p[0] = uniform01(rng);
    auto base = affine_cube({x_[0]}, t);
    if (W->depth() == 1) return base;
    auto beta = CoordinateCocycle(systems::torus_rotation({W->alpha()}), 0);
    auto fiber = *closure_fiber(beta, base, {x_[1]}, rng);
    return PointCube::generate(k_, [&](Bits v) { return Point{base[v][0], fiber[v][0]}; });
  }
  if (const auto* E = dynamic_cast<const SkewExtension*>(&X)) {
    ConditionalCubeSampler base_sampler(E->base_ptr(), k_, E->base_part(x_), CubeLaw::Closure);
    auto base = base_sampler.sample(rng);
    auto fiber = closure_fiber(E->cocycle(), base, E->fiber_part(x_), rng);
    if (!fiber) throw Unsupported("no closed-form fiber law for cocycle '" + E->cocycle().kind() + "'");
    return PointCube::generate(k_, [&](Bits v) { return E->join(base[v], (*fiber)[v]); });
  }
  throw Unsupported("no closed-form cube law for system '" + X.kind() + "'");
}

ConditionalCubeSampler conditional_sampler(systems::SystemPtr X, int k, Point x, CubeLaw law) {
  return ConditionalCubeSampler(std::move(X), k, std::move(x), law);
}

PointCube sample_cube(const systems::SystemPtr& X, int k, Rng& rng, CubeLaw law) {
  Point x = X->sample(rng);
  return ConditionalCubeSampler(X, k, std::move(x), law).sample(rng);
}

PointCube sample_cube_hk(const System& X, int k, int word_length, Rng& rng) {
  check_cube_dim(k);
  const auto G = groups::Group::integers(X.rank());
  const auto g = groups::hk_sample(G, k, word_length, rng);
  const Point x = X.sample(rng);
  return act_words(X, g, PointCube::constant(k, x));
}

// ---------------------------------------------------------------------------

double cube_defect(const System& X, const PointCube& c) {
  for (Bits v = 0; v < c.size(); ++v) X.check_point(c[v]);
  if (const auto* C = dynamic_cast<const CyclicRotation*>(&X)) {
    const std::int64_t N = C->modulus();
    const std::int64_t g = gcd_mod(*C) == 0 ? N : gcd_mod(*C);
    const std::int64_t x0 = C->index(c[0]);
    std::vector<std::int64_t> t(c.dim());
    for (int j = 0; j < c.dim(); ++j) {
      t[j] = ((C->index(c[Bits{1} << j]) - x0) % N + N) % N;
      if (t[j] % g != 0) return 1.0;
    }
    for (Bits v = 0; v < c.size(); ++v) {
      std::int64_t s = x0;
      for (int j = 0; j < c.dim(); ++j)
        if ((v >> j) & 1U) s += t[j];
      if (s % N != C->index(c[v])) return 1.0;
    }
    return 0.0;
  }
  if (dynamic_cast<const TorusRotation*>(&X)) {
    double worst = 0.0;
    for (std::size_t i = 0; i < X.point_dim(); ++i) worst = std::max(worst, coordinate_defect(c, i, 1));
    return worst;
  }
  if (const auto* W = dynamic_cast<const WeylTower*>(&X)) {
    if (W->depth() > 2) throw Unsupported("cube membership is not provided for Weyl towers of depth > 2");
    double worst = coordinate_defect(c, 0, 1);
    if (W->depth() == 2) worst = std::max(worst, coordinate_defect(c, 1, 2));
    return worst;
  }
  if (const auto* E = dynamic_cast<const SkewExtension*>(&X)) {
    const int degree = fiber_degree(E->cocycle());
    if (degree < 0)
      throw Unsupported("cube membership is not provided for extensions by a '" + E->cocycle().kind() + "' cocycle");
    double worst = cube_defect(E->base(), base_of(*E, c));
    const auto fiber = fiber_of(*E, c);
    for (std::size_t i = 0; i < E->fiber_dim(); ++i) worst = std::max(worst, coordinate_defect(fiber, i, degree));
    return worst;
  }
  throw Unsupported("cube membership is not provided for system '" + X.kind() + "'");
}

bool is_cube(const System& X, const PointCube& c, double tol) { return cube_defect(X, c) <= tol; }

Point corner_complete(const System& X, const cube::Corner<Point>& corner, double tol) {
  const int l = corner.dim();
  check_cube_dim(l);
  for (int i = 1; i <= l; ++i)
    if (!is_cube(X, corner.lower_face(i), tol))
      throw PreconditionError("corner face {w_" + std::to_string(i) + " = 0} is not a cube");
  Point top;
  if (const auto* C = dynamic_cast<const CyclicRotation*>(&X)) {
    const std::int64_t N = C->modulus();
    std::int64_t s = 0;
    for (Bits v = 0; v < cube::top_vertex(l); ++v) s += ((l - cube::weight(v)) % 2 ? -1 : 1) * C->index(corner[v]);
    top = {static_cast<double>(((-s) % N + N) % N)};
  } else {
    for (std::size_t i = 0; i < X.point_dim(); ++i) top.push_back(complete_coordinate(corner, i));
  }
  if (!is_cube(X, corner.complete(top), tol)) throw Error("corner has no completion (fibrancy violation)");
  return top;
}

// ---------------------------------------------------------------------------

Tricube tricube_from_cube(const PointCube& c) {
  if (c.dim() % 2 != 0) throw DimensionError("tricubes come from cubes of even dimension");
  const int n = c.dim() / 2;
  cube::TricubeMaps maps(n);
  Tricube t;
  t.n = n;
  t.values.reserve(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) t.values.push_back(c[maps.q(i)]);
  return t;
}

Tricube tricube_sample(const systems::SystemPtr& X, int n, Rng& rng, CubeLaw law) {
  if (n < 1 || n > 4) throw DimensionError("tricube dimension must lie in [1, 4]");
  return tricube_from_cube(sample_cube(X, 2 * n, rng, law));
}

PointCube tricube_psi(const Tricube& t, Bits v) {
  cube::TricubeMaps maps(t.n);
  return PointCube::generate(t.n, [&](Bits eps) { return t.values[maps.psi(v, eps)]; });
}

PointCube tricube_omega(const Tricube& t) {
  cube::TricubeMaps maps(t.n);
  return PointCube::generate(t.n, [&](Bits v) { return t.values[maps.omega(v)]; });
}

std::pair<PointCube, PointCube> glueable_pair_from_cube(const PointCube& c) {
  const int m = c.dim();
  if (m < 2) throw DimensionError("glueable pairs come from cubes of dimension >= 2");
  auto first = cube::reflect(cube::restrict_face(c, m, false), m - 1);
  auto second = cube::restrict_face(c, m - 1, false);
  return {std::move(first), std::move(second)};
}

std::pair<PointCube, PointCube> glueable_pair_sample(const systems::SystemPtr& X, int k, Rng& rng, CubeLaw law) {
  if (k + 2 > kMaxCubeDim) throw DimensionError("glueable pairs need k + 2 <= 8");
  return glueable_pair_from_cube(sample_cube(X, k + 2, rng, law));
}

// ---------------------------------------------------------------------------

FiniteCubeSet::FiniteCubeSet(systems::SystemPtr X, int k, std::size_t cap) : X_(std::move(X)), k_(k) {
  check_cube_dim(k);
  if (!X_->is_finite()) throw Unsupported("BFS cube sets need a finite system");
  points_ = X_->points();
  for (std::size_t i = 0; i < points_.size(); ++i) index_[points_[i]] = i;

  // One permutation per generator of Z^rank.
  std::vector<std::vector<std::uint32_t>> perms;
  for (int r = 0; r < X_->rank(); ++r) {
    Word e(X_->rank(), 0);
    e[r] = 1;
    std::vector<std::uint32_t> p(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) p[i] = static_cast<std::uint32_t>(index_of(X_->act(e, points_[i])));
    perms.push_back(std::move(p));
  }
  std::vector<cube::Face> faces{cube::Face::whole(k)};
  for (int j = 1; j <= k; ++j) faces.push_back(cube::Face::upper(k, j));
  std::vector<std::vector<Bits>> face_vertices;
  for (const auto& f : faces) face_vertices.push_back(f.vertices());

  std::deque<std::vector<std::uint32_t>> queue;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    std::vector<std::uint32_t> d(cube::vertex_count(k), static_cast<std::uint32_t>(i));
    if (cubes_.insert(d).second) queue.push_back(std::move(d));
  }
  while (!queue.empty()) {
    auto c = std::move(queue.front());
    queue.pop_front();
    for (const auto& p : perms) {
      for (const auto& fv : face_vertices) {
        auto next = c;
        for (Bits v : fv) next[v] = p[next[v]];
        if (cubes_.insert(next).second) {
          if (cubes_.size() > cap) throw CapExceeded("cube set exceeded " + std::to_string(cap) + " configurations");
          queue.push_back(std::move(next));
        }
      }
    }
  }
}

std::size_t FiniteCubeSet::index_of(const Point& p) const {
  auto it = index_.find(p);
  if (it == index_.end()) throw PreconditionError("point is not in the finite system");
  return it->second;
}

bool FiniteCubeSet::contains(const PointCube& c) const {
  if (c.dim() != k_) throw DimensionError("cube dimension differs from the cube set");
  std::vector<std::uint32_t> idx;
  for (const auto& p : c.values()) {
    auto it = index_.find(p);
    if (it == index_.end()) return false;
    idx.push_back(static_cast<std::uint32_t>(it->second));
  }
  return contains(idx);
}

std::vector<PointCube> FiniteCubeSet::fiber(std::size_t i) const {
  std::vector<PointCube> out;
  for (const auto& c : cubes_)
    if (c[0] == i) out.push_back(PointCube::generate(k_, [&](Bits v) { return points_[c[v]]; }));
  return out;
}

std::optional<Point> FiniteCubeSet::complete(const cube::Corner<Point>& corner) const {
  if (corner.dim() != k_) throw DimensionError("corner dimension differs from the cube set");
  std::vector<std::uint32_t> idx;
  for (const auto& p : corner.values()) idx.push_back(static_cast<std::uint32_t>(index_of(p)));
  idx.push_back(0);
  for (std::uint32_t top = 0; top < points_.size(); ++top) {
    idx.back() = top;
    if (contains(idx)) return points_[top];
  }
  return std::nullopt;
}

NrpReport nrp_classes(const systems::SystemPtr& X, int k, std::size_t cap) {
  if (k < 0) throw DimensionError("NRP level must be >= 0");
  FiniteCubeSet cubes(X, k + 1, cap);
  const std::size_t n = cubes.point_count();
  const Bits top = cube::top_vertex(k + 1);
  std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, false));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      std::vector<std::uint32_t> c(cube::vertex_count(k + 1), static_cast<std::uint32_t>(x));
      c[top] = static_cast<std::uint32_t>(y);
      rel[x][y] = cubes.contains(c);
    }

  NrpReport r;
  r.k = k;
  r.points = n;
  r.cube_count = cubes.size();
  for (std::size_t x = 0; x < n; ++x) {
    if (!rel[x][x]) r.relation_is_equivalence = false;
    for (std::size_t y = 0; y < n; ++y) {
      if (rel[x][y] != rel[y][x]) r.relation_is_equivalence = false;
      if (!rel[x][y]) continue;
      for (std::size_t z = 0; z < n; ++z)
        if (rel[y][z] && !rel[x][z]) r.relation_is_equivalence = false;
    }
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (rel[x][y]) parent[find(x)] = find(y);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t x = 0; x < n; ++x) groups[find(x)].push_back(x);
  std::vector<std::size_t> label(n);
  for (auto& [root, members] : groups) {
    for (auto m : members) label[m] = members.front();
    r.classes.push_back(members);
  }
  std::sort(r.classes.begin(), r.classes.end());

  for (int g = 0; g < X->rank(); ++g) {
    Word e(X->rank(), 0);
    e[g] = 1;
    for (const auto& cls : r.classes) {
      const std::size_t image = label[cubes.index_of(X->act(e, cubes.point(cls.front())))];
      for (auto m : cls)
        if (label[cubes.index_of(X->act(e, cubes.point(m)))] != image) r.action_invariant = false;
    }
  }
  return r;
}

void to_json(nlohmann::json& j, const NrpReport& r) {
  j = nlohmann::json{{"k", r.k},
                     {"points", r.points},
                     {"classes", r.classes},
                     {"relation_is_equivalence", r.relation_is_equivalence},
                     {"action_invariant", r.action_invariant},
                     {"cube_count", r.cube_count}};
}

}  // namespace cubelab::cubespace
