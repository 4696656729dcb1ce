#include "cubelab/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cubelab/error.hpp"
#include "cubelab/seminorms.hpp"

namespace cubelab::model {

using cube::Bits;
using nlohmann::json;
using seminorms::e;

namespace {

double unit_coordinate(const systems::System& X, const Point& p) {
  if (const auto* c = dynamic_cast<const systems::CyclicRotation*>(&X))
    return static_cast<double>(c->index(p)) / static_cast<double>(c->modulus());
  return torus::frac(p[0]);
}

cubespace::CubeLaw law_for(const systems::System& X) {
  return cubespace::supports_closure(X) ? cubespace::CubeLaw::Closure : cubespace::CubeLaw::Orbit;
}

systems::Word first_generator(int rank) {
  systems::Word g(static_cast<std::size_t>(rank), 0);
  g[0] = 1;
  return g;
}

double dot(const std::vector<std::int64_t>& n, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) s += torus::mul(n[i], x[i]);
  return torus::frac(s);
}

// All integer vectors of length len with lo <= |n|_1 <= hi, in lexicographic order.
std::vector<std::vector<std::int64_t>> l1_ball(std::size_t len, int lo, int hi) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> n(len, -hi);
  while (true) {
    std::int64_t l1 = 0;
    for (auto v : n) l1 += std::abs(v);
    if (l1 >= lo && l1 <= hi) out.push_back(n);
    std::size_t i = 0;
    while (i < len && ++n[i] > hi) n[i++] = -hi;
    if (i == len) break;
  }
  return out;
}

}  // namespace

ModelPoint model_act(const systems::SkewExtension& E, const systems::Word& g, const ModelPoint& p) {
  return {E.base().act(g, p.x), torus::add(p.a, E.cocycle().eval(g, p.x))};
}

ModelPoint model_translate(const ModelPoint& p, const Point& b) { return {p.x, torus::add(p.a, b)}; }

ModelPoint random_model_point(const systems::SkewExtension& E, Rng& rng) {
  Point x = E.base().sample(rng);
  Point a(E.fiber_dim());
  for (auto& v : a) v = uniform01(rng);
  return {std::move(x), std::move(a)};
}

Point difference_map(const Nilcycle& rho, const ModelPoint& p1, const ModelPoint& p2, const cubespace::PointCube& c0,
                     const cubespace::PointCube& c1) {
  const auto& X = *rho.base();
  if (X.distance(p1.x, p2.x) != 0.0) throw PreconditionError("model points have different base points");
  if (X.distance(c0[0], p1.x) != 0.0 || X.distance(c1[0], p1.x) != 0.0)
    throw PreconditionError("cubes do not start at the common base point");
  return torus::add(torus::sub(rho.eval(c1), rho.eval(c0)), torus::sub(p1.a, p2.a));
}

// ---------------------------------------------------------------------------

TestFamily TestFamily::standard(std::size_t fiber_dim, int cube_dim, int max_freq, int degree) {
  if (max_freq < 1 || degree < 0) throw PreconditionError("test family needs max_freq >= 1 and degree >= 0");
  TestFamily T;
  T.characters = l1_ball(fiber_dim, 1, max_freq);
  T.monomials = l1_ball(static_cast<std::size_t>(cube_dim) + 1, 0, degree);
  return T;
}

void TestFamily::validate(std::size_t fiber_dim, int cube_dim, Rng& rng) const {
  if (characters.empty() || monomials.empty()) throw PreconditionError("test family is empty");
  for (const auto& xi : characters) {
    if (xi.size() != fiber_dim) throw PreconditionError("character has the wrong dimension");
    for (int t = 0; t < 8; ++t) {
      Point a(fiber_dim), b(fiber_dim);
      for (auto& v : a) v = uniform01(rng);
      for (auto& v : b) v = uniform01(rng);
      if (std::abs(e(dot(xi, torus::add(a, b))) - e(dot(xi, a)) * e(dot(xi, b))) > 1e-9)
        throw PreconditionError("character is not a homomorphism");
    }
  }
  for (const auto& n : monomials)
    if (n.size() != static_cast<std::size_t>(cube_dim) + 1) throw PreconditionError("monomial has the wrong arity");
}

json TestFamily::describe() const {
  return {{"characters", characters.size()}, {"monomials", monomials.size()}, {"size", size()}};
}

BundleEmbedding::BundleEmbedding(Nilcycle rho, TestFamily family, std::size_t n_samples, std::uint64_t seed)
    : rho_(std::move(rho)), family_(std::move(family)), n_(n_samples), seed_(seed) {
  if (n_ == 0) throw PreconditionError("bundle embedding needs samples");
  Rng rng = make_rng(seed_, 99);
  family_.validate(rho_.fiber_dim(), rho_.cube_dim(), rng);
}

std::vector<Complex> BundleEmbedding::features(const ModelPoint& p) const {
  const auto& X = *rho_.base();
  const int d = rho_.cube_dim();
  cubespace::ConditionalCubeSampler sampler(rho_.base(), d, p.x, law_for(X));
  Rng rng = make_rng(seed_);
  const std::size_t nc = family_.characters.size(), nm = family_.monomials.size();
  std::vector<Complex> acc(nc * nm, 0.0), chi(nc), mono(nm);
  std::vector<double> params(static_cast<std::size_t>(d) + 1);
  for (std::size_t s = 0; s < n_; ++s) {
    const auto c = sampler.sample(rng);
    const Point val = torus::sub(p.a, rho_.eval(c));
    params[0] = unit_coordinate(X, c[0]);
    for (int j = 0; j < d; ++j)
      params[static_cast<std::size_t>(j) + 1] = torus::frac(unit_coordinate(X, c[Bits{1} << j]) - params[0]);
    for (std::size_t i = 0; i < nc; ++i) chi[i] = e(dot(family_.characters[i], val));
    for (std::size_t i = 0; i < nm; ++i) mono[i] = e(dot(family_.monomials[i], params));
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t j = 0; j < nm; ++j) acc[i * nm + j] += chi[i] * mono[j];
  }
  for (auto& z : acc) z /= static_cast<double>(n_);
  return acc;
}

double BundleEmbedding::distance(const ModelPoint& p1, const std::vector<Complex>& f1, const ModelPoint& p2,
                                 const std::vector<Complex>& f2) const {
  double m = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) m = std::max(m, std::abs(f1[i] - f2[i]));
  return m + rho_.base()->distance(p1.x, p2.x);
}

double BundleEmbedding::distance(const ModelPoint& p1, const ModelPoint& p2) const {
  return distance(p1, features(p1), p2, features(p2));
}

double bundle_pseudometric(const Nilcycle& rho, const ModelPoint& p1, const ModelPoint& p2, const TestFamily& T,
                           std::size_t n_samples, std::uint64_t seed) {
  return BundleEmbedding(rho, T, n_samples, seed).distance(p1, p2);
}

double product_distance(const systems::SkewExtension& E, const ModelPoint& p1, const ModelPoint& p2) {
  return E.base().distance(p1.x, p2.x) + torus::dist(p1.a, p2.a);
}

// ---------------------------------------------------------------------------

bool ContinuityTable::bundle_decreasing() const {
  for (std::size_t i = 0; i + 1 < bundle_modulus.size(); ++i)
    if (!(bundle_modulus[i + 1] < bundle_modulus[i])) return false;
  return true;
}

double ContinuityTable::naive_min() const {
  double m = INFINITY;
  for (double v : naive_modulus) m = std::min(m, v);
  return m;
}

void to_json(json& j, const ContinuityTable& t) {
  j = {{"delta_grid", t.deltas},
       {"modulus", t.bundle_modulus},
       {"naive_modulus", t.naive_modulus},
       {"pairs", t.bundle_pairs},
       {"naive_pairs", t.naive_pairs},
       {"seed", t.seed},
       {"family_size", t.family_size},
       {"samples", t.samples}};
}

ContinuityTable continuity_probe(const ExtensionPtr& E, const Nilcycle& rho, const TestFamily& T, std::size_t n_pairs,
                                 const std::vector<double>& deltas, std::size_t n_samples, std::uint64_t seed,
                                 std::size_t n_naive_pairs) {
  if (n_naive_pairs == 0) n_naive_pairs = 100 * n_pairs;
  if (!E) throw PreconditionError("extension is null");
  if (E->base().is_finite()) throw Unsupported("continuity probes need a continuous base");
  const BundleEmbedding emb(rho, T, n_samples, seed);
  const auto g = first_generator(E->rank());
  const int d = rho.cube_dim();
  int max_char = 0, max_deg = 0;
  for (const auto& xi : T.characters) {
    int l1 = 0;
    for (auto v : xi) l1 += static_cast<int>(std::abs(v));
    max_char = std::max(max_char, l1);
  }
  for (const auto& n : T.monomials) {
    int l1 = 0;
    for (auto v : n) l1 += static_cast<int>(std::abs(v));
    max_deg = std::max(max_deg, l1);
  }
  // Rough Lipschitz constant of the functionals; bundle candidates are drawn
  // on this scale so that a useful share of them lands within delta.
  const double lip = 2.0 * std::numbers::pi * (max_char + max_deg) + 1.0;

  ContinuityTable t;
  t.deltas = deltas;
  t.seed = seed;
  t.family_size = T.size();
  t.samples = n_samples;
  Rng rng = make_rng(seed, 1);
  auto perturb = [&](const Point& x, double scale) {
    Point y = x;
    for (auto& v : y) v = torus::frac(v + (2.0 * uniform01(rng) - 1.0) * scale);
    return y;
  };

  for (double delta : deltas) {
    double bundle_max = 0.0, naive_max = 0.0;
    std::size_t bundle_n = 0, naive_n = 0;
    for (std::size_t attempt = 0; attempt < 20 * n_pairs && bundle_n < n_pairs; ++attempt) {
      const auto p1 = random_model_point(*E, rng);
      const double scale = delta / (4.0 * lip);
      ModelPoint p2{perturb(p1.x, scale), perturb(p1.a, scale)};
      if (attempt % 2 == 1) {
        const std::uint64_t s = rng();
        Rng r1(s), r2(s);
        const auto c1 = cubespace::ConditionalCubeSampler(rho.base(), d, p1.x, law_for(E->base())).sample(r1);
        const auto c2 = cubespace::ConditionalCubeSampler(rho.base(), d, p2.x, law_for(E->base())).sample(r2);
        p2.a = torus::add(p2.a, torus::sub(rho.eval(c2), rho.eval(c1)));
      }
      if (emb.distance(p1, p2) >= delta) continue;
      ++bundle_n;
      bundle_max = std::max(bundle_max, emb.distance(model_act(*E, g, p1), model_act(*E, g, p2)));
    }
    for (std::size_t i = 0; i < n_naive_pairs; ++i) {
      const auto p1 = random_model_point(*E, rng);
      const ModelPoint p2{perturb(p1.x, delta / 4.0), perturb(p1.a, delta / 4.0)};
      if (product_distance(*E, p1, p2) >= delta) continue;
      ++naive_n;
      naive_max = std::max(naive_max, product_distance(*E, model_act(*E, g, p1), model_act(*E, g, p2)));
    }
    t.bundle_modulus.push_back(bundle_max);
    t.naive_modulus.push_back(naive_max);
    t.bundle_pairs.push_back(bundle_n);
    t.naive_pairs.push_back(naive_n);
  }
  return t;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const QReport& r) {
  j = {{"max_dev", r.max_dev}, {"n", r.n}, {"seed", r.seed}, {"pass", r.pass}};
}

Point solve_origin(const Point& rho_c, const cube::CubeConfig<Point>& a) {
  Point s = rho_c;
  for (Bits v = 1; v < a.size(); ++v) s = (cube::weight(v) & 1) ? torus::add(s, a[v]) : torus::sub(s, a[v]);
  return s;
}

QReport q_uniqueness_check(const Nilcycle& rho, const ExtensionPtr& E, std::size_t n_samples, std::uint64_t seed,
                           double tol) {
  if (!E) throw PreconditionError("extension is null");
  if (E->fiber_dim() != rho.fiber_dim()) throw DimensionError("nilcycle and extension have different fiber groups");
  Rng rng = make_rng(seed);
  const int d = rho.cube_dim();
  const std::int64_t range = cubespace::orbit_word_range(*E);
  QReport r;
  r.n = n_samples;
  r.seed = seed;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto words = cubespace::random_affine_words(d, E->rank(), range, rng);
    const auto lift = cubespace::act_words(*E, words, cubespace::PointCube::constant(d, E->sample(rng)));
    const auto c = lift.map([&](const Point& y) { return E->base_part(y); });
    const auto a = lift.map([&](const Point& y) { return E->fiber_part(y); });
    r.max_dev = std::max(r.max_dev, torus::dist(solve_origin(rho.eval(c), a), a[0]));
  }
  r.pass = r.max_dev <= tol;
  return r;
}

stats::TwoSampleResult measure_preservation(const systems::SkewExtension& E, std::size_t n, std::uint64_t seed,
                                            int max_freq) {
  Rng r1 = make_rng(seed, 0), r2 = make_rng(seed, 1);
  const auto g = first_generator(E.rank());
  auto flat = [](const ModelPoint& p) {
    Point q = p.x;
    q.insert(q.end(), p.a.begin(), p.a.end());
    return q;
  };
  std::vector<Point> a, b;
  a.reserve(n);
  b.reserve(n);
  for (std::size_t i = 0; i < n; ++i) a.push_back(flat(random_model_point(E, r1)));
  for (std::size_t i = 0; i < n; ++i) b.push_back(flat(model_act(E, g, random_model_point(E, r2))));
  if (const auto* c = dynamic_cast<const systems::CyclicRotation*>(&E.base())) {
    const double N = static_cast<double>(c->modulus());
    for (auto* set : {&a, &b})
      for (auto& p : *set) p[0] /= N;
  }
  return stats::fourier_two_sample(a, b, max_freq);
}

std::vector<std::pair<double, std::size_t>> epsilon_net_sizes(const BundleEmbedding& emb,
                                                              const systems::SkewExtension& E, std::size_t n_points,
                                                              const std::vector<double>& eps, std::uint64_t seed) {
  Rng rng = make_rng(seed, 2);
  std::vector<ModelPoint> pts;
  std::vector<std::vector<Complex>> feats;
  for (std::size_t i = 0; i < n_points; ++i) {
    pts.push_back(random_model_point(E, rng));
    feats.push_back(emb.features(pts.back()));
  }
  std::vector<std::pair<double, std::size_t>> out;
  for (double r : eps) {
    std::vector<std::size_t> centers;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool covered = false;
      for (auto c : centers)
        if (emb.distance(pts[i], feats[i], pts[c], feats[c]) <= r) {
          covered = true;
          break;
        }
      if (!covered) centers.push_back(i);
    }
    out.emplace_back(r, centers.size());
  }
  return out;
}

std::string epsilon_net_csv(const std::vector<std::pair<double, std::size_t>>& sizes) {
  std::ostringstream os;
  os << "eps,net_size\n";
  for (const auto& [r, n] : sizes) os << r << ',' << n << '\n';
  return os.str();
}

}  // namespace cubelab::model
