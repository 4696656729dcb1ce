#include "cubelab/nilcycle.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "cubelab/error.hpp"

namespace cubelab::nilcycle {

using cube::Bits;
using nlohmann::json;
using systems::System;

namespace {

void check_degree(int k) {
  if (k < 0 || k > kMaxDegree) throw DimensionError("nilcycle degree must be in [0, 3]");
}

// Base coordinate scaled to [0, 1): residues of Z/N are divided by N.
double unit_coordinate(const System& X, const Point& p, std::size_t i = 0) {
  if (const auto* c = dynamic_cast<const systems::CyclicRotation*>(&X))
    return static_cast<double>(c->index(p)) / static_cast<double>(c->modulus());
  return torus::frac(p[i]);
}

std::uint64_t cube_hash(const PointCube& c) {
  std::uint64_t h = 0x5eed;
  for (Bits v = 0; v < c.size(); ++v)
    for (double x : c[v]) h = mix64(h ^ std::bit_cast<std::uint64_t>(x));
  return h;
}

}  // namespace

Nilcycle::Nilcycle(std::string kind, SystemPtr base, int k, std::size_t m, Evaluator f, json spec)
    : kind_(std::move(kind)), base_(std::move(base)), k_(k), m_(m), f_(std::move(f)), spec_(std::move(spec)) {
  check_degree(k_);
  if (!base_) throw PreconditionError("nilcycle base system is null");
}

Point Nilcycle::eval(const PointCube& c) const {
  if (c.dim() != cube_dim())
    throw DimensionError("nilcycle of degree " + std::to_string(k_) + " takes " + std::to_string(cube_dim()) +
                         "-cubes, got a " + std::to_string(c.dim()) + "-cube");
  for (Bits v = 0; v < c.size(); ++v) base_->check_point(c[v]);
  return f_(c);
}

Point alternating_sum(const systems::FiberFunction& h, const PointCube& c) {
  Point plus(h.fiber_dim, 0.0), minus(h.fiber_dim, 0.0);
  for (Bits v = 0; v < c.size(); ++v) {
    const Point hv = h(c[v]);
    auto& acc = (cube::weight(v) & 1) ? minus : plus;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += hv[i];
  }
  return torus::sub(torus::reduce(plus), torus::reduce(minus));
}

Nilcycle Nilcycle::zero(SystemPtr base, int k, std::size_t m) {
  return Nilcycle("zero", std::move(base), k, m, [m](const PointCube&) { return torus::zero(m); },
                  {{"nilcycle", "zero"}, {"k", k}, {"m", m}});
}

Nilcycle Nilcycle::coboundary(SystemPtr base, int k, systems::FiberFunction h) {
  const std::size_t m = h.fiber_dim;
  json spec = {{"nilcycle", "coboundary"}, {"k", k}, {"h", h.spec}};
  return Nilcycle("coboundary", std::move(base), k, m,
                  [h = std::move(h)](const PointCube& c) { return alternating_sum(h, c); }, std::move(spec));
}

Nilcycle Nilcycle::extracted(ExtensionPtr E, int k) {
  check_degree(k);
  if (!E) throw PreconditionError("extension is null");
  Rng probe = make_rng(0);
  const int d = k + 1;
  if (!cubespace::closure_fiber(E->cocycle(), PointCube::constant(d, E->base().sample(probe)),
                                torus::zero(E->fiber_dim()), probe))
    throw Unsupported("no closed-form lift for cocycle '" + E->cocycle().kind() + "'");
  const cube::TorusOps ops{E->fiber_dim()};
  json spec = {{"nilcycle", "extracted"}, {"k", k}, {"extension", E->describe()}};
  return Nilcycle("extracted", E->base_ptr(), k, E->fiber_dim(),
                  [E, ops](const PointCube& c) {
                    Rng rng(cube_hash(c));
                    const auto fiber = cubespace::closure_fiber(E->cocycle(), c, ops.zero(), rng);
                    return cube::theta(*fiber, ops);
                  },
                  std::move(spec));
}

Nilcycle Nilcycle::perturbed(const Nilcycle& inner, double eps) {
  json spec = {{"nilcycle", "perturbed"}, {"eps", eps}, {"inner", inner.describe()}};
  const SystemPtr base = inner.base();
  return Nilcycle("perturbed", base, inner.degree(), inner.fiber_dim(),
                  [inner, eps, base](const PointCube& c) {
                    Point r = inner.eval(c);
                    if (unit_coordinate(*base, c[0]) < 0.5) r[0] = torus::frac(r[0] + eps);
                    return r;
                  },
                  std::move(spec));
}

Nilcycle Nilcycle::table(SystemPtr base, int k, std::map<std::vector<std::int64_t>, Point> values, std::size_t m) {
  if (!base || !base->is_finite()) throw Unsupported("table nilcycles need a finite base");
  for (const auto& [key, val] : values) {
    if (key.size() != cube::vertex_count(k + 1)) throw DimensionError("table key has the wrong number of vertices");
    if (val.size() != m) throw DimensionError("table value has the wrong fiber dimension");
  }
  json spec = {{"nilcycle", "table"}, {"k", k}, {"entries", values.size()}};
  return Nilcycle("table", std::move(base), k, m,
                  [values = std::move(values)](const PointCube& c) {
                    std::vector<std::int64_t> key;
                    for (Bits v = 0; v < c.size(); ++v) key.push_back(std::llround(c[v][0]));
                    auto it = values.find(key);
                    if (it == values.end()) throw Error("nilcycle table has no entry for this cube");
                    return it->second;
                  },
                  std::move(spec));
}

// ---------------------------------------------------------------------------
// Extraction

std::pair<std::int64_t, double> near_return_time(const System& X, double tol, std::int64_t max_q) {
  if (const auto* c = dynamic_cast<const systems::CyclicRotation*>(&X)) return {c->modulus(), 0.0};
  const auto* R = dynamic_cast<const systems::TorusRotation*>(&X);
  if (!R) throw Unsupported("near-return times are computed for rotations only");
  for (std::int64_t q = 1; q <= max_q; ++q) {
    double d = 0.0;
    for (double a : R->alpha()) d = std::max(d, torus::dist1(torus::mul(q, a), 0.0));
    if (d < tol) return {q, d};
  }
  throw CapExceeded("no near-return time below the search limit");
}

namespace {

std::vector<std::int64_t> bin_key(const System& X, const PointCube& c, int bins) {
  std::vector<std::int64_t> key;
  auto cell = [&](double u) { return std::min<std::int64_t>(bins - 1, static_cast<std::int64_t>(u * bins)); };
  for (std::size_t i = 0; i < c[0].size(); ++i) key.push_back(cell(unit_coordinate(X, c[0], i)));
  for (int j = 0; j < c.dim(); ++j) {
    const Point& p = c[Bits{1} << j];
    for (std::size_t i = 0; i < p.size(); ++i)
      key.push_back(cell(torus::frac(unit_coordinate(X, p, i) - unit_coordinate(X, c[0], i))));
  }
  return key;
}

}  // namespace

std::pair<Nilcycle, ExtractionReport> extract_nilcycle(const ExtensionPtr& E, int k, const ExtractionOptions& opt,
                                                       Rng& rng) {
  check_degree(k);
  if (!E) throw PreconditionError("extension is null");
  if (E->rank() != 1) throw Unsupported("extraction is implemented for Z actions");
  if (opt.n_cubes == 0 || opt.n_fiber == 0) throw PreconditionError("extraction needs positive sample counts");
  if (opt.bins_per_unit < 1) throw PreconditionError("bins_per_unit must be positive");
  auto rho = Nilcycle::extracted(E, k);
  const int d = k + 1;
  const System& X = E->base();
  const auto [q, qdist] = near_return_time(X, opt.return_tolerance);
  const std::int64_t range = cubespace::orbit_word_range(*E);
  const cube::TorusOps ops{E->fiber_dim()};

  ExtractionReport rep;
  rep.k = k;
  rep.n_cubes = opt.n_cubes;
  rep.n_fiber = opt.n_fiber;
  rep.return_time = q;
  rep.return_distance = qdist;

  std::map<std::vector<std::int64_t>, std::size_t> index;
  for (std::size_t i = 0; i < opt.n_cubes; ++i) {
    const Point y = E->sample(rng);
    std::vector<std::int64_t> n(static_cast<std::size_t>(d));
    for (auto& x : n) x = uniform_int(rng, -range, range);
    std::vector<ExtractionSample> lifts;
    for (std::size_t s = 0; s < opt.n_fiber; ++s) {
      std::vector<std::int64_t> ns = n;
      Point ys = y;
      if (s > 0) {
        for (auto& x : ns) x += uniform_int(rng, -2, 2) * q;
        ys = E->join(E->base_part(y), E->fiber_part(E->sample(rng)));
      }
      const auto words = cube::CubeConfig<systems::Word>::generate(d, [&](Bits v) {
        std::int64_t w = 0;
        for (int j = 0; j < d; ++j)
          if ((v >> j) & 1U) w += ns[static_cast<std::size_t>(j)];
        return systems::Word{w};
      });
      const auto lift = cubespace::act_words(*E, words, PointCube::constant(d, ys));
      const auto base = lift.map([&](const Point& p) { return E->base_part(p); });
      const auto fiber = lift.map([&](const Point& p) { return E->fiber_part(p); });
      lifts.push_back({base, cube::theta(fiber, ops)});
    }
    auto key = bin_key(X, lifts.front().base_cube, opt.bins_per_unit);
    auto [it, fresh] = index.emplace(key, rep.bins.size());
    if (fresh) {
      ExtractionBin b;
      b.key = std::move(key);
      b.rho = lifts.front().theta;
      b.evaluator_gap = torus::dist(rho.eval(lifts.front().base_cube), b.rho);
      rep.bins.push_back(std::move(b));
    }
    auto& samples = rep.bins[it->second].samples;
    samples.insert(samples.end(), lifts.begin(), lifts.end());
  }

  for (auto& b : rep.bins) {
    for (std::size_t i = 0; i < b.samples.size(); ++i)
      for (std::size_t j = i + 1; j < b.samples.size(); ++j)
        b.spread = std::max(b.spread, torus::dist(b.samples[i].theta, b.samples[j].theta));
    b.flagged = b.spread > opt.spread_tolerance;
    if (b.flagged) {
      ++rep.flagged_bins;
      continue;
    }
    rep.max_spread = std::max(rep.max_spread, b.spread);
    rep.max_evaluator_gap = std::max(rep.max_evaluator_gap, b.evaluator_gap);
    rep.max_abs_rho = std::max(rep.max_abs_rho, torus::dist(b.rho, ops.zero()));
  }
  rep.flagged_fraction = static_cast<double>(rep.flagged_bins) / static_cast<double>(rep.bins.size());
  if (rep.flagged_fraction > opt.max_flagged_fraction) {
    std::ostringstream os;
    os << "theta is not constant on lifts over " << rep.flagged_bins << " of " << rep.bins.size()
       << " bins (limit " << opt.max_flagged_fraction << ")";
    throw PreconditionError(os.str());
  }
  return {std::move(rho), std::move(rep)};
}

void to_json(json& j, const ExtractionReport& r) {
  json bins = json::array();
  for (const auto& b : r.bins)
    bins.push_back({{"key", b.key},
                    {"rho", b.rho},
                    {"spread", b.spread},
                    {"evaluator_gap", b.evaluator_gap},
                    {"flagged", b.flagged},
                    {"n", b.samples.size()}});
  j = {{"k", r.k},
       {"n_cubes", r.n_cubes},
       {"n_fiber", r.n_fiber},
       {"return_time", r.return_time},
       {"return_distance", r.return_distance},
       {"bins", r.bins.size()},
       {"flagged_bins", r.flagged_bins},
       {"flagged_fraction", r.flagged_fraction},
       {"max_spread", r.max_spread},
       {"max_evaluator_gap", r.max_evaluator_gap},
       {"max_abs_rho", r.max_abs_rho},
       {"table", bins}};
}

std::string extraction_csv(const ExtractionReport& r) {
  std::ostringstream os;
  os << std::setprecision(17) << "bin,flagged,vertex0";
  if (!r.bins.empty() && !r.bins.front().samples.empty()) {
    const auto& c = r.bins.front().samples.front().base_cube;
    for (int j = 1; j <= c.dim(); ++j) os << ",t" << j;
  }
  os << ",theta\n";
  for (std::size_t i = 0; i < r.bins.size(); ++i) {
    for (const auto& s : r.bins[i].samples) {
      const auto& c = s.base_cube;
      os << i << ',' << (r.bins[i].flagged ? 1 : 0) << ',' << c[0][0];
      for (int j = 0; j < c.dim(); ++j) os << ',' << torus::frac(c[Bits{1} << j][0] - c[0][0]);
      os << ',' << s.theta[0] << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Verification

const IdentityResult& NilcycleReport::at(const std::string& identity) const {
  for (const auto& r : identities)
    if (r.identity == identity) return r;
  throw Error("no identity '" + identity + "' in report");
}

void to_json(json& j, const NilcycleReport& r) {
  json ids = json::array();
  for (const auto& i : r.identities)
    ids.push_back({{"identity", i.identity}, {"max_dev", i.max_dev}, {"n", i.n}, {"seed", r.seed}, {"pass", i.pass}});
  j = {{"identities", ids}, {"seed", r.seed}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

NilcycleReport verify_nilcycle(const Nilcycle& rho, const ExtensionPtr& E, std::size_t n_samples, std::uint64_t seed,
                               double tol) {
  if (!E) throw PreconditionError("extension is null");
  if (E->fiber_dim() != rho.fiber_dim()) throw DimensionError("nilcycle and extension have different fiber groups");
  const SystemPtr& X = E->base_ptr();
  const int d = rho.cube_dim();
  const auto law = cubespace::supports_closure(*X) ? cubespace::CubeLaw::Closure : cubespace::CubeLaw::Orbit;
  const auto Z = groups::Group::integers(X->rank());

  NilcycleReport rep;
  rep.seed = seed;
  rep.tolerance = tol;
  auto run = [&](std::size_t stream, const std::string& name, auto&& deviation) {
    Rng rng = make_rng(seed, stream);
    IdentityResult r{name, 0.0, n_samples, false};
    for (std::size_t s = 0; s < n_samples; ++s) r.max_dev = std::max(r.max_dev, deviation(rng));
    r.pass = r.max_dev <= tol;
    rep.identities.push_back(r);
  };

  run(0, "cube_invariance", [&](Rng& rng) {
    const auto c = cubespace::sample_cube(X, d, rng, law);
    const auto sigma = cube::CubeIsomorphism::random(d, rng);
    Point expected = rho.eval(c);
    if (sigma.sign() < 0) expected = torus::neg(expected);
    return torus::dist(rho.eval(cube::act_iso(c, sigma)), expected);
  });

  run(1, "glueing", [&](Rng& rng) {
    const auto [b, c] = cubespace::glueable_pair_sample(X, d - 1, rng, law);
    const auto bc = cube::glue(b, c, [&](const Point& p, const Point& q) { return X->distance(p, q); },
                               cube::kGlueTolerance);
    return torus::dist(rho.eval(bc), torus::add(rho.eval(b), rho.eval(c)));
  });

  run(2, "equivariance", [&](Rng& rng) {
    const auto c = cubespace::sample_cube(X, d, rng, law);
    const auto g = groups::hk_sample(Z, d, 4, rng);
    Point plus = rho.eval(c), minus = torus::zero(rho.fiber_dim());
    for (Bits v = 0; v < c.size(); ++v) {
      const Point b = E->cocycle().eval(g[v], c[v]);
      if (cube::weight(v) & 1)
        minus = torus::add(minus, b);
      else
        plus = torus::add(plus, b);
    }
    return torus::dist(rho.eval(cubespace::act_words(*X, g, c)), torus::sub(plus, minus));
  });

  run(3, "tricube", [&](Rng& rng) {
    const auto t = cubespace::tricube_sample(X, d, rng, law);
    Point plus = torus::zero(rho.fiber_dim()), minus = plus;
    for (Bits v = 0; v < cube::vertex_count(d); ++v) {
      const Point r = rho.eval(cubespace::tricube_psi(t, v));
      if (cube::weight(v) & 1)
        minus = torus::add(minus, r);
      else
        plus = torus::add(plus, r);
    }
    return torus::dist(torus::sub(plus, minus), rho.eval(cubespace::tricube_omega(t)));
  });

  rep.pass = true;
  for (const auto& r : rep.identities) rep.pass = rep.pass && r.pass;
  return rep;
}

}  // namespace cubelab::nilcycle
