#include <doctest.h>

#include "cubelab/error.hpp"
#include "cubelab/nilcycle.hpp"

using namespace cubelab;
using namespace cubelab::nilcycle;
using cube::Bits;
using systems::kGoldenAlpha;

namespace {

ExtensionPtr product_extension() {
  return systems::skew_extension(std::make_shared<systems::ZeroCocycle>(systems::torus_rotation({kGoldenAlpha}), 1));
}

systems::FiberFunction default_step() { return systems::step_function(0.5, 0.0); }

ExtensionPtr twisted_extension(const systems::FiberFunction& h) {
  return systems::skew_extension(systems::coboundary_twist(systems::skew_torus(kGoldenAlpha)->cocycle_ptr(), h));
}

// Independent alternating sum: signed reals summed first, reduced once.
double oracle_alternating(const systems::FiberFunction& h, const PointCube& c) {
  double s = 0.0;
  for (Bits v = 0; v < c.size(); ++v) s += ((cube::weight(v) & 1) ? -1.0 : 1.0) * h(c[v])[0];
  return torus::frac(s);
}

}  // namespace

TEST_CASE("evaluation of closed-form nilcycles") {
  auto R = systems::torus_rotation({kGoldenAlpha});
  CHECK(Nilcycle::zero(R, 2).eval(PointCube::constant(3, {0.2})) == Point{0.0});
  const auto h = systems::step_function(0.3, 0.0);
  const auto rho = Nilcycle::coboundary(R, 2, h);
  CHECK(rho.eval(PointCube::constant(3, {0.45})) == Point{0.0});
  // c_v = 0.3 + 0.1 |v|: h = 0.3 at weights 0 and 1, 0 at weights 2 and 3.
  const auto c = PointCube::generate(3, [](Bits v) { return Point{0.3 + 0.1 * cube::weight(v)}; });
  CHECK(torus::dist1(rho.eval(c)[0], 0.4) < 1e-15);
  CHECK(torus::dist1(rho.eval(c)[0], oracle_alternating(h, c)) < 1e-15);
  CHECK_THROWS_AS(rho.eval(PointCube::constant(2, {0.1})), DimensionError);
  CHECK_THROWS_AS(Nilcycle::zero(R, 4), DimensionError);
}

TEST_CASE("coboundary nilcycles are linear in h") {
  auto R = systems::torus_rotation({kGoldenAlpha});
  const auto h1 = systems::step_function(0.3, 0.1, 0.4);
  const auto h2 = systems::step_function(0.45, 0.7, 0.2);
  const auto r1 = Nilcycle::coboundary(R, 2, h1), r2 = Nilcycle::coboundary(R, 2, h2);
  const auto r12 = Nilcycle::coboundary(R, 2, systems::sum_function(h1, h2));
  Rng rng = make_rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto c = cubespace::sample_cube(R, 3, rng);
    CHECK(torus::dist(r12.eval(c), torus::add(r1.eval(c), r2.eval(c))) < 1e-12);
  }
}

TEST_CASE("sign-preserving isomorphisms never change rho") {
  auto R = systems::torus_rotation({kGoldenAlpha});
  const auto rho = Nilcycle::coboundary(R, 2, default_step());
  Rng rng = make_rng(2);
  for (int i = 0; i < 2000; ++i) {
    const auto c = cubespace::sample_cube(R, 3, rng);
    const auto s = cube::CubeIsomorphism::random(3, rng);
    if (s.sign() > 0) CHECK(rho.eval(cube::act_iso(c, s)) == rho.eval(c));
  }
}

TEST_CASE("extraction over the skew torus gives rho = 0 at degree 2") {
  Rng rng = make_rng(3);
  ExtractionOptions opt;
  opt.n_cubes = 300;
  const auto [rho, rep] = extract_nilcycle(systems::skew_torus(kGoldenAlpha), 2, opt, rng);
  CHECK(rep.flagged_bins == 0);
  CHECK(rep.max_abs_rho < 1e-9);
  CHECK(rep.max_spread < 1e-9);
  CHECK(rep.max_evaluator_gap < 1e-9);
  CHECK(rep.bins.size() == 300);
  CHECK(rep.return_distance < opt.return_tolerance);
  // theta_2 of the quadratic fiber varies along the fiber: degree 1 fails.
  Rng rng1 = make_rng(4);
  opt.n_cubes = 50;
  CHECK_THROWS_AS(extract_nilcycle(systems::skew_torus(kGoldenAlpha), 1, opt, rng1), PreconditionError);
}

TEST_CASE("extraction over a twisted extension recovers the alternating sum of h") {
  const auto h = default_step();
  const auto E = twisted_extension(h);
  Rng rng = make_rng(5);
  ExtractionOptions opt;
  opt.n_cubes = 300;
  const auto [rho, rep] = extract_nilcycle(E, 2, opt, rng);
  CHECK(rep.flagged_fraction <= 0.02);
  std::size_t nonzero = 0;
  for (const auto& b : rep.bins) {
    if (b.flagged) continue;
    for (const auto& s : b.samples) CHECK(torus::dist1(s.theta[0], oracle_alternating(h, s.base_cube)) < 1e-9);
    if (torus::dist1(b.rho[0], 0.0) > 0.1) ++nonzero;
  }
  CHECK(nonzero > 0);
  CHECK(rep.max_evaluator_gap < 1e-9);

  // A second run's evaluator reproduces the first run's orbit values.
  Rng rng2 = make_rng(6);
  const auto [rho2, rep2] = extract_nilcycle(E, 2, opt, rng2);
  for (const auto& b : rep.bins)
    if (!b.flagged) CHECK(torus::dist(rho2.eval(b.samples.front().base_cube), b.rho) < 1e-9);

  nlohmann::json j = rep;
  CHECK(j["bins"] == rep.bins.size());
  CHECK(extraction_csv(rep).rfind("bin,flagged,vertex0,t1,t2,t3,theta\n", 0) == 0);
}

TEST_CASE("verification: zero nilcycle over the product extension") {
  const auto E = product_extension();
  const auto rep = verify_nilcycle(Nilcycle::zero(E->base_ptr(), 2), E, 500, 7);
  CHECK(rep.pass);
  for (const auto& name : kIdentityNames) CHECK(rep.at(name).max_dev == 0.0);
}

TEST_CASE("verification: extracted skew-torus nilcycle") {
  const auto E = systems::skew_torus(kGoldenAlpha);
  const auto rep = verify_nilcycle(Nilcycle::extracted(E, 2), E, 2000, 8);
  CHECK(rep.pass);
  for (const auto& r : rep.identities) CHECK(r.max_dev < 1e-6);
}

TEST_CASE("verification: coboundary nilcycle, twisted and untwisted extensions") {
  const auto h = default_step();
  const auto E = twisted_extension(h);
  const auto rho = Nilcycle::coboundary(E->base_ptr(), 2, h);
  const auto rep = verify_nilcycle(rho, E, 2000, 9);
  CHECK(rep.pass);
  for (const auto& r : rep.identities) CHECK(r.max_dev < 1e-6);

  const auto plain = verify_nilcycle(rho, systems::skew_torus(kGoldenAlpha), 2000, 9);
  CHECK_FALSE(plain.pass);
  CHECK(plain.at("equivariance").max_dev > 0.1);
  CHECK(plain.at("glueing").pass);
  CHECK(plain.at("tricube").pass);
}

TEST_CASE("a glueing-breaking perturbation breaks the tricube identity") {
  const auto E = systems::skew_torus(kGoldenAlpha);
  const auto rho = Nilcycle::perturbed(Nilcycle::extracted(E, 2));
  const auto rep = verify_nilcycle(rho, E, 1000, 10);
  CHECK(rep.at("glueing").max_dev > 0.1);
  CHECK(rep.at("tricube").max_dev > 0.1);
  nlohmann::json j = rep;
  CHECK(j["identities"].size() == 4);
  CHECK(j["identities"][0]["seed"] == 10);
  CHECK(j["pass"] == false);
}

TEST_CASE("verification is deterministic in the seed") {
  const auto E = twisted_extension(default_step());
  const auto rho = Nilcycle::coboundary(E->base_ptr(), 1, default_step());
  nlohmann::json a = verify_nilcycle(rho, E, 300, 11), b = verify_nilcycle(rho, E, 300, 11);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("table nilcycle on a finite base") {
  auto C = systems::cyclic_rotation(5, 1);
  std::map<std::vector<std::int64_t>, Point> values;
  values[{0, 1, 1, 2}] = {0.25};
  const auto rho = Nilcycle::table(C, 1, values);
  const auto c = PointCube::generate(2, [](Bits v) { return Point{static_cast<double>(std::popcount(v))}; });
  CHECK(rho.eval(c) == Point{0.25});
  CHECK_THROWS_AS(rho.eval(PointCube::constant(2, {3.0})), Error);
  CHECK_THROWS_AS(Nilcycle::table(systems::torus_rotation({0.1}), 1, {}), Unsupported);
}

TEST_CASE("kernel projection") {
  const cube::IntegerOps Z;
  // theta = 0: nothing at the top, pure edge decomposition.
  const auto k0 = cube::CubeConfig<std::int64_t>({2, {1, 1, 1, 1}});
  auto p0 = kernel_project(k0, Z);
  CHECK(p0.theta == 0);
  CHECK(p0.d == cube::CubeConfig<std::int64_t>::constant(2, 0));
  CHECK(groups::edge_sum(2, p0.edges, Z) == k0);
  // Unit mass at the origin of a 3-cube.
  auto unit = cube::CubeConfig<std::int64_t>::constant(3, 0);
  unit[0] = 1;
  auto p1 = kernel_project(unit, Z);
  CHECK(p1.theta == 1);
  CHECK(p1.d[7] == -1);
  auto resum = groups::edge_sum(3, p1.edges, Z);
  for (Bits v = 0; v < 8; ++v) CHECK(resum[v] + p1.d[v] == unit[v]);
  // Random Z/7 configurations.
  const cube::ModOps M{7};
  Rng rng = make_rng(12);
  for (int n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      auto a = cube::CubeConfig<std::int64_t>::generate(n, [&](Bits) { return uniform_int(rng, 0, 6); });
      auto p = kernel_project(a, M);
      CHECK(cube::theta(p.d, M) == p.theta);
      auto s = groups::edge_sum(n, p.edges, M);
      for (Bits v = 0; v < a.size(); ++v) CHECK(M.add(s[v], p.d[v]) == a[v]);
    }
  }
}
