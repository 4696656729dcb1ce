#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cubelab/cubespace.hpp"
#include "cubelab/error.hpp"
#include "cubelab/groups.hpp"
#include "cubelab/stats.hpp"

using namespace cubelab;
using namespace cubelab::cubespace;
using namespace cubelab::systems;

namespace {

groups::GroupCube as_group_cube(const PointCube& c) {
  return c.map([](const Point& p) { return groups::Element{static_cast<std::int64_t>(std::llround(p[0]))}; });
}

// All N^{2^k} configurations of Z/N, for exhaustive comparisons.
template <class F>
void for_all_configs(std::int64_t N, int k, F&& f) {
  const std::size_t m = cube::vertex_count(k);
  std::vector<std::int64_t> idx(m, 0);
  while (true) {
    f(PointCube::generate(k, [&](Bits v) { return Point{static_cast<double>(idx[v])}; }));
    std::size_t i = 0;
    while (i < m && ++idx[i] == N) idx[i++] = 0;
    if (i == m) break;
  }
}

}  // namespace

TEST_CASE("affine and diagonal cubes") {
  auto R = torus_rotation({kGoldenAlpha});
  auto d = PointCube::constant(3, {0.4});
  CHECK(is_cube(*R, d));
  auto a = affine_cube({0.9}, {{0.3}, {0.25}});
  CHECK(a[3][0] == doctest::Approx(0.45));
  CHECK(is_cube(*R, a));
  auto bad = a;
  bad[3] = {0.5};
  CHECK_FALSE(is_cube(*R, bad));
  CHECK(cube_defect(*R, bad) == doctest::Approx(0.05));
}

TEST_CASE("hk word of identities gives a diagonal cube") {
  auto R = torus_rotation({kGoldenAlpha});
  auto zero = CubeConfig<Word>::constant(3, Word{0});
  auto c = act_words(*R, zero, PointCube::constant(3, {0.7}));
  CHECK(c == PointCube::constant(3, {0.7}));
}

TEST_CASE("cyclic cubes are affine over Z/7") {
  auto X = cyclic_rotation(7, 1);
  auto G = groups::Group::cyclic(7);
  Rng rng = make_rng(41);
  for (auto law : {CubeLaw::Orbit, CubeLaw::Closure}) {
    for (int i = 0; i < 1000; ++i) {
      auto c = sample_cube(X, 2, rng, law);
      CHECK(groups::hk_member_abelian(G, as_group_cube(c)).has_value());
      CHECK(is_cube(*X, c));
    }
  }
  for (int i = 0; i < 500; ++i) CHECK(is_cube(*X, sample_cube_hk(*X, 3, 9, rng)));
  CHECK_FALSE(is_cube(*cyclic_rotation(5, 1), PointCube(2, {{0}, {0}, {0}, {1}})));
}

TEST_CASE("finite cube set equals the affine family and is_cube") {
  for (std::int64_t N : {2, 3, 5}) {
    for (int k = 1; k <= 2; ++k) {
      auto X = cyclic_rotation(N, 1);
      FiniteCubeSet bfs(X, k);
      CHECK(bfs.size() == static_cast<std::size_t>(std::pow(N, k + 1)));
      for_all_configs(N, k, [&](const PointCube& c) { CHECK(bfs.contains(c) == is_cube(*X, c)); });
    }
  }
  // Non-generating step: Z/6 rotated by 2 only reaches the even steps.
  auto X = cyclic_rotation(6, 2);
  FiniteCubeSet bfs(X, 2);
  for_all_configs(6, 2, [&](const PointCube& c) { CHECK(bfs.contains(c) == is_cube(*X, c)); });
  CHECK(bfs.size() == 6 * 3 * 3);
}

TEST_CASE("torus cube differences are uniform") {
  auto R = torus_rotation({kGoldenAlpha});
  for (auto law : {CubeLaw::Closure, CubeLaw::Orbit}) {
    Rng rng = make_rng(42);
    std::vector<double> diffs;
    for (int i = 0; i < 20000; ++i) {
      auto c = sample_cube(R, 2, rng, law);
      diffs.push_back(torus::frac(c[2][0] - c[0][0]));
    }
    CHECK(stats::ks_uniform(diffs) < stats::kKsGate);
  }
}

TEST_CASE("orbit and closure laws agree in distribution") {
  // Skew torus, k = 2: compare (x, y, s_1, q_12) parameters of the two laws.
  auto Y = skew_torus(kGoldenAlpha);
  Rng a = make_rng(43), b = make_rng(44);
  std::vector<Point> orbit, closure;
  auto params = [](const PointCube& c) {
    const double s1 = torus::frac(c[1][1] - c[0][1]);
    const double q = torus::frac(c[3][1] - c[1][1] - c[2][1] + c[0][1]);
    return Point{c[0][0], torus::frac(c[1][0] - c[0][0]), s1, q};
  };
  for (int i = 0; i < 50000; ++i) {
    orbit.push_back(params(sample_cube(Y, 2, a, CubeLaw::Orbit)));
    closure.push_back(params(sample_cube(Y, 2, b, CubeLaw::Closure)));
  }
  auto r = stats::fourier_two_sample(orbit, closure, 1);
  CHECK(r.p_value > stats::kThreeSigmaTail);
}

TEST_CASE("skew torus cubes") {
  auto Y = skew_torus(kGoldenAlpha);
  Rng rng = make_rng(45);
  for (int k = 1; k <= 4; ++k) {
    for (int i = 0; i < 300; ++i) {
      CHECK(cube_defect(*Y, sample_cube(Y, k, rng, CubeLaw::Orbit)) < 1e-9);
      CHECK(cube_defect(*Y, sample_cube(Y, k, rng, CubeLaw::Closure)) < 1e-9);
      CHECK(cube_defect(*Y, sample_cube_hk(*Y, k, 15, rng)) < 1e-9);
    }
  }
  // A cubic term in the fiber is not a cube for k = 3.
  auto c = sample_cube(Y, 3, rng);
  c[7][1] = torus::frac(c[7][1] + 0.1);
  CHECK_FALSE(is_cube(*Y, c));
  auto W = weyl_tower(2, kGoldenAlpha);
  for (int i = 0; i < 300; ++i) CHECK(is_cube(*W, sample_cube(W, 3, rng, CubeLaw::Orbit)));
  CHECK_THROWS_AS(is_cube(*weyl_tower(3, kGoldenAlpha), PointCube::constant(1, {0.0, 0.0, 0.0})), Unsupported);
  auto twisted = skew_extension(coboundary_twist(std::make_shared<CoordinateCocycle>(torus_rotation({kGoldenAlpha}), 0),
                                                 step_function(0.5, 0.0)));
  CHECK_THROWS_AS(is_cube(*twisted, PointCube::constant(1, {0.0, 0.0})), Unsupported);
  CHECK(supports_closure(*twisted));
  CHECK_FALSE(supports_closure(*weyl_tower(3, kGoldenAlpha)));
}

TEST_CASE("cube sets are invariant under Host-Kra words") {
  auto G = groups::Group::integers(1);
  Rng rng = make_rng(46);
  std::vector<SystemPtr> xs = {torus_rotation({kGoldenAlpha, 0.3}), skew_torus(kGoldenAlpha), cyclic_rotation(9, 2)};
  for (const auto& X : xs) {
    for (int i = 0; i < 500; ++i) {
      auto c = sample_cube(X, 3, rng, CubeLaw::Closure);
      auto g = groups::hk_sample(G, 3, 20, rng);
      CHECK(cube_defect(*X, act_words(*X, g, c)) < 1e-9);
    }
  }
}

TEST_CASE("corner completion") {
  auto R = torus_rotation({kGoldenAlpha});
  CHECK(corner_complete(*R, cube::Corner<Point>(2, {{0.3}, {0.3}, {0.3}})) == Point{0.3});
  auto top = corner_complete(*R, cube::Corner<Point>(2, {{0.8}, {0.9}, {0.05}}));
  CHECK(torus::dist(top, {0.15}) < 1e-12);

  Rng rng = make_rng(47);
  auto C = cyclic_rotation(5, 1);
  FiniteCubeSet bfs(C, 3);
  for (int i = 0; i < 200; ++i) {
    auto c = sample_cube(C, 3, rng);
    auto corner = cube::Corner<Point>::from_cube(c);
    CHECK(corner_complete(*C, corner) == c[7]);
    CHECK(bfs.complete(corner) == c[7]);
  }
  auto Y = skew_torus(kGoldenAlpha);
  for (int l = 3; l <= 5; ++l)
    for (int i = 0; i < 100; ++i) {
      auto c = sample_cube(Y, l, rng);
      CHECK(torus::dist(corner_complete(*Y, cube::Corner<Point>::from_cube(c)), c[cube::top_vertex(l)]) < 1e-9);
    }
  CHECK_THROWS_AS(corner_complete(*R, cube::Corner<Point>(3, {{0.0}, {0.1}, {0.2}, {0.9}, {0.0}, {0.0}, {0.0}})),
                  PreconditionError);
}

TEST_CASE("tricubes") {
  Rng rng = make_rng(48);
  auto R = torus_rotation({kGoldenAlpha});
  auto diag = tricube_from_cube(PointCube::constant(4, {0.2}));
  for (Bits v = 0; v < 4; ++v) CHECK(tricube_psi(diag, v) == PointCube::constant(2, {0.2}));

  for (int i = 0; i < 1000; ++i) {
    auto t = tricube_sample(R, 2, rng);
    for (Bits v = 0; v < 4; ++v) CHECK(is_cube(*R, tricube_psi(t, v)));
    CHECK(is_cube(*R, tricube_omega(t)));
  }
  auto C = cyclic_rotation(7, 1);
  FiniteCubeSet bfs(C, 2);
  for (int i = 0; i < 300; ++i) {
    auto t = tricube_sample(C, 2, rng, CubeLaw::Orbit);
    CHECK(bfs.contains(tricube_omega(t)));
    for (Bits v = 0; v < 4; ++v) CHECK(bfs.contains(tricube_psi(t, v)));
  }
  auto Y = skew_torus(kGoldenAlpha);
  for (int i = 0; i < 200; ++i) {
    auto t = tricube_sample(Y, 3, rng);
    for (Bits v = 0; v < 8; ++v) CHECK(cube_defect(*Y, tricube_psi(t, v)) < 1e-9);
    CHECK(cube_defect(*Y, tricube_omega(t)) < 1e-9);
  }
  CHECK_THROWS_AS(tricube_sample(R, 5, rng), DimensionError);
}

TEST_CASE("glueable pairs") {
  auto R = torus_rotation({kGoldenAlpha});
  auto [d1, d2] = glueable_pair_from_cube(PointCube::constant(4, {0.3}));
  CHECK(d1 == d2);
  CHECK(cube::glue(d1, d2) == PointCube::constant(3, {0.3}));

  Rng rng = make_rng(49);
  for (int i = 0; i < 10000; ++i) {
    auto [c1, c2] = glueable_pair_sample(R, 1, rng);
    auto g = cube::glue(c1, c2, [](const Point& a, const Point& b) { return torus::dist(a, b); }, cube::kGlueTolerance);
    CHECK(is_cube(*R, g));
  }
  auto Y = skew_torus(kGoldenAlpha);
  for (int i = 0; i < 1000; ++i) {
    auto [c1, c2] = glueable_pair_sample(Y, 2, rng);
    auto g = cube::glue(c1, c2, [&](const Point& a, const Point& b) { return Y->distance(a, b); }, cube::kGlueTolerance);
    CHECK(cube_defect(*Y, g) < 1e-9);
  }
}

TEST_CASE("conditional sampler") {
  auto R = torus_rotation({kGoldenAlpha});
  Rng rng = make_rng(50);
  auto point = conditional_sampler(R, 0, {0.3});
  CHECK(point.sample(rng) == PointCube::constant(0, {0.3}));
  for (auto law : {CubeLaw::Closure, CubeLaw::Orbit}) {
    auto s = conditional_sampler(R, 2, {0.3}, law);
    std::vector<double> marg;
    bool exact = true;
    for (int i = 0; i < 100000; ++i) {
      auto c = s.sample(rng);
      exact = exact && c[0] == Point{0.3};
      marg.push_back(c[1][0]);
    }
    CHECK(exact);
    CHECK(stats::ks_uniform(marg) < stats::kKsGate);
  }
  // Mixing conditional samplers over x reproduces the unconditional law.
  Rng a = make_rng(51), b = make_rng(52);
  std::vector<Point> mixed, direct;
  for (int i = 0; i < 30000; ++i) {
    auto x = R->sample(a);
    auto c1 = conditional_sampler(R, 2, x).sample(a);
    auto c2 = sample_cube(R, 2, b);
    mixed.push_back({c1[0][0], c1[1][0], c1[3][0]});
    direct.push_back({c2[0][0], c2[1][0], c2[3][0]});
  }
  CHECK(stats::fourier_two_sample(mixed, direct, 2).p_value > stats::kThreeSigmaTail);
  CHECK_THROWS_AS(conditional_sampler(weyl_tower(3, 0.3), 2, {0.0, 0.0, 0.0}), Unsupported);
}

TEST_CASE("unique ergodicity smoke test") {
  auto R = torus_rotation({kGoldenAlpha});
  for (int k = 1; k <= 3; ++k) {
    stats::MeanAccumulator m1, m2;
    Rng rng = make_rng(53, k);
    auto s1 = conditional_sampler(R, k, {0.1}, CubeLaw::Orbit);
    auto s2 = conditional_sampler(R, k, {0.77}, CubeLaw::Orbit);
    // F(c) = cos 2 pi (c_1 + 2 c_top), integral 0 over the cube measure.
    auto F = [&](const PointCube& c) {
      return std::cos(2 * std::numbers::pi * (c[1][0] + 2 * c[cube::top_vertex(k)][0]));
    };
    for (int i = 0; i < 20000; ++i) {
      m1.add(F(s1.sample(rng)));
      m2.add(F(s2.sample(rng)));
    }
    const double se = std::hypot(m1.stderr_of_mean(), m2.stderr_of_mean());
    CHECK(std::abs(m1.mean() - m2.mean()) < 3 * se);
  }
}

TEST_CASE("nrp classes") {
  auto one = nrp_classes(cyclic_rotation(1, 0), 1);
  CHECK(one.classes.size() == 1);
  for (std::int64_t N = 1; N <= 12; ++N) {
    auto r = nrp_classes(cyclic_rotation(N, 1), 1);
    CHECK(r.classes.size() == static_cast<std::size_t>(N));
    CHECK(r.relation_is_equivalence);
    CHECK(r.action_invariant);
  }
  auto ident = nrp_classes(cyclic_rotation(6, 0), 1);
  CHECK(ident.classes.size() == 6);
  CHECK(nrp_classes(cyclic_rotation(8, 2), 2).classes.size() == 8);
  CHECK_THROWS_AS(nrp_classes(torus_rotation({0.1}), 1), Unsupported);
  nlohmann::json j = nrp_classes(cyclic_rotation(3, 1), 1);
  CHECK(j["classes"].dump() == "[[0],[1],[2]]");
}
