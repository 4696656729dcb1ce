#include <doctest.h>

#include <cmath>
#include <map>

#include "cubelab/groups.hpp"

using namespace cubelab;
using namespace cubelab::groups;
using cube::Bits;
using cube::vertex_count;

namespace {

GroupCube random_group_cube(const Group& G, int k, Rng& rng) {
  return GroupCube::generate(k, [&](Bits) { return G.random_element(rng); });
}

// Independent oracle: the affine family {a + sum b_j v_j} by direct enumeration.
std::set<GroupCube> affine_family(std::int64_t n, int k) {
  std::set<GroupCube> out;
  std::vector<std::int64_t> params(k + 1, 0);
  while (true) {
    out.insert(GroupCube::generate(k, [&](Bits v) {
      std::int64_t x = params[0];
      for (int j = 0; j < k; ++j)
        if ((v >> j) & 1U) x += params[j + 1];
      return Element{x % n};
    }));
    int i = 0;
    while (i <= k && ++params[i] == n) params[i++] = 0;
    if (i > k) break;
  }
  return out;
}

std::vector<GroupCube> kernel_elements(const Group& A, int n) {
  // Enumerate all configs, keep theta == 0.
  auto elems = A.elements();
  std::vector<GroupCube> out;
  std::vector<std::size_t> idx(vertex_count(n), 0);
  while (true) {
    auto c = GroupCube::generate(n, [&](Bits v) { return elems[idx[v]]; });
    if (cube::theta(c, A) == A.zero()) out.push_back(c);
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == elems.size()) idx[i++] = 0;
    if (i == idx.size()) break;
  }
  return out;
}

}  // namespace

TEST_CASE("group axioms on random triples") {
  std::vector<Group> groups = {Group::integers(3), Group::cyclic(7), Group::finite_abelian({2, 6}),
                               Group::heisenberg(), Group::heisenberg_mod(5)};
  Rng rng = make_rng(21);
  for (const auto& G : groups) {
    for (int i = 0; i < 1000; ++i) {
      auto a = G.random_element(rng), b = G.random_element(rng), c = G.random_element(rng);
      CHECK(G.compose(G.compose(a, b), c) == G.compose(a, G.compose(b, c)));
      CHECK(G.compose(a, G.invert(a)) == G.identity());
      CHECK(G.compose(G.invert(a), a) == G.identity());
      CHECK(G.compose(G.identity(), a) == G.normalize(a));
      if (G.is_abelian()) CHECK(G.compose(a, b) == G.compose(b, a));
      CHECK(G.power(a, 3) == G.compose(a, G.compose(a, a)));
      CHECK(G.power(a, -2) == G.invert(G.compose(a, a)));
    }
  }
}

TEST_CASE("generators generate finite groups") {
  for (const auto& G : {Group::cyclic(6), Group::finite_abelian({2, 3, 4}), Group::heisenberg_mod(3)}) {
    auto all = hk_generate_finite(G, 0);
    CHECK(all.size() == *G.order());
  }
}

TEST_CASE("Heisenberg commutator and lower central series") {
  auto H = Group::heisenberg();
  Element x{1, 0, 0}, y{0, 1, 0};
  auto comm = H.compose(H.compose(x, y), H.compose(H.invert(x), H.invert(y)));
  CHECK(comm == Element{0, 0, 1});
  CHECK(H.lower_central_member(comm, 2));
  CHECK(H.lower_central_member(Element{0, 0, -7}, 2));
  CHECK_FALSE(H.lower_central_member(Element{1, 0, 0}, 2));
  CHECK_FALSE(H.lower_central_member(Element{0, 0, 1}, 3));
  CHECK(H.lower_central_member(H.identity(), 3));
  CHECK(H.lower_central_member(Element{4, 5, 6}, 1));

  // Every commutator of random elements is central, hence in G_2; all [G_2, G] are trivial.
  Rng rng = make_rng(22);
  for (int i = 0; i < 1000; ++i) {
    auto a = H.random_element(rng), b = H.random_element(rng), c = H.random_element(rng);
    auto ab = H.compose(H.compose(a, b), H.compose(H.invert(a), H.invert(b)));
    CHECK(H.lower_central_member(ab, 2));
    auto abc = H.compose(H.compose(ab, c), H.compose(H.invert(ab), H.invert(c)));
    CHECK(H.lower_central_member(abc, 3));
  }

  auto Z = Group::integers(2);
  CHECK(Z.lower_central_member(Element{0, 0}, 2));
  CHECK_FALSE(Z.lower_central_member(Element{1, 0}, 2));
}

TEST_CASE("face and diagonal elements") {
  auto Z = Group::integers(1);
  CHECK(face_element(Z, Element{0}, cube::Face::upper(2, 1)) == diagonal_element(Z, Element{0}, 2));
  auto t = Element{5};
  CHECK(face_element(Z, t, cube::Face::upper(2, 1)).values() == std::vector<Element>{{0}, {5}, {0}, {5}});
  CHECK(diagonal_element(Z, t, 1).values() == std::vector<Element>{{5}, {5}});
}

TEST_CASE("hk_sample") {
  auto Z = Group::integers(1);
  // g^{a1} h^{a2} m^{[2]} multiplied by hand.
  Element g{3}, h{-4}, m{10};
  auto c = cube_compose(Z, cube_compose(Z, face_element(Z, g, cube::Face::upper(2, 1)),
                                        face_element(Z, h, cube::Face::upper(2, 2))),
                        diagonal_element(Z, m, 2));
  CHECK(c.values() == std::vector<Element>{{10}, {13}, {6}, {9}});

  Rng rng = make_rng(23);
  auto Zd = Group::integers(2);
  for (int k = 0; k <= 4; ++k) {
    for (int i = 0; i < 2500; ++i) {
      auto s = hk_sample(Zd, k, 1 + static_cast<int>(uniform_index(rng, 12)), rng);
      CHECK(hk_member_abelian(Zd, s).has_value());
    }
  }
  CHECK_THROWS_AS(hk_sample(Z, 2, 0, rng), PreconditionError);
}

TEST_CASE("Heisenberg samples reduce into the finite cube group") {
  const std::int64_t p = 3;
  auto H = Group::heisenberg();
  auto Hp = Group::heisenberg_mod(p);
  Rng rng = make_rng(24);
  for (int k = 1; k <= 2; ++k) {
    auto oracle = hk_generate_finite(Hp, k);
    for (int i = 0; i < 300; ++i) {
      auto s = hk_sample(H, k, 1 + static_cast<int>(uniform_index(rng, 20)), rng);
      auto reduced = s.map([&](const Element& x) { return Hp.normalize(x); });
      CHECK(oracle.count(reduced) == 1);
    }
  }
  // The cube group is a proper subgroup: a random config is almost never in it.
  auto oracle = hk_generate_finite(Hp, 2);
  CHECK(oracle.size() < 27u * 27u * 27u * 27u);
}

TEST_CASE("hk_member_abelian") {
  auto Z5 = Group::cyclic(5);
  auto w = hk_member_abelian(Z5, GroupCube::constant(3, Element{2}));
  REQUIRE(w);
  for (const auto& b : w->b) CHECK(b == Element{0});

  auto w2 = hk_member_abelian(Z5, GroupCube(2, {{1}, {3}, {2}, {4}}));
  REQUIRE(w2);
  CHECK(w2->a == Element{1});
  CHECK(w2->b == std::vector<Element>{{2}, {1}});
  CHECK_FALSE(hk_member_abelian(Z5, GroupCube(2, {{0}, {0}, {0}, {1}})));
  CHECK_THROWS_AS(hk_member_abelian(Group::heisenberg(), GroupCube::constant(1, Element{0, 0, 0})), Unsupported);
}

TEST_CASE("hk_generate_finite") {
  CHECK(hk_generate_finite(Group::cyclic(2), 1).size() == 4);
  CHECK(hk_generate_finite(Group::cyclic(5), 2).size() == 125);
  CHECK(hk_generate_finite(Group::cyclic(3), 3).size() == 81);
  CHECK_THROWS_AS(hk_generate_finite(Group::cyclic(7), 3, 1000), CapExceeded);
  CHECK_THROWS_AS(hk_generate_finite(Group::integers(1), 1), Unsupported);
}

TEST_CASE("finite cube group equals the affine characterization") {
  for (std::int64_t n : {2, 3, 5}) {
    for (int k = 0; k <= 3; ++k) {
      auto G = Group::cyclic(n);
      auto bfs = hk_generate_finite(G, k);
      CHECK(bfs == affine_family(n, k));
      for (const auto& c : bfs) CHECK(hk_member_abelian(G, c).has_value());
    }
  }
  // Exhaustive in the other direction for Z/3, k = 2: accepted iff generated.
  auto G = Group::cyclic(3);
  auto bfs = hk_generate_finite(G, 2);
  std::size_t accepted = 0;
  for (int code = 0; code < 81; ++code) {
    int r = code;
    auto c = GroupCube::generate(2, [&](Bits) { Element e{r % 3}; r /= 3; return e; });
    const bool in = hk_member_abelian(G, c).has_value();
    accepted += in;
    CHECK(in == (bfs.count(c) == 1));
  }
  CHECK(accepted == 27);
  // Product group Z/2 x Z/3.
  auto P = Group::finite_abelian({2, 3});
  for (const auto& c : hk_generate_finite(P, 2)) CHECK(hk_member_abelian(P, c).has_value());
  CHECK(hk_generate_finite(P, 2).size() == 216);
}

TEST_CASE("hk_plus_member_abelian") {
  auto Z = Group::integers(1);
  CHECK(hk_plus_member_abelian(Z, diagonal_element(Z, Element{4}, 3)));
  CHECK_FALSE(hk_plus_member_abelian(Z, face_element(Z, Element{4}, cube::Face::upper(3, 1))));
  CHECK_FALSE(hk_plus_member_abelian(
      Z, cube_compose(Z, diagonal_element(Z, Element{2}, 2), face_element(Z, Element{1}, cube::Face::upper(2, 2)))));
  CHECK_THROWS_AS(hk_plus_member_abelian(Group::heisenberg(), GroupCube::constant(1, Element{0, 0, 0})), Unsupported);
}

TEST_CASE("edge_decompose examples") {
  cube::IntegerOps z;
  CHECK(edge_decompose(cube::CubeConfig<std::int64_t>::constant(3, 0), z).empty());
  cube::CubeConfig<std::int64_t> u(2, {2, 5, 3, 6});
  auto terms = edge_decompose(u, z);
  CHECK(edge_sum(2, terms, z) == u);
  for (const auto& t : terms) CHECK(t.edge.codim() == 1);
  CHECK_THROWS_AS(edge_decompose(cube::CubeConfig<std::int64_t>(2, {1, 0, 0, 0}), z), PreconditionError);
}

TEST_CASE("edge_decompose re-sums exhaustively over Z/2") {
  auto A = Group::cyclic(2);
  for (int n = 0; n <= 3; ++n) {
    for (const auto& u : kernel_elements(A, n)) {
      auto terms = edge_decompose(u, A);
      CHECK(edge_sum(n, terms, A) == u);
      for (const auto& t : terms) CHECK(t.edge.vertices().size() == 2);
    }
  }
}

TEST_CASE("edge_decompose re-sums random kernel elements") {
  auto A = Group::cyclic(7);
  Rng rng = make_rng(25);
  for (int n = 2; n <= 5; ++n) {
    for (int i = 0; i < 300; ++i) {
      auto u = random_group_cube(A, n, rng);
      // Fix vertex 0 so that theta vanishes.
      u[0] = A.sub(u[0], cube::theta(u, A));
      REQUIRE(cube::theta(u, A) == A.zero());
      CHECK(edge_sum(n, edge_decompose(u, A), A) == u);
    }
  }
  cube::IntegerOps z;
  for (int i = 0; i < 300; ++i) {
    auto u = cube::CubeConfig<std::int64_t>::generate(4, [&](Bits) { return uniform_int(rng, -100, 100); });
    u[0] -= cube::theta(u, z);
    CHECK(edge_sum(4, edge_decompose(u, z), z) == u);
  }
}

TEST_CASE("edge elements generate the theta kernel") {
  for (const auto& A : {Group::cyclic(2), Group::cyclic(3), Group::finite_abelian({2, 2})}) {
    for (int n = 1; n <= 3; ++n) {
      std::vector<GroupCube> gens;
      for (Bits from = 0; from < vertex_count(n); ++from)
        for (int j = 0; j < n; ++j)
          if (!((from >> j) & 1U))
            for (const auto& g : A.generators()) {
              auto e = face_element(A, g, cube::Face::edge(n, from, from | (Bits{1} << j)));
              CHECK(cube::theta(e, A) == A.zero());
              gens.push_back(e);
            }
      auto span = bfs_closure(A, n, gens);
      auto kernel = kernel_elements(A, n);
      CHECK(span == std::set<GroupCube>(kernel.begin(), kernel.end()));
    }
  }
}

TEST_CASE("haar coset measure") {
  auto A = Group::cyclic(6);
  HaarCosetMeasure m(A, {{2}}, {1});
  CHECK(m.support() == std::vector<Element>{{1}, {3}, {5}});
  CHECK(m.probability({3}) == doctest::Approx(1.0 / 3));
  CHECK(m.probability({2}) == 0.0);

  HaarCosetMeasure whole(A, A.generators(), {0});
  CHECK(whole.support().size() == 6);
  HaarCosetMeasure point(A, {}, {4});
  CHECK(point.support() == std::vector<Element>{{4}});
  CHECK(point.probability({4}) == 1.0);

  Rng rng = make_rng(26);
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < 30000; ++i) counts[m.sample(rng)[0]]++;
  CHECK(counts.size() == 3);
  for (auto [x, c] : counts) CHECK(std::abs(c - 10000) < 3 * std::sqrt(30000 * (1.0 / 3) * (2.0 / 3)));

  CHECK_THROWS_AS(HaarCosetMeasure(A, {{7}}, {0}), PreconditionError);
  CHECK_THROWS_AS(HaarCosetMeasure(Group::integers(1), {}, {0}), Unsupported);
}
