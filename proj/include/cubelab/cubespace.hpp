#pragma once

// Dynamical cubes C^k(X) for the concrete systems: samplers, membership,
// corner completion, tricubes, glueable pairs and NRP classes on finite systems.
//
// Two sampling laws are offered. Orbit: c_v = (n_0 + sum_j n_j v_j) . x with
// x from the invariant measure and large random integers n_j, i.e. a Host-Kra
// word applied to a diagonal point. Closure: the closed-form parameterization
// of the cube set (affine cubes for rotations, quadratic fibers for the skew
// torus), available where such a parameterization is known.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "cubelab/cube.hpp"
#include "cubelab/systems.hpp"

namespace cubelab::cubespace {

using cube::Bits;
using cube::CubeConfig;
using PointCube = CubeConfig<Point>;
using systems::System;
using systems::Word;

enum class CubeLaw { Orbit, Closure };

CubeLaw cube_law_from_string(const std::string& s);
std::string to_string(CubeLaw law);

inline constexpr int kMaxCubeDim = 8;
inline constexpr double kCubeTolerance = 1e-9;

/// c_v = x + sum_j t_j v_j on T^d.
PointCube affine_cube(const Point& x, const std::vector<Point>& t);

/// c_v = g_v . x_v, the vertex-wise action of a configuration of words.
PointCube act_words(const System& X, const CubeConfig<Word>& g, const PointCube& c);

/// Magnitude bound for the random integers of the orbit law; chosen so that
/// the closed-form actions stay exact in double precision.
std::int64_t orbit_word_range(const System& X);

/// A Host-Kra word configuration n_v = sum_j n_j v_j with n_j uniform in
/// [-range, range]^rank.
CubeConfig<Word> random_affine_words(int k, int rank, std::int64_t range, Rng& rng);

/// Fiber over a base cube: the closed-form law of u_v given base cube c and
/// u_0, for cocycles where it is known (zero, coordinate, twisted by a
/// pointwise h). Returns nullopt otherwise.
std::optional<PointCube> closure_fiber(const systems::Cocycle& beta, const PointCube& base_cube, const Point& u0,
                                       Rng& rng);

/// Samples cubes with c_0 = x exactly.
class ConditionalCubeSampler {
 public:
  ConditionalCubeSampler(systems::SystemPtr X, int k, Point x, CubeLaw law = CubeLaw::Closure);

  PointCube sample(Rng& rng) const;
  const Point& base_point() const { return x_; }
  int dim() const { return k_; }
  CubeLaw law() const { return law_; }

 private:
  systems::SystemPtr X_;
  int k_;
  Point x_;
  CubeLaw law_;
};

ConditionalCubeSampler conditional_sampler(systems::SystemPtr X, int k, Point x, CubeLaw law = CubeLaw::Closure);

/// A draw from the cube measure on C^k(X).
PointCube sample_cube(const systems::SystemPtr& X, int k, Rng& rng, CubeLaw law = CubeLaw::Closure);

/// Apply a Host-Kra word of the given length (groups::hk_sample over Z^rank)
/// to a diagonal point drawn from the invariant measure.
PointCube sample_cube_hk(const System& X, int k, int word_length, Rng& rng);

/// Whether the law is available for X (Orbit always is).
bool supports_closure(const System& X);

/// Membership in C^k(X). Rotations: affine within tol. Skew torus / depth-2
/// Weyl tower: base affine and fiber of multilinear degree <= 2. Product
/// extensions: base cube and constant fiber. Cyclic rotations: exact affine
/// with steps in the subgroup generated by a. Throws Unsupported otherwise.
bool is_cube(const System& X, const PointCube& c, double tol = kCubeTolerance);

/// Largest violation behind is_cube (0 for exact cubes); same support.
double cube_defect(const System& X, const PointCube& c);

/// The top vertex completing a corner whose lower faces are cubes.
Point corner_complete(const System& X, const cube::Corner<Point>& corner, double tol = kCubeTolerance);

// ---------------------------------------------------------------------------

/// A labelling of {-1,0,1}^n by points, indexed by TriVertex::index().
struct Tricube {
  int n = 0;
  std::vector<Point> values;
};

/// Draw c in C^{2n}(X) and restrict along q.
Tricube tricube_sample(const systems::SystemPtr& X, int n, Rng& rng, CubeLaw law = CubeLaw::Closure);
/// Tricube from a given 2n-cube.
Tricube tricube_from_cube(const PointCube& c);
/// psi_v(t) = (t_{Psi_v(eps)})_eps
PointCube tricube_psi(const Tricube& t, Bits v);
/// omega(t) = (t_{Omega(eps)})_eps
PointCube tricube_omega(const Tricube& t);

/// (c1, c2) glueable (k+1)-cubes from one c in C^{k+2}(X): c2 = c restricted
/// to {v_{k+1} = 0}; c1 = c restricted to {v_{k+2} = 0} and reflected in its
/// last coordinate, so that c1's upper face is c2's lower face.
std::pair<PointCube, PointCube> glueable_pair_sample(const systems::SystemPtr& X, int k, Rng& rng,
                                                     CubeLaw law = CubeLaw::Closure);
std::pair<PointCube, PointCube> glueable_pair_from_cube(const PointCube& c);

// ---------------------------------------------------------------------------
// Finite systems

/// The exact cube set C^k(X) of a finite system by BFS: closure of all
/// diagonal configurations under the face and diagonal generators.
class FiniteCubeSet {
 public:
  FiniteCubeSet(systems::SystemPtr X, int k, std::size_t cap = 4'000'000);

  int dim() const { return k_; }
  std::size_t size() const { return cubes_.size(); }
  std::size_t point_count() const { return points_.size(); }
  const Point& point(std::size_t i) const { return points_[i]; }
  std::size_t index_of(const Point& p) const;

  bool contains(const std::vector<std::uint32_t>& idx) const { return cubes_.count(idx) > 0; }
  bool contains(const PointCube& c) const;
  /// Cubes with c_0 = point i.
  std::vector<PointCube> fiber(std::size_t i) const;
  /// Some top vertex completing the corner, or nullopt.
  std::optional<Point> complete(const cube::Corner<Point>& corner) const;
  const std::set<std::vector<std::uint32_t>>& cubes() const { return cubes_; }

 private:
  systems::SystemPtr X_;
  int k_;
  std::vector<Point> points_;
  std::map<Point, std::size_t> index_;
  std::set<std::vector<std::uint32_t>> cubes_;
};

struct NrpReport {
  int k = 0;
  std::size_t points = 0;
  /// Classes of the equivalence relation generated by ~_k, as point indices.
  std::vector<std::vector<std::size_t>> classes;
  /// Whether ~_k itself was already reflexive, symmetric and transitive.
  bool relation_is_equivalence = true;
  /// Whether the generator maps classes onto classes.
  bool action_invariant = true;
  std::size_t cube_count = 0;
};

/// x ~_k y iff (x, ..., x, y) is in C^{k+1}(X).
NrpReport nrp_classes(const systems::SystemPtr& X, int k, std::size_t cap = 4'000'000);

void to_json(nlohmann::json& j, const NrpReport& r);

}  // namespace cubelab::cubespace
