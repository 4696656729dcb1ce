#pragma once

// Nilcycles rho: C^{k+1}(X) -> A = T^m, their extraction from a skew
// extension as theta of lifted cubes, and sampled verification of the
// identities a nilcycle satisfies.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubelab/cube.hpp"
#include "cubelab/cubespace.hpp"
#include "cubelab/groups.hpp"
#include "cubelab/systems.hpp"

namespace cubelab::nilcycle {

using cubespace::PointCube;
using systems::ExtensionPtr;
using systems::SystemPtr;

inline constexpr int kMaxDegree = 3;
/// Gate for the verification identities.
inline constexpr double kAxiomTolerance = 1e-6;

class Nilcycle {
 public:
  using Evaluator = std::function<Point(const PointCube&)>;

  /// rho = 0.
  static Nilcycle zero(SystemPtr base, int k, std::size_t m = 1);
  /// rho(c) = sum_v (-1)^{|v|} h(c_v): the nilcycle of the extension twisted by h.
  static Nilcycle coboundary(SystemPtr base, int k, systems::FiberFunction h);
  /// rho(c) = theta of the closed-form lift of c to C^{k+1}(E). The lift's free
  /// coefficients are drawn from a stream seeded by the cube itself, so the
  /// evaluator is a deterministic function.
  static Nilcycle extracted(ExtensionPtr E, int k);
  /// rho + eps 1_{[0, 1/2)}(first coordinate of c_0): breaks glueing.
  static Nilcycle perturbed(const Nilcycle& inner, double eps = 0.25);
  /// Values on the finite cube set of a finite base, keyed by vertex indices.
  static Nilcycle table(SystemPtr base, int k, std::map<std::vector<std::int64_t>, Point> values, std::size_t m = 1);

  int degree() const { return k_; }
  int cube_dim() const { return k_ + 1; }
  const SystemPtr& base() const { return base_; }
  std::size_t fiber_dim() const { return m_; }
  const std::string& kind() const { return kind_; }
  nlohmann::json describe() const { return spec_; }

  /// rho(c). Throws DimensionError for a cube of the wrong dimension and
  /// Error for a table miss.
  Point eval(const PointCube& c) const;

 private:
  Nilcycle(std::string kind, SystemPtr base, int k, std::size_t m, Evaluator f, nlohmann::json spec);

  std::string kind_;
  SystemPtr base_;
  int k_;
  std::size_t m_;
  Evaluator f_;
  nlohmann::json spec_;
};

/// sum_v (-1)^{|v|} h(c_v)
Point alternating_sum(const systems::FiberFunction& h, const PointCube& c);

// ---------------------------------------------------------------------------
// Extraction

struct ExtractionSample {
  PointCube base_cube;
  Point theta;
};

struct ExtractionBin {
  std::vector<std::int64_t> key;
  /// theta of the bin's first lift.
  Point rho;
  /// Max distance between theta values of lifts pooled in the bin.
  double spread = 0.0;
  /// Distance between rho and the closed-form evaluator at the first base cube.
  double evaluator_gap = 0.0;
  bool flagged = false;
  std::vector<ExtractionSample> samples;
};

struct ExtractionOptions {
  std::size_t n_cubes = 1000;
  std::size_t n_fiber = 8;
  /// Bins partition the affine cube parameters (c_0, t_1..t_{k+1}) on this mesh.
  int bins_per_unit = 256;
  /// Lifts within a bin further apart than this mark the bin as flagged.
  double spread_tolerance = 1e-7;
  /// Extraction fails if more bins than this fraction are flagged.
  double max_flagged_fraction = 0.02;
  /// Near-return times q have ||q alpha|| below this.
  double return_tolerance = 2e-5;
};

struct ExtractionReport {
  int k = 0;
  std::size_t n_cubes = 0;
  std::size_t n_fiber = 0;
  std::int64_t return_time = 0;
  double return_distance = 0.0;
  std::size_t flagged_bins = 0;
  double flagged_fraction = 0.0;
  /// Maxima over unflagged bins.
  double max_spread = 0.0;
  double max_evaluator_gap = 0.0;
  double max_abs_rho = 0.0;
  std::vector<ExtractionBin> bins;
};

void to_json(nlohmann::json& j, const ExtractionReport& r);
/// One row per sampled lift: bin key, flag, base cube parameters, theta.
std::string extraction_csv(const ExtractionReport& r);

/// Smallest q >= 1 with base distance d(T^q x, x) < tol for all x (rotations).
std::pair<std::int64_t, double> near_return_time(const systems::System& X, double tol, std::int64_t max_q = 10'000'000);

/// Sample base cubes through orbit lifts in C^{k+1}(E): Host-Kra words on
/// diagonal points. Each primary lift is accompanied by n_fiber - 1 lifts whose
/// words are shifted by small multiples of a near-return time and whose fiber
/// coordinate is redrawn; their base cubes land within ~1e-4 of the primary
/// one, so theta should agree. Throws PreconditionError when theta is not
/// fiber-constant on more than max_flagged_fraction of the bins.
std::pair<Nilcycle, ExtractionReport> extract_nilcycle(const ExtensionPtr& E, int k, const ExtractionOptions& opt,
                                                       Rng& rng);

// ---------------------------------------------------------------------------
// Verification

struct IdentityResult {
  std::string identity;
  double max_dev = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

struct NilcycleReport {
  std::vector<IdentityResult> identities;
  std::uint64_t seed = 0;
  double tolerance = kAxiomTolerance;
  bool pass = false;

  const IdentityResult& at(const std::string& identity) const;
};

void to_json(nlohmann::json& j, const NilcycleReport& r);

inline const std::vector<std::string> kIdentityNames = {"cube_invariance", "glueing", "equivariance", "tricube"};

/// Check on sampled cubes of the base, each identity on its own substream:
///   cube_invariance  rho(sigma c) = sgn(sigma) rho(c)
///   glueing          rho(b || c) = rho(b) + rho(c)
///   equivariance     rho(g c) = rho(c) + sum_v (-1)^{|v|} beta(g_v, c_v), g in HK^{k+1}(Z^r)
///   tricube          sum_v (-1)^{|v|} rho(psi_v(t)) = rho(omega(t))
NilcycleReport verify_nilcycle(const Nilcycle& rho, const ExtensionPtr& E, std::size_t n_samples, std::uint64_t seed,
                               double tol = kAxiomTolerance);

// ---------------------------------------------------------------------------

template <class T>
struct KernelProjection {
  T theta;
  /// theta(a) placed at the top vertex with sign (-1)^{dim}.
  cube::CubeConfig<T> d;
  /// Edge decomposition of u = a - d, which lies in ker theta.
  std::vector<groups::EdgeTerm<T>> edges;
};

template <class T, class Ops>
KernelProjection<T> kernel_project(const cube::CubeConfig<T>& a, const Ops& ops) {
  const int n = a.dim();
  const T th = cube::theta(a, ops);
  auto d = cube::CubeConfig<T>::constant(n, ops.zero());
  const cube::Bits top = cube::top_vertex(n);
  d[top] = (n % 2 == 0) ? th : ops.sub(ops.zero(), th);
  auto u = cube::CubeConfig<T>::generate(n, [&](cube::Bits v) { return ops.sub(a[v], d[v]); });
  return {th, std::move(d), groups::edge_decompose(u, ops)};
}

}  // namespace cubelab::nilcycle
