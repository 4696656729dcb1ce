#pragma once

// The topological model at sampled scale: a model point (x, a) stands for the
// function -rho_x + a on the cubes of C^{k+1}(X) with c_0 = x. The bundle
// topology is approximated by a finite family of test functionals.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubelab/nilcycle.hpp"
#include "cubelab/stats.hpp"

namespace cubelab::model {

using nilcycle::Nilcycle;
using systems::ExtensionPtr;
using Complex = std::complex<double>;

struct ModelPoint {
  Point x;
  Point a;
  bool operator==(const ModelPoint&) const = default;
};

/// g(x, a) = (g x, a + beta(g, x))
ModelPoint model_act(const systems::SkewExtension& E, const systems::Word& g, const ModelPoint& p);
/// (x, a + b)
ModelPoint model_translate(const ModelPoint& p, const Point& b);
/// x from the invariant measure, a from Haar measure on A.
ModelPoint random_model_point(const systems::SkewExtension& E, Rng& rng);

/// E(f)(c0, c1) = f1(c0) - f2(c1) with f_i = -rho_x + a_i, i.e.
/// rho(c1) - rho(c0) + a1 - a2. Throws PreconditionError unless both points
/// and both cubes share the base point x.
Point difference_map(const Nilcycle& rho, const ModelPoint& p1, const ModelPoint& p2, const cubespace::PointCube& c0,
                     const cubespace::PointCube& c1);

/// Characters e(xi . a) of A and cube test functions e(n . (c_0, t_1, ..., t_{k+1}))
/// with t_j = c_{e_j} - c_0, all in the first base coordinate (residues of
/// Z/N scaled by 1/N).
struct TestFamily {
  std::vector<std::vector<std::int64_t>> characters;
  std::vector<std::vector<std::int64_t>> monomials;

  /// Characters with 0 < |xi|_1 <= max_freq; monomials with |n|_1 <= degree.
  static TestFamily standard(std::size_t fiber_dim, int cube_dim, int max_freq = 3, int degree = 2);
  std::size_t size() const { return characters.size() * monomials.size(); }
  /// Throws PreconditionError if empty, mis-sized, or chi(a + b) != chi(a) chi(b) on random pairs.
  void validate(std::size_t fiber_dim, int cube_dim, Rng& rng) const;
  nlohmann::json describe() const;
};

/// phi(p) = (E_{c ~ mu^x} chi(-rho(c) + a) F(c))_{chi, F}, estimated with a
/// fixed conditional-sample stream shared by all points, so d(p, p) = 0 and
/// nearby points see coupled cube draws.
class BundleEmbedding {
 public:
  BundleEmbedding(Nilcycle rho, TestFamily family, std::size_t n_samples, std::uint64_t seed);

  std::vector<Complex> features(const ModelPoint& p) const;
  /// max_{chi, F} |phi(p1) - phi(p2)| + d_X(x1, x2)
  double distance(const ModelPoint& p1, const ModelPoint& p2) const;
  double distance(const ModelPoint& p1, const std::vector<Complex>& f1, const ModelPoint& p2,
                  const std::vector<Complex>& f2) const;

  const Nilcycle& nilcycle() const { return rho_; }
  const TestFamily& family() const { return family_; }
  std::size_t samples() const { return n_; }

 private:
  Nilcycle rho_;
  TestFamily family_;
  std::size_t n_;
  std::uint64_t seed_;
};

double bundle_pseudometric(const Nilcycle& rho, const ModelPoint& p1, const ModelPoint& p2, const TestFamily& T,
                           std::size_t n_samples, std::uint64_t seed);

/// d_X(x1, x2) + d_A(a1, a2)
double product_distance(const systems::SkewExtension& E, const ModelPoint& p1, const ModelPoint& p2);

struct ContinuityTable {
  std::vector<double> deltas;
  /// Max image distance under the generator among sampled pairs closer than delta.
  std::vector<double> bundle_modulus;
  std::vector<double> naive_modulus;
  std::vector<std::size_t> bundle_pairs;
  std::vector<std::size_t> naive_pairs;
  std::uint64_t seed = 0;
  std::size_t family_size = 0;
  std::size_t samples = 0;

  /// bundle_modulus strictly decreasing along the (decreasing) delta grid.
  bool bundle_decreasing() const;
  double naive_min() const;
};

void to_json(nlohmann::json& j, const ContinuityTable& t);

/// For each delta: sample pairs of model points within delta in the bundle
/// pseudometric (candidates perturb x and a, half of them also shifting a by
/// the change of rho along a coupled cube draw) and, separately, within delta
/// in the product metric; report the largest distance between the images
/// under the first generator, each in its own metric. Product-metric pairs cost
/// no feature evaluations, so they are drawn n_naive_pairs times (default
/// 100 n_pairs) to resolve the thin set of pairs straddling a discontinuity.
ContinuityTable continuity_probe(const ExtensionPtr& E, const Nilcycle& rho, const TestFamily& T, std::size_t n_pairs,
                                 const std::vector<double>& deltas, std::size_t n_samples, std::uint64_t seed,
                                 std::size_t n_naive_pairs = 0);

struct QReport {
  double max_dev = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

void to_json(nlohmann::json& j, const QReport& r);

/// The vertex value fixed by sum_v (-1)^{|v|} a_v = rho_c given the others.
Point solve_origin(const Point& rho_c, const cube::CubeConfig<Point>& a);

/// Draw orbit lifts in C^{k+1}(E) (Host-Kra words on diagonal points), keep the
/// fiber values away from the origin, solve for the origin value from the
/// Q-membership equation and compare with the lift's own origin value.
QReport q_uniqueness_check(const Nilcycle& rho, const ExtensionPtr& E, std::size_t n_samples, std::uint64_t seed,
                           double tol = nilcycle::kAxiomTolerance);

/// Fourier two-sample comparison of n draws of (x, a) from mu x Haar with the
/// images of n independent draws under the first generator.
stats::TwoSampleResult measure_preservation(const systems::SkewExtension& E, std::size_t n, std::uint64_t seed,
                                            int max_freq = 3);

/// Greedy eps-net sizes of n random model points in the bundle pseudometric.
std::vector<std::pair<double, std::size_t>> epsilon_net_sizes(const BundleEmbedding& emb,
                                                              const systems::SkewExtension& E, std::size_t n_points,
                                                              const std::vector<double>& eps, std::uint64_t seed);
std::string epsilon_net_csv(const std::vector<std::pair<double, std::size_t>>& sizes);

}  // namespace cubelab::model
