#pragma once

// Explicit dynamical systems acted on by Z^r, and cocycle extensions of them.
// Points are vectors of doubles: torus coordinates in [0,1), or the integral
// residue of Z/N for cyclic rotations.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubelab/rng.hpp"
#include "cubelab/torus.hpp"

namespace cubelab::systems {

/// An element of the acting group Z^r.
using Word = std::vector<std::int64_t>;

Word word_add(const Word& a, const Word& b);
Word word_neg(const Word& a);

/// Golden-ratio rotation number, the default irrational parameter.
inline constexpr double kGoldenAlpha = 0.6180339887498949;

class System {
 public:
  virtual ~System() = default;

  virtual std::string kind() const = 0;
  /// Number of doubles in a point.
  virtual std::size_t point_dim() const = 0;
  /// Rank r of the acting group Z^r.
  virtual int rank() const { return 1; }
  virtual Point act(const Word& g, const Point& x) const = 0;
  /// A draw from the invariant measure.
  virtual Point sample(Rng& rng) const = 0;
  virtual double distance(const Point& x, const Point& y) const = 0;
  virtual bool is_finite() const { return false; }
  /// All points of a finite system; throws Unsupported otherwise.
  virtual std::vector<Point> points() const;
  virtual nlohmann::json describe() const = 0;

  Point act(std::int64_t n, const Point& x) const { return act(Word{n}, x); }
  void check_point(const Point& x) const;
  void check_word(const Word& g) const;
};

using SystemPtr = std::shared_ptr<const System>;

/// Z/N with x -> x + a. Points are {double(i)}; distance is cyclic distance / N.
class CyclicRotation : public System {
 public:
  CyclicRotation(std::int64_t n, std::int64_t a);

  std::string kind() const override { return "cyclic"; }
  std::size_t point_dim() const override { return 1; }
  using System::act;
  Point act(const Word& g, const Point& x) const override;
  Point sample(Rng& rng) const override;
  double distance(const Point& x, const Point& y) const override;
  bool is_finite() const override { return true; }
  std::vector<Point> points() const override;
  nlohmann::json describe() const override;

  std::int64_t modulus() const { return n_; }
  std::int64_t step() const { return a_; }
  std::int64_t index(const Point& x) const;

 private:
  std::int64_t n_;
  std::int64_t a_;
};

/// T^d with x -> x + alpha.
class TorusRotation : public System {
 public:
  explicit TorusRotation(Point alpha);

  std::string kind() const override { return "torus"; }
  std::size_t point_dim() const override { return alpha_.size(); }
  using System::act;
  Point act(const Word& g, const Point& x) const override;
  Point sample(Rng& rng) const override;
  double distance(const Point& x, const Point& y) const override { return torus::dist(x, y); }
  nlohmann::json describe() const override;

  const Point& alpha() const { return alpha_; }

 private:
  Point alpha_;
};

/// T(x_1..x_d) = (x_1 + alpha, x_2 + x_1, ..., x_d + x_{d-1}).
/// n-th iterate in closed form: x_i(n) = sum_{j=0}^{i} C(n, j) x_{i-j}, x_0 = alpha.
class WeylTower : public System {
 public:
  WeylTower(int d, double alpha);

  std::string kind() const override { return "weyl"; }
  std::size_t point_dim() const override { return static_cast<std::size_t>(d_); }
  using System::act;
  Point act(const Word& g, const Point& x) const override;
  Point sample(Rng& rng) const override;
  double distance(const Point& x, const Point& y) const override { return torus::dist(x, y); }
  nlohmann::json describe() const override;

  int depth() const { return d_; }
  double alpha() const { return alpha_; }
  /// One application of T, computed by the recurrence (for cross-checking).
  Point step(const Point& x) const;

 private:
  int d_;
  double alpha_;
};

// ---------------------------------------------------------------------------
// Cocycles with values in A = T^m (additive notation).

class Cocycle {
 public:
  virtual ~Cocycle() = default;
  virtual std::string kind() const = 0;
  virtual const SystemPtr& base() const = 0;
  virtual std::size_t fiber_dim() const = 0;
  /// beta(g, x)
  virtual Point eval(const Word& g, const Point& x) const = 0;
  virtual nlohmann::json describe() const = 0;

  Point eval(std::int64_t n, const Point& x) const { return eval(Word{n}, x); }
};

using CocyclePtr = std::shared_ptr<const Cocycle>;

class ZeroCocycle : public Cocycle {
 public:
  ZeroCocycle(SystemPtr base, std::size_t m);
  std::string kind() const override { return "zero"; }
  const SystemPtr& base() const override { return base_; }
  std::size_t fiber_dim() const override { return m_; }
  using Cocycle::eval;
  Point eval(const Word& g, const Point& x) const override;
  nlohmann::json describe() const override { return {{"cocycle", "zero"}, {"m", m_}}; }

 private:
  SystemPtr base_;
  std::size_t m_;
};

/// beta(g, x) = sum_i g_i lambda_i.
class ConstantCocycle : public Cocycle {
 public:
  ConstantCocycle(SystemPtr base, std::vector<Point> lambda);
  std::string kind() const override { return "constant"; }
  const SystemPtr& base() const override { return base_; }
  std::size_t fiber_dim() const override { return lambda_.front().size(); }
  using Cocycle::eval;
  Point eval(const Word& g, const Point& x) const override;
  nlohmann::json describe() const override;

 private:
  SystemPtr base_;
  std::vector<Point> lambda_;  // one per generator
};

/// Over a rotation by alpha: beta(1, x) = x_j, so
/// beta(n, x) = n x_j + C(n, 2) alpha_j for all integers n.
class CoordinateCocycle : public Cocycle {
 public:
  CoordinateCocycle(std::shared_ptr<const TorusRotation> base, std::size_t j);
  std::string kind() const override { return "coordinate"; }
  const SystemPtr& base() const override { return base_; }
  std::size_t fiber_dim() const override { return 1; }
  using Cocycle::eval;
  Point eval(const Word& g, const Point& x) const override;
  nlohmann::json describe() const override { return {{"cocycle", "coordinate"}, {"j", j_}}; }

  std::size_t coordinate() const { return j_; }
  const TorusRotation& rotation() const { return *rotation_; }

 private:
  std::shared_ptr<const TorusRotation> rotation_;
  SystemPtr base_;
  std::size_t j_;
};

/// A cocycle over a rank-1 action given by its generator value f(x) = beta(1, x)
/// and extended by the cocycle identity: beta(n, x) = sum_{i<n} f(T^i x) for
/// n >= 0 and -sum_{n<=i<0} f(T^i x) for n < 0. Cost is O(|n|).
class GeneratorCocycle : public Cocycle {
 public:
  GeneratorCocycle(SystemPtr base, std::size_t m, std::function<Point(const Point&)> f, std::int64_t max_steps = 1 << 20);
  std::string kind() const override { return "generator"; }
  const SystemPtr& base() const override { return base_; }
  std::size_t fiber_dim() const override { return m_; }
  using Cocycle::eval;
  Point eval(const Word& g, const Point& x) const override;
  nlohmann::json describe() const override { return {{"cocycle", "generator"}, {"m", m_}}; }

 private:
  SystemPtr base_;
  std::size_t m_;
  std::function<Point(const Point&)> f_;
  std::int64_t max_steps_;
};

/// beta(n, x) = n x_1 with no alpha term. Violates the cocycle identity;
/// used for fault injection.
class BrokenCocycle : public Cocycle {
 public:
  explicit BrokenCocycle(SystemPtr base);
  std::string kind() const override { return "broken"; }
  const SystemPtr& base() const override { return base_; }
  std::size_t fiber_dim() const override { return 1; }
  using Cocycle::eval;
  Point eval(const Word& g, const Point& x) const override;
  nlohmann::json describe() const override { return {{"cocycle", "broken"}}; }

 private:
  SystemPtr base_;
};

/// A pointwise map h: X -> A used for coboundary twists.
struct FiberFunction {
  std::string name;
  std::size_t fiber_dim = 1;
  std::function<Point(const Point&)> eval;
  nlohmann::json spec;

  Point operator()(const Point& x) const { return eval(x); }
};

FiberFunction zero_function(std::size_t m);
FiberFunction constant_function(Point c);
/// h(x) = jump * 1_{[at, at + width)}(x_1) in fiber coordinate 1 (interval taken mod 1).
FiberFunction step_function(double jump, double at, double width = 0.5, std::size_t m = 1);
FiberFunction sum_function(const FiberFunction& a, const FiberFunction& b);

/// beta'(g, x) = beta(g, x) + h(gx) - h(x).
class TwistedCocycle : public Cocycle {
 public:
  TwistedCocycle(CocyclePtr inner, FiberFunction h);
  std::string kind() const override { return "twisted"; }
  const SystemPtr& base() const override { return inner_->base(); }
  std::size_t fiber_dim() const override { return inner_->fiber_dim(); }
  using Cocycle::eval;
  Point eval(const Word& g, const Point& x) const override;
  nlohmann::json describe() const override;

  const CocyclePtr& inner() const { return inner_; }
  const FiberFunction& h() const { return h_; }

 private:
  CocyclePtr inner_;
  FiberFunction h_;
};

CocyclePtr coboundary_twist(CocyclePtr beta, FiberFunction h);

struct CocycleCheck {
  double max_deviation = 0.0;
  std::size_t samples = 0;
};

/// Max over sampled (t, t', y) of d(beta(t + t', y), beta(t, t'y) + beta(t', y)).
/// Words are drawn with entries in [-word_range, word_range].
CocycleCheck cocycle_check(const Cocycle& beta, std::size_t n_samples, Rng& rng, std::int64_t word_range = 50);

inline constexpr double kCocycleTolerance = 1e-9;

/// Y = X x A with t(x, u) = (tx, u + beta(t, x)); points are x followed by u.
class SkewExtension : public System {
 public:
  /// Runs cocycle_check with a fixed seed and throws PreconditionError above kCocycleTolerance.
  explicit SkewExtension(CocyclePtr beta);

  std::string kind() const override { return "skew"; }
  std::size_t point_dim() const override { return base_dim_ + fiber_dim_; }
  int rank() const override { return beta_->base()->rank(); }
  using System::act;
  Point act(const Word& g, const Point& y) const override;
  Point sample(Rng& rng) const override;
  double distance(const Point& x, const Point& y) const override;
  nlohmann::json describe() const override;

  const Cocycle& cocycle() const { return *beta_; }
  const CocyclePtr& cocycle_ptr() const { return beta_; }
  const System& base() const { return *beta_->base(); }
  const SystemPtr& base_ptr() const { return beta_->base(); }
  std::size_t base_dim() const { return base_dim_; }
  std::size_t fiber_dim() const { return fiber_dim_; }

  Point base_part(const Point& y) const;
  Point fiber_part(const Point& y) const;
  Point join(const Point& x, const Point& u) const;
  /// (x, u + a)
  Point translate(const Point& y, const Point& a) const;

 private:
  CocyclePtr beta_;
  std::size_t base_dim_;
  std::size_t fiber_dim_;
};

using ExtensionPtr = std::shared_ptr<const SkewExtension>;

std::shared_ptr<const SkewExtension> skew_extension(CocyclePtr beta);
std::shared_ptr<const CyclicRotation> cyclic_rotation(std::int64_t n, std::int64_t a);
std::shared_ptr<const TorusRotation> torus_rotation(Point alpha);
std::shared_ptr<const WeylTower> weyl_tower(int d, double alpha);
/// T(x, y) = (x + alpha, y + x) as the extension of a circle rotation by x.
std::shared_ptr<const SkewExtension> skew_torus(double alpha);

// ---------------------------------------------------------------------------
// Config parsing. Throws ConfigError naming the offending field.

/// {"system":"cyclic","n":64,"a":1}, {"system":"torus","alpha":[...]},
/// {"system":"weyl","d":3,"alpha":...}, {"system":"skew_torus","alpha":...,
/// "cocycle":"coordinate"|"zero"|"broken","twist":{"h":"step",...}}.
SystemPtr system_from_json(const nlohmann::json& spec, const std::string& field = "system");
/// As above, but the config must describe an extension (skew_torus or product).
ExtensionPtr extension_from_json(const nlohmann::json& spec, const std::string& field = "system");
FiberFunction fiber_function_from_json(const nlohmann::json& spec, const std::string& field = "twist");

}  // namespace cubelab::systems
