#include "cubelab/systems.hpp"

#include <cmath>

#include "cubelab/error.hpp"

namespace cubelab::systems {

Word word_add(const Word& a, const Word& b) {
  if (a.size() != b.size()) throw DimensionError("words of different rank");
  Word r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Word word_neg(const Word& a) {
  Word r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

std::vector<Point> System::points() const { throw Unsupported("system '" + kind() + "' is not finite"); }

void System::check_point(const Point& x) const {
  if (x.size() != point_dim())
    throw DimensionError("point of dimension " + std::to_string(x.size()) + " given to a " + kind() + " system of dimension " +
                         std::to_string(point_dim()));
}

void System::check_word(const Word& g) const {
  if (static_cast<int>(g.size()) != rank())
    throw DimensionError("word of rank " + std::to_string(g.size()) + " for an action of rank " + std::to_string(rank()));
}

// ---------------------------------------------------------------------------

CyclicRotation::CyclicRotation(std::int64_t n, std::int64_t a) : n_(n), a_(a) {
  if (n < 1) throw PreconditionError("cyclic rotation needs N >= 1");
}

std::int64_t CyclicRotation::index(const Point& x) const {
  check_point(x);
  auto i = static_cast<std::int64_t>(std::llround(x[0]));
  i %= n_;
  return i < 0 ? i + n_ : i;
}

Point CyclicRotation::act(const Word& g, const Point& x) const {
  check_word(g);
  const __int128 shift = static_cast<__int128>(g[0] % n_) * (a_ % n_);
  auto r = static_cast<std::int64_t>((index(x) + shift) % n_);
  if (r < 0) r += n_;
  return {static_cast<double>(r)};
}

Point CyclicRotation::sample(Rng& rng) const { return {static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(n_)))}; }

double CyclicRotation::distance(const Point& x, const Point& y) const {
  std::int64_t d = (index(x) - index(y)) % n_;
  if (d < 0) d += n_;
  return static_cast<double>(std::min(d, n_ - d)) / static_cast<double>(n_);
}

std::vector<Point> CyclicRotation::points() const {
  std::vector<Point> out;
  for (std::int64_t i = 0; i < n_; ++i) out.push_back({static_cast<double>(i)});
  return out;
}

nlohmann::json CyclicRotation::describe() const { return {{"system", "cyclic"}, {"n", n_}, {"a", a_}}; }

// ---------------------------------------------------------------------------

TorusRotation::TorusRotation(Point alpha) : alpha_(torus::reduce(std::move(alpha))) {
  if (alpha_.empty()) throw DimensionError("torus rotation needs d >= 1");
}

Point TorusRotation::act(const Word& g, const Point& x) const {
  check_word(g);
  check_point(x);
  Point r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = torus::frac(x[i] + torus::mul(g[0], alpha_[i]));
  return r;
}

Point TorusRotation::sample(Rng& rng) const {
  Point r(alpha_.size());
  for (auto& v : r) v = uniform01(rng);
  return r;
}

nlohmann::json TorusRotation::describe() const { return {{"system", "torus"}, {"alpha", alpha_}}; }

// ---------------------------------------------------------------------------

WeylTower::WeylTower(int d, double alpha) : d_(d), alpha_(torus::frac(alpha)) {
  if (d < 1) throw DimensionError("Weyl tower needs d >= 1");
  if (d > 8) throw DimensionError("Weyl tower depth is capped at 8");
}

Point WeylTower::act(const Word& g, const Point& x) const {
  check_word(g);
  check_point(x);
  const std::int64_t n = g[0];
  Point r(d_);
  for (int i = 1; i <= d_; ++i) {
    double s = x[i - 1];
    for (int j = 1; j <= i; ++j) {
      const double src = (i - j == 0) ? alpha_ : x[i - j - 1];
      s += torus::mul(torus::binomial(n, j), src);
    }
    r[i - 1] = torus::frac(s);
  }
  return r;
}

Point WeylTower::step(const Point& x) const {
  check_point(x);
  Point r(d_);
  r[0] = torus::frac(x[0] + alpha_);
  for (int i = 1; i < d_; ++i) r[i] = torus::frac(x[i] + x[i - 1]);
  return r;
}

Point WeylTower::sample(Rng& rng) const {
  Point r(d_);
  for (auto& v : r) v = uniform01(rng);
  return r;
}

nlohmann::json WeylTower::describe() const { return {{"system", "weyl"}, {"d", d_}, {"alpha", alpha_}}; }

// ---------------------------------------------------------------------------

ZeroCocycle::ZeroCocycle(SystemPtr base, std::size_t m) : base_(std::move(base)), m_(m) {
  if (m < 1) throw DimensionError("structure group dimension must be >= 1");
}

Point ZeroCocycle::eval(const Word& g, const Point&) const {
  base_->check_word(g);
  return torus::zero(m_);
}

ConstantCocycle::ConstantCocycle(SystemPtr base, std::vector<Point> lambda) : base_(std::move(base)), lambda_(std::move(lambda)) {
  if (static_cast<int>(lambda_.size()) != base_->rank()) throw DimensionError("constant cocycle needs one value per generator");
}

Point ConstantCocycle::eval(const Word& g, const Point&) const {
  base_->check_word(g);
  Point r = torus::zero(fiber_dim());
  for (std::size_t i = 0; i < g.size(); ++i) torus::add_in_place(r, torus::scale(g[i], lambda_[i]));
  return r;
}

nlohmann::json ConstantCocycle::describe() const { return {{"cocycle", "constant"}, {"lambda", lambda_}}; }

CoordinateCocycle::CoordinateCocycle(std::shared_ptr<const TorusRotation> base, std::size_t j)
    : rotation_(std::move(base)), base_(rotation_), j_(j) {
  if (j >= rotation_->point_dim()) throw DimensionError("coordinate cocycle index out of range");
}

Point CoordinateCocycle::eval(const Word& g, const Point& x) const {
  base_->check_word(g);
  const std::int64_t n = g[0];
  return {torus::frac(torus::mul(n, x[j_]) + torus::mul(torus::binomial(n, 2), rotation_->alpha()[j_]))};
}

GeneratorCocycle::GeneratorCocycle(SystemPtr base, std::size_t m, std::function<Point(const Point&)> f,
                                   std::int64_t max_steps)
    : base_(std::move(base)), m_(m), f_(std::move(f)), max_steps_(max_steps) {
  if (base_->rank() != 1) throw Unsupported("generator cocycles are defined for rank-1 actions");
}

Point GeneratorCocycle::eval(const Word& g, const Point& x) const {
  base_->check_word(g);
  const std::int64_t n = g[0];
  if (n > max_steps_ || -n > max_steps_) throw CapExceeded("generator cocycle evaluated beyond its step cap");
  Point sum = torus::zero(m_);
  if (n >= 0) {
    Point y = x;
    for (std::int64_t i = 0; i < n; ++i) {
      torus::add_in_place(sum, f_(y));
      y = base_->act(1, y);
    }
    return sum;
  }
  Point y = x;
  for (std::int64_t i = 0; i < -n; ++i) {
    y = base_->act(-1, y);
    torus::add_in_place(sum, f_(y));
  }
  return torus::neg(sum);
}

BrokenCocycle::BrokenCocycle(SystemPtr base) : base_(std::move(base)) {}

Point BrokenCocycle::eval(const Word& g, const Point& x) const {
  base_->check_word(g);
  return {torus::mul(g[0], x[0])};
}

// ---------------------------------------------------------------------------

FiberFunction zero_function(std::size_t m) {
  return {"zero", m, [m](const Point&) { return torus::zero(m); }, {{"h", "zero"}}};
}

FiberFunction constant_function(Point c) {
  const std::size_t m = c.size();
  nlohmann::json spec = {{"h", "constant"}, {"value", c}};
  return {"constant", m, [c = torus::reduce(std::move(c))](const Point&) { return c; }, spec};
}

FiberFunction step_function(double jump, double at, double width, std::size_t m) {
  if (!(width > 0.0 && width <= 1.0)) throw PreconditionError("step width must lie in (0, 1]");
  nlohmann::json spec = {{"h", "step"}, {"jump", jump}, {"at", at}, {"width", width}};
  auto f = [=](const Point& x) {
    Point r = torus::zero(m);
    if (torus::frac(x[0] - at) < width) r[0] = torus::frac(jump);
    return r;
  };
  return {"step", m, f, spec};
}

FiberFunction sum_function(const FiberFunction& a, const FiberFunction& b) {
  if (a.fiber_dim != b.fiber_dim) throw DimensionError("fiber functions of different dimension");
  auto f = [ea = a.eval, eb = b.eval](const Point& x) { return torus::add(ea(x), eb(x)); };
  return {a.name + "+" + b.name, a.fiber_dim, f, {{"h", "sum"}, {"terms", {a.spec, b.spec}}}};
}

TwistedCocycle::TwistedCocycle(CocyclePtr inner, FiberFunction h) : inner_(std::move(inner)), h_(std::move(h)) {
  if (h_.fiber_dim != inner_->fiber_dim()) throw DimensionError("twist function and cocycle have different fiber dimension");
}

Point TwistedCocycle::eval(const Word& g, const Point& x) const {
  Point r = inner_->eval(g, x);
  torus::add_in_place(r, torus::sub(h_(inner_->base()->act(g, x)), h_(x)));
  return r;
}

nlohmann::json TwistedCocycle::describe() const {
  return {{"cocycle", "twisted"}, {"inner", inner_->describe()}, {"twist", h_.spec}};
}

CocyclePtr coboundary_twist(CocyclePtr beta, FiberFunction h) {
  return std::make_shared<TwistedCocycle>(std::move(beta), std::move(h));
}

CocycleCheck cocycle_check(const Cocycle& beta, std::size_t n_samples, Rng& rng, std::int64_t word_range) {
  const auto& X = *beta.base();
  CocycleCheck out;
  out.samples = n_samples;
  for (std::size_t s = 0; s < n_samples; ++s) {
    Word t(X.rank()), t2(X.rank());
    for (auto& w : t) w = uniform_int(rng, -word_range, word_range);
    for (auto& w : t2) w = uniform_int(rng, -word_range, word_range);
    const Point y = X.sample(rng);
    const Point lhs = beta.eval(word_add(t, t2), y);
    const Point rhs = torus::add(beta.eval(t, X.act(t2, y)), beta.eval(t2, y));
    out.max_deviation = std::max(out.max_deviation, torus::dist(lhs, rhs));
  }
  return out;
}

// ---------------------------------------------------------------------------

SkewExtension::SkewExtension(CocyclePtr beta)
    : beta_(std::move(beta)), base_dim_(beta_->base()->point_dim()), fiber_dim_(beta_->fiber_dim()) {
  Rng rng = make_rng(0x5eed, 17);
  const auto check = cocycle_check(*beta_, 256, rng);
  if (check.max_deviation > kCocycleTolerance)
    throw PreconditionError("cocycle '" + beta_->kind() + "' fails the cocycle identity (deviation " +
                            std::to_string(check.max_deviation) + ")");
}

Point SkewExtension::base_part(const Point& y) const {
  check_point(y);
  return Point(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(base_dim_));
}

Point SkewExtension::fiber_part(const Point& y) const {
  check_point(y);
  return Point(y.begin() + static_cast<std::ptrdiff_t>(base_dim_), y.end());
}

Point SkewExtension::join(const Point& x, const Point& u) const {
  Point y = x;
  y.insert(y.end(), u.begin(), u.end());
  check_point(y);
  return y;
}

Point SkewExtension::translate(const Point& y, const Point& a) const {
  return join(base_part(y), torus::add(fiber_part(y), a));
}

Point SkewExtension::act(const Word& g, const Point& y) const {
  const Point x = base_part(y);
  return join(base().act(g, x), torus::add(fiber_part(y), beta_->eval(g, x)));
}

Point SkewExtension::sample(Rng& rng) const {
  Point x = base().sample(rng);
  Point u(fiber_dim_);
  for (auto& v : u) v = uniform01(rng);
  return join(x, u);
}

double SkewExtension::distance(const Point& a, const Point& b) const {
  return std::max(base().distance(base_part(a), base_part(b)), torus::dist(fiber_part(a), fiber_part(b)));
}

nlohmann::json SkewExtension::describe() const {
  return {{"system", "skew"}, {"base", base().describe()}, {"cocycle", beta_->describe()}};
}

std::shared_ptr<const SkewExtension> skew_extension(CocyclePtr beta) { return std::make_shared<SkewExtension>(std::move(beta)); }

std::shared_ptr<const CyclicRotation> cyclic_rotation(std::int64_t n, std::int64_t a) {
  return std::make_shared<CyclicRotation>(n, a);
}

std::shared_ptr<const TorusRotation> torus_rotation(Point alpha) { return std::make_shared<TorusRotation>(std::move(alpha)); }

std::shared_ptr<const WeylTower> weyl_tower(int d, double alpha) { return std::make_shared<WeylTower>(d, alpha); }

std::shared_ptr<const SkewExtension> skew_torus(double alpha) {
  return skew_extension(std::make_shared<CoordinateCocycle>(torus_rotation({alpha}), 0));
}

// ---------------------------------------------------------------------------

namespace {

double number_field(const nlohmann::json& spec, const std::string& key, const std::string& field, double fallback,
                    bool required = false) {
  if (!spec.contains(key)) {
    if (required) throw ConfigError(field + "." + key, "missing");
    return fallback;
  }
  if (!spec[key].is_number()) throw ConfigError(field + "." + key, "expected a number");
  return spec[key].get<double>();
}

std::int64_t int_field(const nlohmann::json& spec, const std::string& key, const std::string& field,
                       std::int64_t fallback, bool required = false) {
  if (!spec.contains(key)) {
    if (required) throw ConfigError(field + "." + key, "missing");
    return fallback;
  }
  if (!spec[key].is_number_integer()) throw ConfigError(field + "." + key, "expected an integer");
  return spec[key].get<std::int64_t>();
}

Point alpha_field(const nlohmann::json& spec, const std::string& field) {
  if (!spec.contains("alpha")) return {kGoldenAlpha};
  const auto& a = spec["alpha"];
  if (a.is_number()) return {a.get<double>()};
  if (a.is_array() && !a.empty()) {
    Point p;
    for (const auto& v : a) {
      if (!v.is_number()) throw ConfigError(field + ".alpha", "expected numbers");
      p.push_back(v.get<double>());
    }
    return p;
  }
  throw ConfigError(field + ".alpha", "expected a number or a non-empty array");
}

std::string tag_field(const nlohmann::json& spec, const std::string& key, const std::string& field) {
  if (!spec.is_object()) throw ConfigError(field, "expected an object");
  if (!spec.contains(key) || !spec[key].is_string()) throw ConfigError(field + "." + key, "missing or not a string");
  return spec[key].get<std::string>();
}

}  // namespace

FiberFunction fiber_function_from_json(const nlohmann::json& spec, const std::string& field) {
  const std::string h = tag_field(spec, "h", field);
  if (h == "zero") return zero_function(1);
  if (h == "constant") return constant_function({number_field(spec, "value", field, 0.0, true)});
  if (h == "step") {
    const double width = number_field(spec, "width", field, 0.5);
    if (!(width > 0.0 && width <= 1.0)) throw ConfigError(field + ".width", "must lie in (0, 1]");
    return step_function(number_field(spec, "jump", field, 0.5), number_field(spec, "at", field, 0.0), width);
  }
  throw ConfigError(field + ".h", "unknown fiber function '" + h + "'");
}

ExtensionPtr extension_from_json(const nlohmann::json& spec, const std::string& field) {
  const std::string tag = tag_field(spec, "system", field);
  if (tag != "skew_torus" && tag != "product")
    throw ConfigError(field + ".system", "expected an extension (skew_torus or product), got '" + tag + "'");
  const Point alpha = alpha_field(spec, field);
  if (alpha.size() != 1) throw ConfigError(field + ".alpha", "extensions are built over a circle rotation");
  auto base = torus_rotation(alpha);
  std::string cocycle = tag == "product" ? "zero" : "coordinate";
  if (spec.contains("cocycle")) {
    if (!spec["cocycle"].is_string()) throw ConfigError(field + ".cocycle", "expected a string");
    cocycle = spec["cocycle"].get<std::string>();
  }
  CocyclePtr beta;
  if (cocycle == "zero")
    beta = std::make_shared<ZeroCocycle>(base, 1);
  else if (cocycle == "coordinate")
    beta = std::make_shared<CoordinateCocycle>(base, 0);
  else if (cocycle == "broken")
    beta = std::make_shared<BrokenCocycle>(base);
  else
    throw ConfigError(field + ".cocycle", "unknown cocycle '" + cocycle + "'");
  if (spec.contains("twist")) beta = coboundary_twist(beta, fiber_function_from_json(spec["twist"], field + ".twist"));
  try {
    return skew_extension(beta);
  } catch (const PreconditionError& e) {
    throw ConfigError(field + ".cocycle", e.what());
  }
}

SystemPtr system_from_json(const nlohmann::json& spec, const std::string& field) {
  const std::string tag = tag_field(spec, "system", field);
  if (tag == "cyclic") {
    const auto n = int_field(spec, "n", field, 0, true);
    if (n < 1) throw ConfigError(field + ".n", "must be >= 1");
    return cyclic_rotation(n, int_field(spec, "a", field, 1));
  }
  if (tag == "torus") return torus_rotation(alpha_field(spec, field));
  if (tag == "weyl") {
    const auto d = int_field(spec, "d", field, 2);
    if (d < 1 || d > 8) throw ConfigError(field + ".d", "must lie in [1, 8]");
    return weyl_tower(static_cast<int>(d), alpha_field(spec, field).at(0));
  }
  if (tag == "skew_torus" || tag == "product") return extension_from_json(spec, field);
  throw ConfigError(field + ".system", "unknown system '" + tag + "'");
}

}  // namespace cubelab::systems
