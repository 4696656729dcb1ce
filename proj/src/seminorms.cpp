#include "cubelab/seminorms.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "cubelab/error.hpp"
#include "cubelab/parallel.hpp"
#include "cubelab/stats.hpp"

namespace cubelab::seminorms {

using nlohmann::json;

Complex e(double x) { return std::polar(1.0, 2.0 * std::numbers::pi * torus::frac(x)); }

// ---------------------------------------------------------------------------
// TrigPoly

TrigPoly::TrigPoly(std::map<std::int64_t, Complex> coeffs) {
  for (auto& [m, c] : coeffs)
    if (c != Complex(0.0)) coeffs_.emplace(m, c);
}

Complex TrigPoly::operator()(double x) const {
  Complex s = 0.0;
  for (const auto& [m, c] : coeffs_) s += c * e(torus::mul(m, x));
  return s;
}

Complex TrigPoly::coefficient(std::int64_t m) const {
  auto it = coeffs_.find(m);
  return it == coeffs_.end() ? Complex(0.0) : it->second;
}

TrigPoly TrigPoly::operator*(const TrigPoly& other) const {
  std::map<std::int64_t, Complex> r;
  for (const auto& [m, c] : coeffs_)
    for (const auto& [n, d] : other.coeffs_) r[m + n] += c * d;
  return TrigPoly(std::move(r));
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
  auto r = coeffs_;
  for (const auto& [n, d] : other.coeffs_) r[n] += d;
  return TrigPoly(std::move(r));
}

double TrigPoly::sup_bound() const {
  double s = 0.0;
  for (const auto& [m, c] : coeffs_) s += std::abs(c);
  return s;
}

// ---------------------------------------------------------------------------
// Observable

Observable Observable::constant(Complex c) {
  Observable o;
  o.kind = Kind::Constant;
  o.value = c;
  return o;
}

Observable Observable::character(std::int64_t xi) {
  Observable o;
  o.kind = Kind::Character;
  o.xi = xi;
  return o;
}

Observable Observable::quadratic(std::int64_t a) {
  Observable o;
  o.kind = Kind::Quadratic;
  o.a = a;
  return o;
}

Observable Observable::arc(double lo, double hi) {
  Observable o;
  o.kind = Kind::Arc;
  o.lo = lo;
  o.hi = hi;
  return o;
}

Observable Observable::from_table(std::vector<Complex> values) {
  if (values.empty()) throw DimensionError("observable table is empty");
  Observable o;
  o.kind = Kind::Table;
  o.table = std::move(values);
  return o;
}

Observable Observable::from_trig(TrigPoly p) {
  Observable o;
  o.kind = Kind::Trig;
  o.trig = std::move(p);
  return o;
}

namespace {

std::int64_t mod(std::int64_t x, std::int64_t n) {
  const std::int64_t r = x % n;
  return r < 0 ? r + n : r;
}

bool in_arc(double x, double lo, double hi) {
  x = torus::frac(x);
  lo = torus::frac(lo);
  if (hi - lo >= 1.0) return true;
  hi = torus::frac(hi);
  return lo <= hi ? (x >= lo && x < hi) : (x >= lo || x < hi);
}

}  // namespace

Complex Observable::on_cyclic(std::int64_t x, std::int64_t N) const {
  if (N <= 0) throw DimensionError("modulus must be positive");
  x = mod(x, N);
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Character:
      return e(static_cast<double>(mod(static_cast<std::int64_t>((static_cast<__int128>(xi) * x) % N), N)) /
               static_cast<double>(N));
    case Kind::Quadratic: {
      const __int128 q = (static_cast<__int128>(x) * x) % N * (a % N) % N;
      return e(static_cast<double>(mod(static_cast<std::int64_t>(q), N)) / static_cast<double>(N));
    }
    case Kind::Arc:
      return in_arc(static_cast<double>(x) / static_cast<double>(N), lo, hi) ? 1.0 : 0.0;
    case Kind::Table:
      if (static_cast<std::int64_t>(table.size()) != N)
        throw DimensionError("observable table has " + std::to_string(table.size()) + " entries, system has " +
                             std::to_string(N) + " points");
      return table[static_cast<std::size_t>(x)];
    case Kind::Trig:
      return trig(static_cast<double>(x) / static_cast<double>(N));
  }
  return 0.0;
}

Complex Observable::on_torus(double x) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Character:
      return e(torus::mul(xi, x));
    case Kind::Quadratic: {
      const double xf = torus::frac(x);
      return e(torus::frac(static_cast<double>(a) * xf * xf));
    }
    case Kind::Arc:
      return in_arc(x, lo, hi) ? 1.0 : 0.0;
    case Kind::Table:
      throw Unsupported("table observables are defined on Z/N only");
    case Kind::Trig:
      return trig(x);
  }
  return 0.0;
}

Complex Observable::at(const systems::System& X, const Point& p) const {
  if (const auto* c = dynamic_cast<const systems::CyclicRotation*>(&X)) return on_cyclic(c->index(p), c->modulus());
  if (coordinate >= p.size())
    throw DimensionError("observable reads coordinate " + std::to_string(coordinate) + " of a " +
                         std::to_string(p.size()) + "-dimensional point");
  return on_torus(p[coordinate]);
}

std::vector<Complex> Observable::tabulate(std::int64_t N) const {
  std::vector<Complex> r(static_cast<std::size_t>(N));
  for (std::int64_t x = 0; x < N; ++x) r[static_cast<std::size_t>(x)] = on_cyclic(x, N);
  return r;
}

double Observable::sup_bound() const {
  switch (kind) {
    case Kind::Constant:
      return std::abs(value);
    case Kind::Table: {
      double m = 0.0;
      for (const auto& z : table) m = std::max(m, std::abs(z));
      return m;
    }
    case Kind::Trig:
      return trig.sup_bound();
    default:
      return 1.0;
  }
}

TrigPoly Observable::as_trig() const {
  switch (kind) {
    case Kind::Constant:
      return TrigPoly({{0, value}});
    case Kind::Character:
      return TrigPoly({{xi, 1.0}});
    case Kind::Trig:
      return trig;
    default:
      throw Unsupported("observable has no finite Fourier expansion");
  }
}

namespace {

json complex_json(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

Complex complex_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(field, "expected a number or a [re, im] pair");
}

template <class T>
T require(const json& spec, const std::string& key, const std::string& field) {
  if (!spec.contains(key)) throw ConfigError(field + "." + key, "missing");
  try {
    return spec.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field + "." + key, "wrong type");
  }
}

}  // namespace

json Observable::to_json() const {
  json j;
  switch (kind) {
    case Kind::Constant:
      j = {{"f", "const"}, {"value", complex_json(value)}};
      break;
    case Kind::Character:
      j = {{"f", "char"}, {"xi", xi}};
      break;
    case Kind::Quadratic:
      j = {{"f", "quad"}, {"a", a}};
      break;
    case Kind::Arc:
      j = {{"f", "arc"}, {"lo", lo}, {"hi", hi}};
      break;
    case Kind::Table: {
      json v = json::array();
      for (const auto& z : table) v.push_back(complex_json(z));
      j = {{"f", "table"}, {"values", v}};
      break;
    }
    case Kind::Trig: {
      json terms = json::array();
      for (const auto& [m, c] : trig.coeffs()) terms.push_back({m, c.real(), c.imag()});
      j = {{"f", "trig"}, {"terms", terms}};
      break;
    }
  }
  if (coordinate != 0) j["coord"] = coordinate;
  return j;
}

Observable observable_from_json(const json& spec, const std::string& field) {
  if (!spec.is_object()) throw ConfigError(field, "expected an object");
  const auto f = require<std::string>(spec, "f", field);
  Observable o;
  if (f == "const") {
    o = Observable::constant(spec.contains("value") ? complex_from_json(spec["value"], field + ".value") : 1.0);
  } else if (f == "char") {
    o = Observable::character(require<std::int64_t>(spec, "xi", field));
  } else if (f == "quad") {
    o = Observable::quadratic(require<std::int64_t>(spec, "a", field));
  } else if (f == "arc") {
    o = Observable::arc(require<double>(spec, "lo", field), require<double>(spec, "hi", field));
  } else if (f == "table") {
    if (!spec.contains("values") || !spec["values"].is_array() || spec["values"].empty())
      throw ConfigError(field + ".values", "expected a non-empty array");
    std::vector<Complex> v;
    for (std::size_t i = 0; i < spec["values"].size(); ++i)
      v.push_back(complex_from_json(spec["values"][i], field + ".values[" + std::to_string(i) + "]"));
    o = Observable::from_table(std::move(v));
  } else if (f == "trig") {
    if (!spec.contains("terms") || !spec["terms"].is_array())
      throw ConfigError(field + ".terms", "expected an array of [m, re, im]");
    std::map<std::int64_t, Complex> c;
    for (const auto& t : spec["terms"]) {
      if (!t.is_array() || t.size() < 2 || t.size() > 3 || !t[0].is_number_integer())
        throw ConfigError(field + ".terms", "expected [m, re] or [m, re, im]");
      c[t[0].get<std::int64_t>()] += Complex(t[1].get<double>(), t.size() == 3 ? t[2].get<double>() : 0.0);
    }
    o = Observable::from_trig(TrigPoly(std::move(c)));
  } else {
    throw ConfigError(field + ".f", "unknown observable '" + f + "' (const, char, quad, arc, table, trig)");
  }
  if (spec.contains("coord")) o.coordinate = require<std::size_t>(spec, "coord", field);
  return o;
}

// ---------------------------------------------------------------------------
// Reports

void to_json(json& j, const SeminormReport& r) {
  j = {{"k", r.k},         {"N", r.N},       {"value", r.value},       {"power", r.power},
       {"method", r.method}, {"samples", r.samples}, {"stderr", r.stderr_value}, {"imag_residual", r.imag_residual}};
}

void to_json(json& j, const Estimate& e) {
  j = {{"re", e.mean.real()}, {"im", e.mean.imag()}, {"stderr", e.stderr_value}, {"samples", e.samples}};
}

std::string csv_header() { return "method,k,N,value,power,stderr,samples,seed"; }

std::string csv_row(const SeminormReport& r, std::uint64_t seed) {
  std::ostringstream os;
  os << std::setprecision(17) << r.method << ',' << r.k << ',' << r.N << ',' << r.value << ',' << r.power << ','
     << r.stderr_value << ',' << r.samples << ',' << seed;
  return os.str();
}

// ---------------------------------------------------------------------------
// Exact seminorms on Z/N

namespace {

void check_gowers_args(const std::vector<Complex>& f, int k) {
  if (f.empty()) throw DimensionError("function table is empty");
  if (k < 1 || k > cube::kMaxDim) throw DimensionError("seminorm order must be in [1, 16]");
}

double root_of_power(double power, int k) {
  if (power < -kImagTolerance) throw Error("negative cube average " + std::to_string(power));
  return std::pow(std::max(power, 0.0), 1.0 / std::ldexp(1.0, k));
}

bool is_sign_table(const std::vector<Complex>& f) {
  for (const auto& z : f)
    if (z.imag() != 0.0 || (z.real() != 1.0 && z.real() != -1.0)) return false;
  return true;
}

// Bit-packed +-1 functions on Z/N, N <= 64: bit x set iff f(x) = -1.
struct SignWord {
  std::uint64_t mask;
  int n;

  // (g shifted by h)(x) = g(x + h)
  std::uint64_t shift(std::uint64_t g, int h) const {
    if (h == 0) return g;
    return ((g >> h) | (g << (n - h))) & mask;
  }
};

// Sum over (h_level..h_k, x) of the iterated derivative of g, with the
// derivatives in directions h_1..h_{level-1} already applied.
std::int64_t sign_sum(const SignWord& w, std::uint64_t g, int level, int k) {
  if (level > k) return w.n - 2 * std::popcount(g);
  std::int64_t s = 0;
  for (int h = 0; h < w.n; ++h) s += sign_sum(w, g ^ w.shift(g, h), level + 1, k);
  return s;
}

std::complex<long double> complex_sum(const std::vector<Complex>& g, std::vector<std::vector<Complex>>& scratch,
                                      int level, int k) {
  const std::size_t n = g.size();
  if (level > k) {
    std::complex<long double> s = 0.0L;
    for (const auto& z : g) s += std::complex<long double>(z);
    return s;
  }
  auto& d = scratch[static_cast<std::size_t>(level)];
  std::complex<long double> s = 0.0L;
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t x = 0, y = h; x < n; ++x, y = (y + 1 == n ? 0 : y + 1)) d[x] = g[x] * std::conj(g[y]);
    s += complex_sum(d, scratch, level + 1, k);
  }
  return s;
}

double recursive_power(const std::vector<Complex>& g, std::vector<std::vector<Complex>>& scratch, int k) {
  const std::size_t n = g.size();
  if (k == 1) {
    std::complex<long double> s = 0.0L;
    for (const auto& z : g) s += std::complex<long double>(z);
    return static_cast<double>(std::norm(s / static_cast<long double>(n)));
  }
  auto& d = scratch[static_cast<std::size_t>(k)];
  long double s = 0.0L;
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t x = 0, y = h; x < n; ++x, y = (y + 1 == n ? 0 : y + 1)) d[x] = g[x] * std::conj(g[y]);
    s += recursive_power(d, scratch, k - 1);
  }
  return static_cast<double>(s / static_cast<long double>(n));
}

}  // namespace

SeminormReport gowers_naive(const std::vector<Complex>& f, int k) {
  check_gowers_args(f, k);
  const std::size_t n = f.size();
  const double cost = std::pow(static_cast<double>(n), k + 1);
  const bool sign = n <= 64 && is_sign_table(f);
  const double cap = sign ? kNaiveSignCap : kNaiveCap;
  if (cost > cap) {
    std::ostringstream os;
    os << "naive Gowers loop needs N^(k+1) = " << cost << " > cap " << cap;
    throw CapExceeded(os.str());
  }

  SeminormReport r;
  r.k = k;
  r.N = static_cast<std::int64_t>(n);
  r.samples = static_cast<std::size_t>(cost);
  if (sign) {
    r.method = "naive_sign";
    SignWord w{n == 64 ? ~0ULL : (1ULL << n) - 1, static_cast<int>(n)};
    std::uint64_t g = 0;
    for (std::size_t x = 0; x < n; ++x)
      if (f[x].real() < 0) g |= 1ULL << x;
    std::vector<std::int64_t> partial(n);
    parallel_for(n, [&](std::size_t h) { partial[h] = sign_sum(w, g ^ w.shift(g, static_cast<int>(h)), 2, k); });
    std::int64_t total = 0;
    for (auto p : partial) total += p;
    r.power = static_cast<double>(total) / cost;
  } else {
    r.method = "naive";
    std::vector<std::complex<long double>> partial(n);
    parallel_for(n, [&](std::size_t h) {
      std::vector<std::vector<Complex>> scratch(static_cast<std::size_t>(k) + 2, std::vector<Complex>(n));
      auto& d = scratch[1];
      for (std::size_t x = 0, y = h; x < n; ++x, y = (y + 1 == n ? 0 : y + 1)) d[x] = f[x] * std::conj(f[y]);
      partial[h] = complex_sum(d, scratch, 2, k);
    });
    std::complex<long double> total = 0.0L;
    for (const auto& p : partial) total += p;
    const auto mean = total / static_cast<long double>(cost);
    r.power = static_cast<double>(mean.real());
    r.imag_residual = std::abs(static_cast<double>(mean.imag()));
    if (r.imag_residual > kImagTolerance)
      throw Error("cube average has imaginary part " + std::to_string(r.imag_residual));
  }
  r.value = root_of_power(r.power, k);
  return r;
}

SeminormReport gowers_recursive(const std::vector<Complex>& f, int k) {
  check_gowers_args(f, k);
  const std::size_t n = f.size();
  const double cost = std::pow(static_cast<double>(n), k);
  if (cost > kRecursiveCap) {
    std::ostringstream os;
    os << "recursive Gowers evaluation needs N^k = " << cost << " > cap " << kRecursiveCap;
    throw CapExceeded(os.str());
  }
  SeminormReport r;
  r.k = k;
  r.N = static_cast<std::int64_t>(n);
  r.method = "recursive";
  r.samples = static_cast<std::size_t>(cost);
  if (k == 1) {
    std::vector<std::vector<Complex>> scratch(2, std::vector<Complex>(n));
    r.power = recursive_power(f, scratch, 1);
  } else {
    std::vector<double> partial(n);
    parallel_for(n, [&](std::size_t h) {
      std::vector<std::vector<Complex>> scratch(static_cast<std::size_t>(k) + 1, std::vector<Complex>(n));
      auto& d = scratch[static_cast<std::size_t>(k)];
      for (std::size_t x = 0, y = h; x < n; ++x, y = (y + 1 == n ? 0 : y + 1)) d[x] = f[x] * std::conj(f[y]);
      partial[h] = recursive_power(d, scratch, k - 1);
    });
    r.power = stats::compensated_sum(partial) / static_cast<double>(n);
  }
  r.value = root_of_power(r.power, k);
  return r;
}

// ---------------------------------------------------------------------------
// Monte-Carlo cube integrals

Estimate hk_integral_empirical(const systems::SystemPtr& X, int k, const std::vector<Observable>& fs,
                               std::size_t n_samples, Rng& rng, cubespace::CubeLaw law, bool conjugate_odd) {
  if (!X) throw PreconditionError("system is null");
  if (k < 0 || k > cubespace::kMaxCubeDim) throw DimensionError("cube dimension must be in [0, 8]");
  const std::size_t nv = cube::vertex_count(k);
  if (fs.size() != 1 && fs.size() != nv)
    throw DimensionError("need 1 or " + std::to_string(nv) + " observables, got " + std::to_string(fs.size()));
  if (n_samples == 0) throw PreconditionError("sample count must be positive");
  stats::ComplexMeanAccumulator acc;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto c = cubespace::sample_cube(X, k, rng, law);
    Complex p = 1.0;
    for (std::size_t v = 0; v < nv; ++v) {
      Complex z = fs[fs.size() == 1 ? 0 : v].at(*X, c[static_cast<cube::Bits>(v)]);
      if (conjugate_odd && (cube::weight(static_cast<cube::Bits>(v)) & 1)) z = std::conj(z);
      p *= z;
    }
    acc.add(p);
  }
  return {acc.mean(), acc.stderr_of_mean(), acc.count()};
}

SeminormReport gowers_empirical(const systems::SystemPtr& X, const Observable& f, int k, std::size_t n_samples,
                                Rng& rng, cubespace::CubeLaw law) {
  if (k < 1) throw DimensionError("seminorm order must be at least 1");
  const auto est = hk_integral_empirical(X, k, {f}, n_samples, rng, law, true);
  SeminormReport r;
  r.k = k;
  if (const auto* c = dynamic_cast<const systems::CyclicRotation*>(X.get())) r.N = c->modulus();
  r.method = "empirical_" + cubespace::to_string(law);
  r.samples = est.samples;
  r.power = est.mean.real();
  r.imag_residual = std::abs(est.mean.imag());
  r.stderr_value = est.stderr_value;
  // Sampling noise can push the estimate slightly below zero.
  r.value = std::pow(std::max(r.power, 0.0), 1.0 / std::ldexp(1.0, k));
  return r;
}

// ---------------------------------------------------------------------------
// Nonconventional averages

std::vector<AveragePoint> nonconventional_average(const systems::System& X, const Point& x,
                                                  const std::vector<Observable>& fs, std::int64_t N,
                                                  const std::vector<std::int64_t>& checkpoints) {
  if (fs.empty()) throw DimensionError("need at least one observable");
  if (N < 1) throw PreconditionError("average length must be positive");
  if (X.rank() != 1) throw Unsupported("nonconventional averages need a Z action");
  X.check_point(x);
  std::vector<std::int64_t> marks = checkpoints;
  if (marks.empty()) marks.push_back(N);
  for (auto m : marks)
    if (m < 1 || m > N) throw PreconditionError("checkpoint " + std::to_string(m) + " outside [1, N]");
  std::sort(marks.begin(), marks.end());

  std::vector<AveragePoint> out;
  std::complex<long double> sum = 0.0L;
  std::size_t next = 0;
  for (std::int64_t n = 0; n < N && next < marks.size(); ++n) {
    Complex p = 1.0;
    for (std::size_t i = 0; i < fs.size(); ++i) p *= fs[i].at(X, X.act(static_cast<std::int64_t>(i + 1) * n, x));
    sum += std::complex<long double>(p);
    while (next < marks.size() && marks[next] == n + 1) {
      const auto avg = sum / static_cast<long double>(n + 1);
      out.push_back({n + 1, Complex(static_cast<double>(avg.real()), static_cast<double>(avg.imag()))});
      ++next;
    }
  }
  return out;
}

TrigPoly kronecker_limit_rotation(const std::vector<Observable>& fs) {
  if (fs.empty()) throw DimensionError("need at least one observable");
  std::vector<std::vector<std::pair<std::int64_t, Complex>>> terms;
  double count = 1.0;
  for (const auto& f : fs) {
    const auto p = f.as_trig();
    terms.emplace_back(p.coeffs().begin(), p.coeffs().end());
    count *= static_cast<double>(terms.back().size());
  }
  if (count > 1e7) throw CapExceeded("too many frequency tuples");
  std::map<std::int64_t, Complex> out;
  if (count == 0.0) return TrigPoly{};
  // Odometer over frequency tuples (xi_1, ..., xi_k).
  std::vector<std::size_t> idx(fs.size(), 0);
  while (true) {
    std::int64_t weighted = 0, total = 0;
    Complex c = 1.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto& [m, a] = terms[i][idx[i]];
      weighted += static_cast<std::int64_t>(i + 1) * m;
      total += m;
      c *= a;
    }
    if (weighted == 0) out[total] += c;
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == terms[i].size()) idx[i++] = 0;
    if (i == idx.size()) break;
  }
  return TrigPoly(std::move(out));
}

}  // namespace cubelab::seminorms
