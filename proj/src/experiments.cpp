#include "cubelab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <toml.hpp>

#include "cubelab/cubespace.hpp"
#include "cubelab/error.hpp"
#include "cubelab/model.hpp"
#include "cubelab/nilcycle.hpp"
#include "cubelab/seminorms.hpp"

namespace cubelab::experiments {

using nlohmann::json;
using nilcycle::Nilcycle;
using seminorms::Complex;

bool RunReport::pass() const {
  if (!error.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

json to_json(const RunReport& r, bool timing) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(
        {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"relation", c.relation}, {"pass", c.pass}});
  json j = {{"experiment", r.experiment}, {"version", kVersion}, {"config", r.config},
            {"checks", checks},           {"result", r.result},   {"pass", r.pass()}};
  if (!r.error.empty()) j["error"] = r.error;
  if (timing) j["timing"] = {{"wall_seconds", r.wall_seconds}};
  return j;
}

int exit_code(const RunReport& r) { return r.pass() ? kExitPass : kExitCheckFailed; }

// ---------------------------------------------------------------------------
// Config access

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  if (std::filesystem::path(path).extension() == ".toml") {
    try {
      const auto tbl = toml::parse_file(path);
      std::ostringstream os;
      os << toml::json_formatter{tbl};
      return json::parse(os.str());
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << e.description() << " at line " << e.source().begin.line;
      throw ConfigError("config", os.str());
    }
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
}

json apply_overrides(json config, const Overrides& o) {
  if (!config.is_object()) throw ConfigError("config", "expected an object");
  if (o.seed) config["seed"] = *o.seed;
  if (o.samples) config["samples"] = *o.samples;
  if (o.tol) config["tol"] = *o.tol;
  return config;
}

namespace {

template <class T>
T get(const json& c, const std::string& key, T fallback) {
  if (!c.contains(key)) return fallback;
  try {
    return c.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "wrong type");
  }
}

template <class T>
T need(const json& c, const std::string& key) {
  if (!c.contains(key)) throw ConfigError(key, "missing");
  return get<T>(c, key, T{});
}

const json& need_object(const json& c, const std::string& key) {
  if (!c.contains(key) || !c.at(key).is_object()) throw ConfigError(key, "expected an object");
  return c.at(key);
}

std::size_t positive(const json& c, const std::string& key, std::size_t fallback) {
  if (c.contains(key) && !(c.at(key).is_number_integer() && c.at(key).get<std::int64_t>() > 0))
    throw ConfigError(key, "expected a positive integer");
  return get<std::size_t>(c, key, fallback);
}

int int_in(const json& c, const std::string& key, int fallback, int lo, int hi) {
  const int v = get<int>(c, key, fallback);
  if (v < lo || v > hi)
    throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

Check make_check(std::string name, double value, double tol, std::string rel = "<=") {
  bool pass = false;
  if (rel == "<=") pass = value <= tol;
  if (rel == ">=") pass = value >= tol;
  if (rel == "<") pass = value < tol;
  if (rel == ">") pass = value > tol;
  if (std::isnan(value)) pass = false;
  return {std::move(name), value, tol, std::move(rel), pass};
}

Check flag_check(std::string name, bool ok) { return make_check(std::move(name), ok ? 1.0 : 0.0, 1.0, ">="); }

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Nilcycle nilcycle_from_json(const json& spec, const systems::ExtensionPtr& E, int k, const std::string& field) {
  if (!spec.is_object()) throw ConfigError(field, "expected an object");
  const std::string kind = spec.contains("nilcycle") && spec["nilcycle"].is_string() ? spec["nilcycle"].get<std::string>() : "";
  if (kind == "zero") return Nilcycle::zero(E->base_ptr(), k, E->fiber_dim());
  if (kind == "extracted") return Nilcycle::extracted(E, k);
  if (kind == "coboundary") {
    if (spec.contains("h")) return Nilcycle::coboundary(E->base_ptr(), k, systems::fiber_function_from_json(spec["h"], field + ".h"));
    const auto* tw = dynamic_cast<const systems::TwistedCocycle*>(&E->cocycle());
    if (!tw) throw ConfigError(field + ".h", "missing, and the extension carries no twist to take it from");
    return Nilcycle::coboundary(E->base_ptr(), k, tw->h());
  }
  if (kind == "perturbed") {
    if (!spec.contains("inner")) throw ConfigError(field + ".inner", "missing");
    const double eps = spec.contains("eps") && spec["eps"].is_number() ? spec["eps"].get<double>() : 0.25;
    return Nilcycle::perturbed(nilcycle_from_json(spec["inner"], E, k, field + ".inner"), eps);
  }
  throw ConfigError(field + ".nilcycle", "expected zero, coboundary, extracted or perturbed");
}

std::vector<Complex> random_table(const std::string& kind, std::size_t n, Rng& rng) {
  std::vector<Complex> f(n);
  for (auto& z : f) {
    if (kind == "random_sign")
      z = coin(rng) ? 1.0 : -1.0;
    else
      z = std::polar(uniform01(rng), 2.0 * 3.141592653589793 * uniform01(rng));
  }
  return f;
}

std::vector<double> number_list(const json& c, const std::string& key, std::vector<double> fallback) {
  if (!c.contains(key)) return fallback;
  if (!c[key].is_array() || c[key].empty()) throw ConfigError(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : c[key]) {
    if (!v.is_number()) throw ConfigError(key, "expected a non-empty array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

void run_gowers(const json& c, std::uint64_t seed, RunReport& r) {
  const auto X = systems::system_from_json(need_object(c, "system"), "system");
  const int k = int_in(c, "k", 2, 1, 16);
  const double tol = get<double>(c, "tol", 1e-9);
  const auto& fspec = need_object(c, "f");
  const std::string fkind = fspec.contains("f") && fspec["f"].is_string() ? fspec["f"].get<std::string>() : "";
  const auto* C = dynamic_cast<const systems::CyclicRotation*>(X.get());
  std::string method = get<std::string>(c, "method", C ? "both" : "empirical");
  if (method != "both" && method != "naive" && method != "recursive" && method != "empirical")
    throw ConfigError("method", "expected both, naive, recursive or empirical");
  if (method != "empirical" && !C) throw ConfigError("method", "exact seminorms need a cyclic system");

  if (method == "empirical") {
    const auto f = seminorms::observable_from_json(fspec, "f");
    Rng rng = make_rng(seed);
    const auto law = cubespace::cube_law_from_string(get<std::string>(c, "law", "closure"));
    const auto rep = seminorms::gowers_empirical(X, f, k, positive(c, "samples", 20000), rng, law);
    r.result["reports"] = json::array({rep});
    r.checks.push_back(make_check("imag_residual", rep.imag_residual, 5.0 * rep.stderr_value + tol));
    if (c.contains("expect"))
      r.checks.push_back(make_check("expected_power", std::abs(rep.power - get<double>(c, "expect", 0.0)),
                                    5.0 * rep.stderr_value + tol));
    r.csv = seminorms::csv_header() + "\n" + seminorms::csv_row(rep, seed) + "\n";
    return;
  }

  const std::int64_t N = C->modulus();
  std::vector<std::vector<Complex>> tables;
  if (fkind == "random_sign" || fkind == "random_complex") {
    Rng rng = make_rng(seed);
    const std::size_t count = positive(fspec, "count", 1);
    for (std::size_t i = 0; i < count; ++i) tables.push_back(random_table(fkind, static_cast<std::size_t>(N), rng));
  } else {
    tables.push_back(seminorms::observable_from_json(fspec, "f").tabulate(N));
  }

  const bool monotone = get<bool>(c, "monotone", false);
  double max_gap = 0.0, min_step = INFINITY;
  json reports = json::array();
  std::ostringstream csv;
  csv << seminorms::csv_header() << "\n";
  for (const auto& f : tables) {
    std::vector<seminorms::SeminormReport> reps;
    if (method == "both" || method == "naive") reps.push_back(seminorms::gowers_naive(f, k));
    if (method == "both" || method == "recursive") reps.push_back(seminorms::gowers_recursive(f, k));
    if (reps.size() == 2) max_gap = std::max(max_gap, std::abs(reps[0].value - reps[1].value));
    if (monotone) {
      double prev = 0.0;
      for (int j = 1; j <= k; ++j) {
        const double v = seminorms::gowers_recursive(f, j).value;
        if (j > 1) min_step = std::min(min_step, v - prev);
        prev = v;
      }
    }
    for (const auto& rep : reps) {
      reports.push_back(rep);
      csv << seminorms::csv_row(rep, seed) << "\n";
    }
  }
  r.result["reports"] = std::move(reports);
  r.result["functions"] = tables.size();
  r.result["value"] = r.result["reports"].back()["value"];
  r.csv = csv.str();
  if (method == "both") r.checks.push_back(make_check("naive_vs_recursive", max_gap, tol));
  if (monotone) r.checks.push_back(make_check("monotone_in_k", k > 1 ? min_step : 0.0, -1e-10, ">="));
  if (c.contains("expect")) {
    double worst = 0.0;
    for (const auto& rep : r.result["reports"])
      worst = std::max(worst, std::abs(rep["value"].get<double>() - get<double>(c, "expect", 0.0)));
    r.checks.push_back(make_check("expected_value", worst, tol));
  }
}

void run_avg(const json& c, std::uint64_t seed, RunReport& r) {
  const auto X = systems::system_from_json(need_object(c, "system"), "system");
  if (!c.contains("observables") || !c["observables"].is_array() || c["observables"].empty())
    throw ConfigError("observables", "expected a non-empty array");
  std::vector<seminorms::Observable> fs;
  for (std::size_t i = 0; i < c["observables"].size(); ++i)
    fs.push_back(seminorms::observable_from_json(c["observables"][i], "observables[" + std::to_string(i) + "]"));
  const auto N = static_cast<std::int64_t>(positive(c, "N", 100000));
  const double tol = get<double>(c, "tol", 0.02);
  Point x;
  if (c.contains("x")) {
    x = get<Point>(c, "x", {});
    try {
      X->check_point(x);
    } catch (const Error& e) {
      throw ConfigError("x", e.what());
    }
  } else {
    Rng rng = make_rng(seed);
    x = X->sample(rng);
  }
  std::vector<std::int64_t> marks = get<std::vector<std::int64_t>>(c, "checkpoints", {});
  for (auto m : marks)
    if (m < 1 || m > N) throw ConfigError("checkpoints", "entries must lie in [1, N]");
  marks.push_back(N);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  const auto pts = seminorms::nonconventional_average(*X, x, fs, N, marks);
  json series = json::array();
  std::ostringstream csv;
  csv << std::setprecision(17) << "n,re,im\n";
  for (const auto& p : pts) {
    series.push_back({{"n", p.n}, {"value", complex_json(p.value)}});
    csv << p.n << ',' << p.value.real() << ',' << p.value.imag() << "\n";
  }
  r.result["x"] = x;
  r.result["series"] = series;
  r.csv = csv.str();
  const auto* R = dynamic_cast<const systems::TorusRotation*>(X.get());
  if (R && R->point_dim() == 1) {
    try {
      const auto limit = seminorms::kronecker_limit_rotation(fs);
      const Complex predicted = limit(x[0]);
      r.result["predicted"] = complex_json(predicted);
      r.checks.push_back(make_check("kronecker_limit", std::abs(pts.back().value - predicted), tol));
    } catch (const Unsupported&) {
      r.result["predicted"] = nullptr;
    }
  }
}

void run_cubes(const json& c, std::uint64_t seed, RunReport& r) {
  const auto X = systems::system_from_json(need_object(c, "system"), "system");
  const int k = int_in(c, "k", 2, 0, cubespace::kMaxCubeDim);
  const std::size_t n = positive(c, "samples", 2000);
  const double tol = get<double>(c, "tol", cubespace::kCubeTolerance);
  std::vector<std::string> laws;
  if (c.contains("law")) {
    laws.push_back(get<std::string>(c, "law", ""));
  } else {
    laws.push_back("orbit");
    if (cubespace::supports_closure(*X)) laws.push_back("closure");
  }
  std::ostringstream csv;
  csv << std::setprecision(17) << "law,sample,vertex,coordinate,value\n";
  std::unique_ptr<cubespace::FiniteCubeSet> finite;
  if (X->is_finite()) finite = std::make_unique<cubespace::FiniteCubeSet>(X, k);
  for (std::size_t li = 0; li < laws.size(); ++li) {
    cubespace::CubeLaw law;
    try {
      law = cubespace::cube_law_from_string(laws[li]);
    } catch (const Error& e) {
      throw ConfigError("law", e.what());
    }
    if (law == cubespace::CubeLaw::Closure && !cubespace::supports_closure(*X))
      throw ConfigError("law", "no closed-form cube law for this system");
    Rng rng = make_rng(seed, li);
    double worst = 0.0;
    bool checkable = true;
    std::size_t outside = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const auto cube = cubespace::sample_cube(X, k, rng, law);
      if (checkable) {
        try {
          worst = std::max(worst, cubespace::cube_defect(*X, cube));
        } catch (const Unsupported&) {
          checkable = false;
        }
      }
      if (finite && !finite->contains(cube)) ++outside;
      if (s < 100)
        for (cube::Bits v = 0; v < cube.size(); ++v)
          for (std::size_t i = 0; i < cube[v].size(); ++i)
            csv << laws[li] << ',' << s << ',' << v << ',' << i << ',' << cube[v][i] << "\n";
    }
    r.result[laws[li]] = {{"samples", n}, {"max_defect", checkable ? json(worst) : json(nullptr)}};
    if (checkable) r.checks.push_back(make_check("cube_defect_" + laws[li], worst, tol));
    if (finite) r.checks.push_back(make_check("outside_bfs_" + laws[li], static_cast<double>(outside), 0.0));
  }
  if (finite) r.result["cube_set_size"] = finite->size();
  r.csv = csv.str();
}

void run_nrp(const json& c, std::uint64_t, RunReport& r) {
  const auto X = systems::system_from_json(need_object(c, "system"), "system");
  if (!X->is_finite()) throw ConfigError("system", "NRP classes are computed for finite systems");
  const int k = int_in(c, "k", 1, 0, cubespace::kMaxCubeDim - 1);
  const auto rep = cubespace::nrp_classes(X, k);
  r.result = rep;
  r.checks.push_back(flag_check("relation_is_equivalence", rep.relation_is_equivalence));
  r.checks.push_back(flag_check("action_invariant", rep.action_invariant));
  if (c.contains("expect_classes"))
    r.checks.push_back(make_check(
        "class_count",
        std::abs(static_cast<double>(rep.classes.size()) - static_cast<double>(get<std::size_t>(c, "expect_classes", 0))),
        0.0));
}

void run_extract(const json& c, std::uint64_t seed, RunReport& r) {
  const auto E = systems::extension_from_json(need_object(c, "system"), "system");
  const int k = int_in(c, "k", 2, 0, nilcycle::kMaxDegree);
  const double tol = get<double>(c, "tol", 1e-9);
  nilcycle::ExtractionOptions opt;
  opt.n_cubes = positive(c, "samples", opt.n_cubes);
  opt.n_fiber = positive(c, "n_fiber", opt.n_fiber);
  opt.max_flagged_fraction = get<double>(c, "max_flagged", opt.max_flagged_fraction);
  Rng rng = make_rng(seed);
  try {
    const auto [rho, rep] = nilcycle::extract_nilcycle(E, k, opt, rng);
    r.result = rep;
    r.result.erase("table");
    r.csv = nilcycle::extraction_csv(rep);
    r.checks.push_back(make_check("flagged_fraction", rep.flagged_fraction, opt.max_flagged_fraction));
    r.checks.push_back(make_check("fiber_constancy", rep.max_spread, tol));
    r.checks.push_back(make_check("evaluator_gap", rep.max_evaluator_gap, tol));
    if (const auto* tw = dynamic_cast<const systems::TwistedCocycle*>(&E->cocycle())) {
      double worst = 0.0;
      for (const auto& b : rep.bins)
        if (!b.flagged)
          for (const auto& s : b.samples)
            worst = std::max(worst, torus::dist(s.theta, nilcycle::alternating_sum(tw->h(), s.base_cube)));
      r.checks.push_back(make_check("coboundary_oracle", worst, tol));
    } else {
      r.checks.push_back(make_check("rho_zero", rep.max_abs_rho, tol));
    }
  } catch (const PreconditionError& e) {
    r.error = e.what();
  }
}

void run_verify(const json& c, std::uint64_t seed, RunReport& r) {
  const auto E = systems::extension_from_json(need_object(c, "system"), "system");
  const int k = int_in(c, "k", 2, 0, nilcycle::kMaxDegree);
  const auto rho = nilcycle_from_json(c.contains("nilcycle") ? c["nilcycle"] : json{{"nilcycle", "extracted"}}, E, k,
                                      "nilcycle");
  const double tol = get<double>(c, "tol", nilcycle::kAxiomTolerance);
  const auto rep = nilcycle::verify_nilcycle(rho, E, positive(c, "samples", 10000), seed, tol);
  r.result = rep;
  const json expect = c.contains("expect") ? c["expect"] : json::object();
  if (!expect.is_object()) throw ConfigError("expect", "expected an object of identity -> \"pass\" | \"fail\"");
  for (const auto& [key, val] : expect.items()) {
    if (std::find(nilcycle::kIdentityNames.begin(), nilcycle::kIdentityNames.end(), key) ==
        nilcycle::kIdentityNames.end())
      throw ConfigError("expect." + key, "unknown identity");
    if (val != "pass" && val != "fail") throw ConfigError("expect." + key, "expected \"pass\" or \"fail\"");
  }
  const double fail_gap = get<double>(c, "fail_threshold", 0.1);
  for (const auto& id : rep.identities) {
    if (expect.contains(id.identity) && expect[id.identity] == "fail")
      r.checks.push_back(make_check(id.identity + "_fails", id.max_dev, fail_gap, ">"));
    else
      r.checks.push_back(make_check(id.identity, id.max_dev, tol));
  }
}

model::TestFamily family_from_json(const json& c, std::size_t m, int d) {
  const json f = c.contains("family") ? c["family"] : json::object();
  if (!f.is_object()) throw ConfigError("family", "expected an object");
  const int freq = int_in(f, "max_freq", 3, 1, 16);
  const int degree = int_in(f, "degree", 2, 0, 8);
  return model::TestFamily::standard(m, d, freq, degree);
}

void run_model_probe(const json& c, std::uint64_t seed, RunReport& r) {
  const auto E = systems::extension_from_json(need_object(c, "system"), "system");
  const int k = int_in(c, "k", 2, 0, nilcycle::kMaxDegree);
  const auto rho = nilcycle_from_json(c.contains("nilcycle") ? c["nilcycle"] : json{{"nilcycle", "extracted"}}, E, k,
                                      "nilcycle");
  const std::string probe = get<std::string>(c, "probe", "continuity");
  r.result["probe"] = probe;
  if (probe == "continuity") {
    const auto T = family_from_json(c, E->fiber_dim(), rho.cube_dim());
    const auto deltas = number_list(c, "deltas", {0.1, 0.05, 0.02, 0.01});
    const auto t = model::continuity_probe(E, rho, T, positive(c, "pairs", 100), deltas, positive(c, "samples", 2000),
                                           seed, get<std::size_t>(c, "naive_pairs", 0));
    r.result["table"] = t;
    r.checks.push_back(flag_check("bundle_modulus_decreasing", t.bundle_decreasing()));
    r.checks.push_back(make_check("naive_modulus_floor", t.naive_min(), get<double>(c, "naive_floor", 0.2), ">"));
    std::ostringstream csv;
    csv << std::setprecision(17) << "delta,bundle_modulus,naive_modulus,bundle_pairs,naive_pairs\n";
    for (std::size_t i = 0; i < t.deltas.size(); ++i)
      csv << t.deltas[i] << ',' << t.bundle_modulus[i] << ',' << t.naive_modulus[i] << ',' << t.bundle_pairs[i] << ','
          << t.naive_pairs[i] << "\n";
    r.csv = csv.str();
  } else if (probe == "laws") {
    const std::size_t n = positive(c, "samples", 10000);
    const double tol = get<double>(c, "tol", 1e-12);
    const auto range = static_cast<std::int64_t>(get<std::size_t>(c, "word_range", 500));
    Rng rng = make_rng(seed);
    double action = 0.0, translation = 0.0, base = 0.0;
    auto dist = [&](const model::ModelPoint& p, const model::ModelPoint& q) {
      return std::max(E->base().distance(p.x, q.x), torus::dist(p.a, q.a));
    };
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = model::random_model_point(*E, rng);
      systems::Word g(static_cast<std::size_t>(E->rank())), h(g.size());
      for (auto& v : g) v = uniform_int(rng, -range, range);
      for (auto& v : h) v = uniform_int(rng, -range, range);
      Point b(E->fiber_dim());
      for (auto& v : b) v = uniform01(rng);
      action = std::max(action, dist(model::model_act(*E, systems::word_add(g, h), p),
                                     model::model_act(*E, g, model::model_act(*E, h, p))));
      translation = std::max(translation, dist(model::model_act(*E, g, model::model_translate(p, b)),
                                               model::model_translate(model::model_act(*E, g, p), b)));
      base = std::max(base, E->base().distance(model::model_act(*E, g, p).x, E->base().act(g, p.x)));
    }
    r.checks.push_back(make_check("group_action", action, tol));
    r.checks.push_back(make_check("translation_commutes", translation, tol));
    r.checks.push_back(make_check("base_intertwining", base, tol));
    const auto mp = model::measure_preservation(*E, positive(c, "measure_samples", 100000), seed);
    r.result["measure_preservation"] = {
        {"statistic", mp.statistic}, {"z", mp.z}, {"p_value", mp.p_value}, {"frequencies", mp.frequencies}};
    r.checks.push_back(make_check("measure_preservation_p", mp.p_value, stats::kThreeSigmaTail, ">"));
  } else if (probe == "net") {
    const auto T = family_from_json(c, E->fiber_dim(), rho.cube_dim());
    const model::BundleEmbedding emb(rho, T, positive(c, "samples", 500), seed);
    const auto eps = number_list(c, "eps", {1.0, 0.5, 0.25, 0.125});
    const auto sizes = model::epsilon_net_sizes(emb, *E, positive(c, "points", 200), eps, seed);
    json rows = json::array();
    for (const auto& [e, s] : sizes) rows.push_back({{"eps", e}, {"net_size", s}});
    r.result["nets"] = rows;
    r.csv = model::epsilon_net_csv(sizes);
  } else {
    throw ConfigError("probe", "expected continuity, laws or net");
  }
}

void run_q_check(const json& c, std::uint64_t seed, RunReport& r) {
  const auto E = systems::extension_from_json(need_object(c, "system"), "system");
  const int k = int_in(c, "k", 2, 0, nilcycle::kMaxDegree);
  const auto rho = nilcycle_from_json(c.contains("nilcycle") ? c["nilcycle"] : json{{"nilcycle", "extracted"}}, E, k,
                                      "nilcycle");
  const double tol = get<double>(c, "tol", nilcycle::kAxiomTolerance);
  const auto rep = model::q_uniqueness_check(rho, E, positive(c, "samples", 1000), seed, tol);
  r.result = rep;
  r.checks.push_back(make_check("q_uniqueness", rep.max_dev, tol));
}

}  // namespace

const std::vector<std::string>& experiment_tags() {
  static const std::vector<std::string> tags = {"gowers",         "avg",         "cubes", "nrp", "nilcycle-extract",
                                                "nilcycle-verify", "model-probe", "q-check"};
  return tags;
}

RunReport run(const json& config) {
  if (!config.is_object()) throw ConfigError("config", "expected an object");
  RunReport r;
  r.experiment = need<std::string>(config, "experiment");
  if (std::find(experiment_tags().begin(), experiment_tags().end(), r.experiment) == experiment_tags().end())
    throw ConfigError("experiment", "unknown experiment '" + r.experiment + "'");
  if (!config.contains("seed") || !config["seed"].is_number_integer() ||
      (!config["seed"].is_number_unsigned() && config["seed"].get<std::int64_t>() < 0))
    throw ConfigError("seed", "a non-negative integer seed is required");
  const auto seed = config["seed"].get<std::uint64_t>();
  r.config = config;
  const auto t0 = std::chrono::steady_clock::now();
  const auto& tag = r.experiment;
  if (tag == "gowers") run_gowers(config, seed, r);
  if (tag == "avg") run_avg(config, seed, r);
  if (tag == "cubes") run_cubes(config, seed, r);
  if (tag == "nrp") run_nrp(config, seed, r);
  if (tag == "nilcycle-extract") run_extract(config, seed, r);
  if (tag == "nilcycle-verify") run_verify(config, seed, r);
  if (tag == "model-probe") run_model_probe(config, seed, r);
  if (tag == "q-check") run_q_check(config, seed, r);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

const std::vector<CheckInfo>& list_checks() {
  static const std::vector<CheckInfo> checks = {
      {"gowers.naive_vs_recursive",
       "E_{x,h} prod_v C^{|v|} f(x + h.v) = E_h |||f . conj(f(. + h))|||_{k-1}^{2^{k-1}}"},
      {"gowers.monotone_in_k", "|||f|||_k <= |||f|||_{k+1}"},
      {"gowers.expected_value", "|||f|||_k = (int prod_v C^{|v|} f(x_v) dmu^[k])^{1/2^k}"},
      {"gowers.imag_residual", "the conjugated cube integral is real"},
      {"avg.kronecker_limit",
       "(1/N) sum_n prod_i f_i(T^{in} x) -> sum_{sum_i i xi_i = 0} prod_i fhat_i(xi_i) e((sum_i xi_i) x)"},
      {"cubes.cube_defect", "sampled configurations lie in C^k(X)"},
      {"cubes.outside_bfs", "sampled configurations lie in the BFS closure of HK^k-orbits of diagonals"},
      {"nrp.relation_is_equivalence", "x ~_k y iff (x, ..., x, y) in C^{k+1}(X) is an equivalence relation"},
      {"nrp.action_invariant", "x ~_k y implies gx ~_k gy"},
      {"nilcycle-extract.fiber_constancy", "rho(c) = theta_{k+1}(a_c) is constant on the lifts over c"},
      {"nilcycle-extract.coboundary_oracle", "twist by h: rho(c) = sum_v (-1)^{|v|} h(c_v)"},
      {"nilcycle-extract.rho_zero", "untwisted extension at its degree: rho = 0"},
      {"nilcycle-verify.cube_invariance", "rho(sigma c) = sgn(sigma) rho(c)"},
      {"nilcycle-verify.glueing", "rho(b || c) = rho(b) + rho(c)"},
      {"nilcycle-verify.equivariance", "rho(g c) = rho(c) + sum_v (-1)^{|v|} beta(g_v, c_v)"},
      {"nilcycle-verify.tricube", "sum_v (-1)^{|v|} rho(psi_v(t)) = rho(omega(t))"},
      {"model-probe.group_action", "g(h(x, a)) = (gh)(x, a) for g(x, a) = (gx, a + beta(g, x))"},
      {"model-probe.translation_commutes", "g(x, a + b) = g(x, a) + b"},
      {"model-probe.base_intertwining", "p0(g(x, a)) = g p0(x, a)"},
      {"model-probe.measure_preservation_p", "g_*(mu x m_A) = mu x m_A"},
      {"model-probe.bundle_modulus_decreasing", "the generator is continuous in the function-bundle topology"},
      {"model-probe.naive_modulus_floor", "the twisted cocycle is discontinuous in the product topology"},
      {"q-check.q_uniqueness", "a_0 = rho(c) - sum_{v != 0} (-1)^{|v|} a_v determines the origin value"},
  };
  return checks;
}

// ---------------------------------------------------------------------------
// Suites

bool SuiteReport::pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

bool SuiteReport::config_error() const {
  for (const auto& r : rows)
    if (r.config_error) return true;
  return false;
}

int exit_code(const SuiteReport& s) {
  if (s.config_error()) return kExitConfigError;
  return s.pass() ? kExitPass : kExitCheckFailed;
}

SuiteReport suite(const json& manifest, const std::string& base_dir, const Overrides& o) {
  if (!manifest.is_object()) throw ConfigError("manifest", "expected an object");
  const std::uint64_t master = manifest.contains("seed") ? get<std::uint64_t>(manifest, "seed", 0) : 0;
  const json runs = manifest.contains("runs") ? manifest["runs"] : json::array();
  if (!runs.is_array()) throw ConfigError("runs", "expected an array");
  SuiteReport s;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& entry = runs[i];
    SuiteRow row;
    row.name = entry.is_object() && entry.contains("name") && entry["name"].is_string()
                   ? entry["name"].get<std::string>()
                   : "run" + std::to_string(i);
    RunReport rep;
    try {
      if (!entry.is_object()) throw ConfigError("runs[" + std::to_string(i) + "]", "expected an object");
      json config;
      if (entry.contains("config"))
        config = entry["config"];
      else if (entry.contains("path") && entry["path"].is_string())
        config = load_config((std::filesystem::path(base_dir) / entry["path"].get<std::string>()).string());
      else
        throw ConfigError("runs[" + std::to_string(i) + "]", "needs \"config\" or \"path\"");
      if (config.is_object() && !config.contains("seed")) config["seed"] = derive_seed(master, i);
      rep = run(apply_overrides(config, o));
      row.pass = rep.pass();
      row.error = rep.error;
    } catch (const ConfigError& e) {
      row.config_error = true;
      row.error = e.what();
    } catch (const Error& e) {
      row.error = e.what();
    }
    row.experiment = rep.experiment;
    for (const auto& c : rep.checks) row.failed_checks += c.pass ? 0 : 1;
    row.wall_seconds = rep.wall_seconds;
    s.rows.push_back(row);
    s.runs.push_back(std::move(rep));
  }
  return s;
}

SuiteReport suite_file(const std::string& path, const Overrides& o) {
  const auto manifest = load_config(path);
  return suite(manifest, std::filesystem::path(path).parent_path().string(), o);
}

std::string suite_csv(const SuiteReport& s, bool timing) {
  std::ostringstream os;
  os << "name,experiment,pass,failed_checks,error" << (timing ? ",wall_seconds" : "") << "\n";
  for (const auto& r : s.rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    os << r.name << ',' << r.experiment << ',' << (r.pass ? 1 : 0) << ',' << r.failed_checks << ",\"" << err << '"';
    if (timing) os << ',' << r.wall_seconds;
    os << "\n";
  }
  return os.str();
}

json to_json(const SuiteReport& s, bool timing) {
  json runs = json::array();
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& row = s.rows[i];
    json j = {{"name", row.name}, {"experiment", row.experiment}, {"pass", row.pass}, {"failed_checks", row.failed_checks}};
    if (!row.error.empty()) j["error"] = row.error;
    if (!s.runs[i].experiment.empty()) j["report"] = to_json(s.runs[i], timing);
    runs.push_back(j);
  }
  return {{"version", kVersion}, {"runs", runs}, {"pass", s.pass()}, {"total", s.rows.size()}};
}

}  // namespace cubelab::experiments
