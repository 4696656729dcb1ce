// Acceptance gate: one PASS/FAIL line per criterion, exit code 1 on any FAIL.
#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>

#include "cubelab/experiments.hpp"
#include "cubelab/groups.hpp"
#include "cubelab/model.hpp"
#include "cubelab/nilcycle.hpp"
#include "cubelab/seminorms.hpp"

using namespace cubelab;
using cube::Bits;
using groups::Element;
using groups::Group;
using groups::GroupCube;
using nlohmann::json;
using seminorms::Complex;

namespace {

const std::string kConfigs = CUBELAB_CONFIG_DIR;
constexpr double kAlpha = systems::kGoldenAlpha;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_seconds;
  const bool pass = o.pass && in_time;
  failures += pass ? 0 : 1;
  std::printf("%s %2d %s: %s [%.2f s / %.0f s]\n", pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs,
              budget_seconds);
  std::fflush(stdout);
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Complex> random_signs(std::size_t n, Rng& rng) {
  std::vector<Complex> f(n);
  for (auto& z : f) z = coin(rng) ? 1.0 : -1.0;
  return f;
}

std::vector<Complex> random_complex(std::size_t n, Rng& rng) {
  std::vector<Complex> f(n);
  for (auto& z : f) z = std::polar(uniform01(rng), 2.0 * std::numbers::pi * uniform01(rng));
  return f;
}

// Sum of |fhat|^4 with fhat(xi) = E_x f(x) e(-x xi / N), through FFTW.
double fourier_fourth_moment(const std::vector<Complex>& f) {
  const int n = static_cast<int>(f.size());
  std::vector<Complex> in = f, out(f.size());
  fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  long double s = 0.0L;
  for (const auto& z : out) s += std::pow(std::norm(z / static_cast<double>(n)), 2);
  return static_cast<double>(s);
}

// The affine family {x + sum_j t_j v_j} over Z/n by direct enumeration.
std::set<GroupCube> affine_family(std::int64_t n, int k) {
  std::set<GroupCube> out;
  std::vector<std::int64_t> t(k + 1, 0);
  while (true) {
    out.insert(GroupCube::generate(k, [&](Bits v) {
      std::int64_t x = t[0];
      for (int j = 0; j < k; ++j)
        if ((v >> j) & 1U) x += t[j + 1];
      return Element{x % n};
    }));
    int i = 0;
    while (i <= k && ++t[i] == n) t[i++] = 0;
    if (i > k) break;
  }
  return out;
}

json twisted_spec() {
  return {{"system", "skew_torus"}, {"alpha", kAlpha}, {"twist", {{"h", "step"}, {"jump", 0.5}, {"at", 0.0}}}};
}

double check_value(const experiments::RunReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c.value;
  throw Error("report has no check '" + name + "'");
}

}  // namespace

int main() {
  criterion(1, "Gowers naive = recursive, N=64, 100 random signs, k=2..4", 60, [] {
    Rng rng = make_rng(101);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto f = random_signs(64, rng);
      for (int k = 2; k <= 4; ++k)
        worst = std::max(worst, std::abs(seminorms::gowers_naive(f, k).value - seminorms::gowers_recursive(f, k).value));
    }
    return Outcome{worst <= 1e-10, fmt("max gap %.3g (tol %.0e)", worst, 1e-10)};
  });

  criterion(2, "quadratic phase e(x^2/N), N=101", 30, [] {
    const auto f = seminorms::Observable::quadratic(1).tabulate(101);
    const double u2 = seminorms::gowers_naive(f, 2).value;
    const double u3 = seminorms::gowers_naive(f, 3).value;
    const double oracle = std::pow(fourier_fourth_moment(f), 0.25);
    const double target = std::pow(101.0, -0.25);
    const double gap = std::max({std::abs(u2 - target), std::abs(oracle - target), std::abs(u3 - 1.0)});
    return Outcome{gap <= 1e-9, fmt("U2 %.12f, U3 %.12f", u2, u3) + fmt(", max gap %.3g (tol %.0e)", gap, 1e-9)};
  });

  criterion(3, "U2 power = sum |fhat|^4, 100 random f, N <= 1024", 60, [] {
    Rng rng = make_rng(103);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 1024));
      const auto f = i % 2 ? random_complex(n, rng) : random_signs(n, rng);
      const double oracle = fourier_fourth_moment(f);
      worst = std::max(worst, std::abs(seminorms::gowers_recursive(f, 2).power - oracle));
      if (n <= 256) worst = std::max(worst, std::abs(seminorms::gowers_naive(f, 2).power - oracle));
    }
    return Outcome{worst <= 1e-9, fmt("max gap %.3g (tol %.0e)", worst, 1e-9)};
  });

  criterion(4, "monotone in k, k <= 3, N=64", 60, [] {
    Rng rng = make_rng(104);
    std::vector<std::vector<Complex>> fs;
    for (int i = 0; i < 50; ++i) fs.push_back(random_signs(64, rng));
    for (int i = 0; i < 50; ++i) fs.push_back(random_complex(64, rng));
    for (std::int64_t a : {1, 3, 5}) fs.push_back(seminorms::Observable::quadratic(a).tabulate(64));
    for (std::int64_t xi : {0, 1, 7}) fs.push_back(seminorms::Observable::character(xi).tabulate(64));
    fs.push_back(seminorms::Observable::arc(0.0, 0.5).tabulate(64));
    double margin = INFINITY;
    std::size_t pairs = 0;
    for (const auto& f : fs) {
      double prev = seminorms::gowers_naive(f, 1).value;
      for (int k = 2; k <= 3; ++k) {
        const double v = seminorms::gowers_naive(f, k).value;
        margin = std::min(margin, v - prev);
        prev = v;
        ++pairs;
      }
    }
    return Outcome{margin >= -1e-10, fmt("min step %.3g over %.0f (f, k) pairs (tol -1e-10)", margin,
                                         static_cast<double>(pairs))};
  });

  criterion(5, "BFS cube group of Z/5 equals affine family, k <= 3", 10, [] {
    const auto G = Group::cyclic(5);
    bool equal = true;
    std::size_t size2 = 0;
    for (int k = 0; k <= 3; ++k) {
      const auto bfs = groups::hk_generate_finite(G, k);
      equal = equal && bfs == affine_family(5, k);
      if (k == 2) size2 = bfs.size();
    }
    return Outcome{equal && size2 == 125, fmt("BFS %s affine family, |k=2| = %zu", equal ? "equals" : "differs from", size2)};
  });

  criterion(6, "theta-kernel edge decomposition re-sums", 60, [] {
    const auto Z7 = Group::cyclic(7);
    Rng rng = make_rng(106);
    std::size_t bad = 0, total = 0;
    for (int i = 0; i < 1000; ++i) {
      const int n = 2 + i % 3;
      auto u = GroupCube::generate(n, [&](Bits) { return Z7.random_element(rng); });
      u[0] = Z7.sub(u[0], cube::theta(u, Z7));
      bad += groups::edge_sum(n, groups::edge_decompose(u, Z7), Z7) == u ? 0 : 1;
      ++total;
    }
    const auto Z2 = Group::cyclic(2);
    for (int n = 0; n <= 3; ++n) {
      const std::size_t count = std::size_t{1} << (std::size_t{1} << n);
      for (std::size_t code = 0; code < count; ++code) {
        const auto u = GroupCube::generate(n, [&](Bits v) { return Element{static_cast<std::int64_t>((code >> v) & 1U)}; });
        if (cube::theta(u, Z2) != Z2.zero()) continue;
        bad += groups::edge_sum(n, groups::edge_decompose(u, Z2), Z2) == u ? 0 : 1;
        ++total;
      }
    }
    return Outcome{bad == 0, fmt("%.0f mismatches over %.0f configs", static_cast<double>(bad), static_cast<double>(total))};
  });

  const auto skew = systems::skew_torus(kAlpha);
  const auto twisted = systems::extension_from_json(twisted_spec(), "system");
  const auto extracted = nilcycle::Nilcycle::extracted(skew, 2);
  const auto coboundary = nilcycle::Nilcycle::coboundary(twisted->base_ptr(), 2, systems::step_function(0.5, 0.0));

  criterion(7, "tricube identity, extracted skew and coboundary, 1e4 tricubes", 300, [&] {
    const auto a = nilcycle::verify_nilcycle(extracted, skew, 10000, 107, 1e-6).at("tricube");
    const auto b = nilcycle::verify_nilcycle(coboundary, twisted, 10000, 107, 1e-6).at("tricube");
    const double worst = std::max(a.max_dev, b.max_dev);
    return Outcome{worst < 1e-6 && a.n == 10000 && b.n == 10000,
                   fmt("max deviation %.3g / %.3g (tol 1e-6)", a.max_dev, b.max_dev)};
  });

  criterion(8, "nilcycle extraction consistency, 1e3 cubes", 120, [&] {
    nilcycle::ExtractionOptions opt;
    opt.n_cubes = 1000;
    Rng r1 = make_rng(108, 0), r2 = make_rng(108, 1);
    const auto [rho_skew, rep_skew] = nilcycle::extract_nilcycle(skew, 2, opt, r1);
    const auto [rho_tw, rep_tw] = nilcycle::extract_nilcycle(twisted, 2, opt, r2);
    const auto h = systems::step_function(0.5, 0.0);
    double oracle = 0.0;
    std::size_t checked = 0;
    for (const auto& bin : rep_tw.bins) {
      if (bin.flagged) continue;
      for (const auto& s : bin.samples) {
        oracle = std::max(oracle, torus::dist(s.theta, nilcycle::alternating_sum(h, s.base_cube)));
        ++checked;
      }
    }
    const bool pass = rep_skew.max_abs_rho < 1e-9 && oracle < 1e-9 && rep_tw.flagged_fraction <= 0.02 &&
                      rep_skew.flagged_fraction <= 0.02;
    return Outcome{pass, fmt("skew max|rho| %.3g, twisted oracle gap %.3g", rep_skew.max_abs_rho, oracle) +
                             fmt(" (tol 1e-9), flagged %.4f, %.0f cubes checked", rep_tw.flagged_fraction,
                                 static_cast<double>(checked))};
  });

  criterion(9, "nilcycle axiom gates and mutation", 120, [] {
    const auto ok = experiments::run(experiments::load_config(kConfigs + "/verify_coboundary_twisted.json"));
    const auto mut = experiments::run(experiments::load_config(kConfigs + "/verify_mutation_untwisted.json"));
    double worst = 0.0;
    for (const auto& c : ok.checks) worst = std::max(worst, c.value);
    const double broken = check_value(mut, "equivariance_fails");
    return Outcome{ok.pass() && mut.pass() && ok.checks.size() == 4,
                   fmt("coboundary max deviation %.3g (tol 1e-6), mutated equivariance %.3f (> 0.1)", worst, broken)};
  });

  criterion(10, "nonconventional average vs Kronecker limit, N=1e5, 20 pairs", 60, [] {
    const auto X = systems::torus_rotation({kAlpha});
    Rng rng = make_rng(110);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      std::vector<seminorms::Observable> fs;
      if (i == 0) {
        fs = {seminorms::Observable::character(-2), seminorms::Observable::character(1)};
      } else {
        for (int j = 0; j < 2; ++j) {
          std::map<std::int64_t, Complex> c;
          const int terms = 1 + static_cast<int>(uniform_index(rng, 3));
          while (static_cast<int>(c.size()) < terms)
            c[uniform_int(rng, -3, 3)] = std::polar(uniform01(rng) / 3.0, 2.0 * std::numbers::pi * uniform01(rng));
          fs.push_back(seminorms::Observable::from_trig(seminorms::TrigPoly(c)));
        }
      }
      const Point x{uniform01(rng)};
      const auto avg = seminorms::nonconventional_average(*X, x, fs, 100000).back().value;
      const Complex predicted = seminorms::kronecker_limit_rotation(fs)(x[0]);
      if (i == 0) worst = std::max(worst, std::abs(predicted - seminorms::e(-x[0])));
      worst = std::max(worst, std::abs(avg - predicted));
    }
    return Outcome{worst < 0.02, fmt("max |A_N - limit| %.3g (tol %.2f)", worst, 0.02)};
  });

  criterion(11, "NRP classes of Z/N rotation, N <= 12, k=1", 60, [] {
    bool ok = true;
    for (std::int64_t n = 1; n <= 12; ++n) {
      const auto rep = cubespace::nrp_classes(systems::cyclic_rotation(n, 1), 1);
      ok = ok && rep.classes.size() == static_cast<std::size_t>(n);
      for (const auto& cls : rep.classes) ok = ok && cls.size() == 1;
    }
    return Outcome{ok, ok ? "all singleton" : "non-singleton class found"};
  });

  criterion(12, "model action laws and measure preservation", 120, [] {
    const auto r = experiments::run(experiments::load_config(kConfigs + "/model_laws.json"));
    const double law = std::max({check_value(r, "group_action"), check_value(r, "translation_commutes"),
                                 check_value(r, "base_intertwining")});
    return Outcome{r.pass(), fmt("max law deviation %.3g (tol 1e-12), measure p-value %.4f (> 0.0027)", law,
                                 check_value(r, "measure_preservation_p"))};
  });

  criterion(13, "Q-uniqueness, 1e3 cubes, both nilcycles", 120, [&] {
    const auto a = model::q_uniqueness_check(extracted, skew, 1000, 113, 1e-6);
    const auto b = model::q_uniqueness_check(coboundary, twisted, 1000, 113, 1e-6);
    return Outcome{a.pass && b.pass && a.max_dev < 1e-6 && b.max_dev < 1e-6,
                   fmt("max deviation %.3g / %.3g (tol 1e-6)", a.max_dev, b.max_dev)};
  });

  criterion(14, "bundle vs product continuity contrast", 600, [] {
    auto config = experiments::load_config(kConfigs + "/model_continuity.toml");
    const auto r = experiments::run(config);
    auto row = [](const json& t) {
      std::string out;
      for (std::size_t i = 0; i < t["delta_grid"].size(); ++i)
        out += fmt(" %.2g:%.4f/%.3f", t["delta_grid"][i].get<double>(), t["modulus"][i].get<double>(),
                   t["naive_modulus"][i].get<double>());
      return out;
    };
    // Robustness to the test family; recorded, not gated.
    config["family"] = {{"max_freq", 2}, {"degree", 1}};
    const auto reduced = experiments::run(config);
    return Outcome{r.pass(), "delta:bundle/naive" + row(r.result["table"]) + "; reduced family " +
                                 (reduced.pass() ? "passes" : "fails") + row(reduced.result["table"])};
  });

  criterion(15, "suite reports are byte-identical on rerun (1 vs 4 threads)", 600, [] {
    setenv("CUBELAB_THREADS", "1", 1);
    const auto a = experiments::to_json(experiments::suite_file(kConfigs + "/suite.json", {}), false).dump();
    setenv("CUBELAB_THREADS", "4", 1);
    const auto b = experiments::to_json(experiments::suite_file(kConfigs + "/suite.json", {}), false).dump();
    unsetenv("CUBELAB_THREADS");
    return Outcome{a == b, fmt("%zu bytes, %s", a.size(), a == b ? "identical" : "different")};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
