#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cubelab/error.hpp"
#include "cubelab/experiments.hpp"

using namespace cubelab;
using namespace cubelab::experiments;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
};

void add_flags(CLI::App* app, Flags& f, bool need_config) {
  auto* c = app->add_option("--config", f.config, "Config file (TOML or JSON)");
  if (need_config) c->required()->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "Write the JSON report here (CSV data goes next to it)");
  app->add_option("--seed", f.seed, "Override the config seed");
  app->add_option("--samples", f.samples, "Override the sample count");
  app->add_option("--tol", f.tol, "Override the tolerance");
}

Overrides overrides(const Flags& f) { return {f.seed, f.samples, f.tol}; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("out", "cannot write '" + path + "'");
  out << text;
}

std::string csv_path(const std::string& out) {
  return std::filesystem::path(out).replace_extension(".csv").string();
}

int run_experiment(const std::string& tag, const Flags& f) {
  json config = apply_overrides(load_config(f.config), overrides(f));
  if (!config.contains("experiment")) config["experiment"] = tag;
  if (config["experiment"] != tag)
    throw ConfigError("experiment", "config is for '" + config["experiment"].dump() + "', subcommand is '" + tag + "'");
  const auto report = run(config);
  const std::string text = to_json(report).dump(2) + "\n";
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_text(f.out, text);
    if (!report.csv.empty()) write_text(csv_path(f.out), report.csv);
  }
  for (const auto& c : report.checks)
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << ' ' << c.relation << ' '
              << c.tolerance << "\n";
  if (!report.error.empty()) std::cerr << "FAIL " << report.error << "\n";
  return exit_code(report);
}

int run_suite(const Flags& f) {
  const auto s = suite_file(f.config, overrides(f));
  const std::string csv = suite_csv(s);
  if (!f.out.empty()) {
    write_text(f.out, to_json(s).dump(2) + "\n");
    write_text(csv_path(f.out), csv);
  }
  std::cout << csv;
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Host-Kra cube, seminorm and nilcycle experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  bool list = false;
  app.add_flag("--list-checks", list, "Print every check with the identity it tests");

  Flags flags;
  std::string tag;
  auto simple = [&](const std::string& name, const std::string& help, const std::string& experiment) {
    auto* sub = app.add_subcommand(name, help);
    add_flags(sub, flags, true);
    sub->callback([&tag, experiment] { tag = experiment; });
  };
  simple("gowers", "Gowers / Host-Kra seminorms", "gowers");
  simple("avg", "Nonconventional ergodic averages", "avg");
  simple("cubes", "Sample and check dynamical cubes", "cubes");
  simple("nrp", "Regional proximality classes of a finite system", "nrp");
  simple("q-check", "Origin value determined by the nilcycle", "q-check");

  auto* nil = app.add_subcommand("nilcycle", "Nilcycle extraction and verification")->require_subcommand(1);
  auto* extract = nil->add_subcommand("extract", "Extract a nilcycle from an extension");
  add_flags(extract, flags, true);
  extract->callback([&] { tag = "nilcycle-extract"; });
  auto* verify = nil->add_subcommand("verify", "Check the nilcycle identities");
  add_flags(verify, flags, true);
  verify->callback([&] { tag = "nilcycle-verify"; });

  auto* model = app.add_subcommand("model", "Model space probes")->require_subcommand(1);
  auto* probe = model->add_subcommand("probe", "Continuity, action laws or covering numbers");
  add_flags(probe, flags, true);
  probe->callback([&] { tag = "model-probe"; });

  auto* suite_cmd = app.add_subcommand("suite", "Run every config listed in a manifest");
  add_flags(suite_cmd, flags, false);
  suite_cmd->add_option("manifest", flags.config, "Manifest file")->check(CLI::ExistingFile);
  suite_cmd->callback([&] { tag = "suite"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitConfigError;
  }

  if (list) {
    for (const auto& c : list_checks()) std::cout << c.name << "\t" << c.identity << "\n";
    return kExitPass;
  }
  if (tag.empty()) {
    std::cerr << app.help();
    return kExitConfigError;
  }
  try {
    if (tag == "suite") {
      if (flags.config.empty()) throw ConfigError("manifest", "missing");
      return run_suite(flags);
    }
    return run_experiment(tag, flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
