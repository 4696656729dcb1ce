#pragma once

// Declarative experiment runner behind the CLI: configs (JSON or TOML) name an
// experiment tag, a system and parameters; runs produce a RunReport whose
// checks carry explicit pass verdicts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cubelab::experiments {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  /// How value is compared with tolerance: "<=", ">=", "<", ">".
  std::string relation = "<=";
  bool pass = false;
};

struct RunReport {
  std::string experiment;
  nlohmann::json config;
  std::vector<Check> checks;
  nlohmann::json result = nlohmann::json::object();
  /// Optional tabular data, written next to the JSON report.
  std::string csv;
  /// Set when the run stopped on a precondition failure.
  std::string error;
  double wall_seconds = 0.0;

  bool pass() const;
};

/// Without timing the JSON is a pure function of the config.
nlohmann::json to_json(const RunReport& r, bool timing = true);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
};

/// Parse a .toml or .json file (by extension; others are tried as JSON).
/// Throws ConfigError("config", ...) when the file is missing or malformed.
nlohmann::json load_config(const std::string& path);
nlohmann::json apply_overrides(nlohmann::json config, const Overrides& o);

const std::vector<std::string>& experiment_tags();

/// Validate and execute. Throws ConfigError for invalid configs and
/// CapExceeded when parameters exceed module caps; precondition failures
/// during the run are reported as a failed check.
RunReport run(const nlohmann::json& config);

int exit_code(const RunReport& r);

struct CheckInfo {
  std::string name;
  std::string identity;
};

/// Every check the runner can emit, with the identity it tests.
const std::vector<CheckInfo>& list_checks();

struct SuiteRow {
  std::string name;
  std::string experiment;
  bool pass = false;
  std::size_t failed_checks = 0;
  std::string error;
  bool config_error = false;
  double wall_seconds = 0.0;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;
  std::vector<RunReport> runs;

  bool pass() const;
  bool config_error() const;
};

/// Manifest: {"seed": master (optional), "runs": [{"name": ..., "config": {...}}
/// or {"name": ..., "path": "relative/to/manifest.toml"}]}. A run without a
/// seed gets derive_seed(master, index).
SuiteReport suite(const nlohmann::json& manifest, const std::string& base_dir, const Overrides& o = {});
SuiteReport suite_file(const std::string& path, const Overrides& o = {});
std::string suite_csv(const SuiteReport& s, bool timing = true);
nlohmann::json to_json(const SuiteReport& s, bool timing = true);
int exit_code(const SuiteReport& s);

}  // namespace cubelab::experiments
