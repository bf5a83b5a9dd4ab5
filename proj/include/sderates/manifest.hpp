#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace sderates::cli {

// Exit codes shared with the command-line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitAssertionFailure = 1;
inline constexpr int kExitValidationError = 2;
inline constexpr int kExitRuntimeError = 3;

struct ManifestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  StrongRate,
  FunctionalRate,
  BoundDominance,
  Sharpness,
  LowerBound,
  DensityProbe,
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct Outputs {
  std::string dir = ".";
  std::string csv = "results.csv";
  std::string summary = "summary.json";
  std::string plot = "plot.dat";
};

struct ExperimentManifest {
  ExperimentKind kind = ExperimentKind::StrongRate;
  std::string model = "gbm";
  nlohmann::json model_overrides = nlohmann::json::object();
  std::string scheme = "euler";
  nlohmann::json functional = "indicator";  // registry name or inline representation
  nlohmann::json functional_params = nlohmann::json::object();
  double p = 2.0;
  double q = 2.0;
  double theta = 0.5;
  double epsilon = 0.1;
  std::vector<int> n_grid;
  nlohmann::json k_grid;  // {"min":..., "max":..., "count":...}; max defaults to q_0.9999
  std::size_t n_paths = 100000;
  std::uint64_t seed = 42;
  bool sup_norm = false;
  std::size_t window_count = 50;  // DensityProbe
  Outputs outputs;
  nlohmann::json assertions = nlohmann::json::object();
  bool timestamp = true;

  // Parses and validates; throws ManifestError with a field-level diagnostic.
  static ExperimentManifest from_json(const nlohmann::json& j);
};

// Dotted-path --set overrides applied to the raw document; values are parsed
// as JSON when possible and fall back to strings.
nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string>& sets);

nlohmann::json load_json_file(const std::string& path);

struct RunResult {
  int exit_code = kExitPass;
  nlohmann::json summary;
  std::string csv;
  std::string plot;
  std::vector<std::string> warnings;
};

// Executes the experiment and renders the report artifacts in memory.
RunResult run_experiment(const ExperimentManifest& manifest);

// run_experiment plus writing csv/summary/plot under outputs.dir.
RunResult run_and_write(const ExperimentManifest& manifest);

// Round-trip decimal formatting for doubles ("%.17g").
std::string format_double(double v);

}  // namespace sderates::cli
