#pragma once

// JSON run configuration for the command-line front end. Unknown keys are
// rejected, angles need an explicit "units" field, and stochastic runs need
// a seed. Command-line flags take precedence over file values.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bellab/estimator.hpp"
#include "bellab/oscillator.hpp"

namespace bellab::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
};

/// Outcome table: a constant, or (setting in radians, outcome) entries.
using TableConfig = std::variant<Outcome, std::vector<std::pair<double, Outcome>>>;

struct AtomConfig {
  std::int64_t lambda_id = 0;
  TableConfig a = Outcome::pass;
  TableConfig b = Outcome::pass;
  std::optional<std::pair<double, double>> registered_at;
};

struct ModelConfig {
  std::string name = "qm-singlet";
  double offset = 0.0;  // factorized-sign only, radians
  std::vector<AtomConfig> atoms;
  std::optional<std::size_t> random_atoms;
  std::vector<double> settings;  // radians, for random_atoms
};

struct SamplingConfig {
  std::uint64_t trials = 0;  // 0 selects the analytic path
  std::optional<std::uint64_t> seed;
  std::size_t partitions = 1;
  std::size_t workers = 0;
  std::size_t quadrature_points = 4096;
};

struct CorrelateConfig {
  ModelConfig model;
  std::vector<double> deltas;  // radians
  SamplingConfig sampling;
};

struct ChshConfig {
  ModelConfig model;
  std::optional<ChshQuadruple> quadruple;
  bool maximize = false;
  double grid_step = kPi / 8;
  SamplingConfig sampling;
};

struct VerifyConfig {
  std::vector<std::string> checks;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> atomized_sizes = {2, 5, 50};
  std::uint64_t zero_identity_draws = 100000;
  std::size_t ss_quadruples = 200;
  std::size_t demo_trials = 1000;
  double grid_step = kPi / 8;
  std::size_t quadrature_points = 4096;
};

struct OscillatorConfig {
  OscillatorParams<double> params;
  PhaseState<double> initial = PhaseState<double>::make(1, 0, 0, 0);
  std::optional<double> dt;  // default 0.01 / in-phase frequency
  std::uint64_t steps = 100000;
  std::uint64_t sample_every = 10;
  std::uint32_t levels = 3;
  double drift_tolerance = 1e-6;
};

/// Where and how results are written; the file may name these too.
struct OutputSettings {
  std::optional<std::string> out;
  std::optional<std::string> format;  // "csv" or "json"
};

/// Removes and returns the "out" and "format" keys of a config document.
OutputSettings take_output_settings(nlohmann::json& doc);

/// Reads and parses a config file; throws ConfigError on I/O or syntax errors.
nlohmann::json load_config_file(const std::string& path);

CorrelateConfig parse_correlate(const nlohmann::json& doc, const Overrides& overrides);
ChshConfig parse_chsh(const nlohmann::json& doc, const Overrides& overrides);
VerifyConfig parse_verify(const nlohmann::json& doc, const Overrides& overrides);
OscillatorConfig parse_oscillator(const nlohmann::json& doc, const Overrides& overrides);

const std::vector<std::string>& verify_check_names();

/// Builds the configured source; random atom tables draw from `seed`.
Source build_source(const ModelConfig& model, const std::optional<std::uint64_t>& seed);

/// True when building the model consumes randomness.
bool model_is_stochastic(const ModelConfig& model);

}  // namespace bellab::app
