#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zoab/harness.hpp"
#include "zoab/optimizer.hpp"
#include "zoab/outcome_models.hpp"

namespace zoab {

struct ModelSection {
  ModelFamily family = ModelFamily::bernoulli_quadratic;
  std::size_t dim = 1;
  ModelParams params{};

  bool operator==(const ModelSection&) const = default;
};

struct HarnessSection {
  std::size_t replications = 1000;
  std::uint64_t master_seed = 1;
  unsigned threads = 0;
  double level = 0.95;
  /// Iteration counts for the convergence diagnostic.
  std::vector<std::size_t> checkpoints;
  HistogramSpec histogram{};
  std::string records_csv = "records.csv";
  std::string summary_json = "summary.json";
  std::string compare_json = "compare.json";

  bool operator==(const HarnessSection&) const = default;
};

/// Reporting only; T = qN is what the optimizer sees.
struct MetadataSection {
  std::optional<double> q;
  std::optional<std::uint64_t> N;
  std::string label;

  bool operator==(const MetadataSection&) const = default;
};

struct ControlSection {
  ControlNoise noise = ControlNoise::bernoulli;
  double mean = 0.0;
  double sd = 0.0;  // gaussian only
  std::size_t n = 0;

  bool operator==(const ControlSection&) const = default;
};

struct ExperimentConfig {
  ModelSection model{};
  AlgoConfig algorithm{};
  Method method = Method::four_point;
  std::string trajectory_csv;  // empty: none
  HarnessSection harness{};
  MetadataSection metadata{};
  std::optional<ControlSection> control;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the sectioned key = value format described in the README.
/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(std::string_view text);
/// Reads and parses a file; an unreadable file is a ConfigError on "file".
ExperimentConfig load_config(const std::string& path);
/// Writes every field back out; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Cross-field checks (algorithm, model, harness, control). Throws
/// ConfigError.
void validate(const ExperimentConfig& config);
OutcomeModel build_model(const ExperimentConfig& config);
ControlModel build_control(const ControlSection& control);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_number(double value);

}  // namespace zoab
