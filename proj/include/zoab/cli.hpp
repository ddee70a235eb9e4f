#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "zoab/config.hpp"

namespace zoab {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Command-line values that take precedence over the config file.
struct CliOverrides {
  std::optional<std::uint64_t> seed;  // algorithm.seed and harness.master_seed
  std::optional<Method> method;
  std::optional<std::uint64_t> T;
  std::optional<std::size_t> R;
  std::optional<unsigned> threads;
  bool paper_scale = false;
  std::optional<std::string> records_csv;
  std::optional<std::string> summary_json;
  std::optional<std::string> compare_json;
};

/// Full-size budgets: T = 10^7 for every family, R = 1000 for the 1-d
/// Bernoulli setup and R = 200 for the logistic one. Other families keep R.
void apply_paper_scale(ExperimentConfig& config);

/// Loads the config, applies overrides (flag > ZOAB_THREADS > file for the
/// thread cap) and validates. Throws ConfigError.
ExperimentConfig resolve_config(const std::string& path, const CliOverrides& overrides);

int cmd_run(const std::string& path, const CliOverrides& overrides, std::ostream& out,
            std::ostream& err);
int cmd_replicate(const std::string& path, const CliOverrides& overrides, std::ostream& out,
                  std::ostream& err);
int cmd_compare(const std::string& path, const CliOverrides& overrides, std::ostream& out,
                std::ostream& err);

/// `zoab run|replicate|compare CONFIG [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zoab
