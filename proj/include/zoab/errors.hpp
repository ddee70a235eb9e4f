#pragma once

#include <stdexcept>
#include <string>

namespace zoab {

// Error conventions:
//   std::domain_error     - a point outside [0,1]^d or of the wrong dimension
//   std::invalid_argument - an estimator/inference parameter out of range
//   std::out_of_range     - schedule index t = 0
//   ConfigError           - an invalid configuration, tagged with its key

/// Invalid configuration value. `key()` names the offending setting in
/// `section.name` form so front ends can report it verbatim.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace zoab
