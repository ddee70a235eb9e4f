#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zoab/errors.hpp"
#include "zoab/estimators.hpp"
#include "zoab/outcome_models.hpp"

namespace zoab {

enum class Method { four_point, central_fd };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

/// Tunables of the optimization loop. Defaults are the one-dimensional CTR
/// setup: k = 3, m = 50 split 45/5, c_t = t^(-1/5), alpha_t = 30/t.
struct AlgoConfig {
  std::size_t dim = 1;
  Point theta0{0.5};
  std::uint64_t total_budget = 100000;
  double k = 3.0;
  std::size_t m = 50;
  std::size_t m1 = 45;
  std::size_t m2 = 5;
  double nu = 0.2;
  double c1 = 1.0;
  double c0 = 30.0;
  double beta = 0.5;
  std::uint64_t seed = 1;
  bool record_trajectory = false;
  /// Accept nu outside (1/6, 1/4), where the rate guarantees no longer hold.
  bool allow_nu_outside = false;
  BoundaryRule boundary = BoundaryRule::shrink;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  /// nu lies outside (1/6, 1/4); only legal with allow_nu_outside.
  bool nu_outside_theory() const;
  std::size_t iterations() const { return static_cast<std::size_t>(total_budget / (2 * m)); }

  bool operator==(const AlgoConfig&) const = default;
};

/// alpha_t = c0 / t, t >= 1. Throws std::out_of_range for t = 0.
double schedule_alpha(const AlgoConfig& cfg, std::size_t t);
/// c_t = c1 * t^(-nu), t >= 1. Throws std::out_of_range for t = 0.
double schedule_c(const AlgoConfig& cfg, std::size_t t);

/// Mean of the last ceil(beta * n) iterates.
Point tail_average(std::span<const Point> iterates, double beta);

struct TailOutcome {
  /// 1-based position in the run's stream of treatment draws.
  std::uint64_t index;
  double value;
};

struct TrajectoryPoint {
  std::size_t t;     // 1-based iteration
  Point theta;       // iterate the iteration started from
  double mu_hat;     // value estimate at theta
  Point gradient;
  Point theta_next;  // iterate after the clipped update
};

struct RunResult {
  Point theta_hat;
  double mu_hat = 0.0;
  std::size_t iterations = 0;
  std::uint64_t draws_used = 0;
  /// Draws with index > floor(draws_used / 2).
  std::vector<TailOutcome> tail_outcomes;
  std::optional<std::vector<TrajectoryPoint>> trajectory;
  /// Iterations whose stencil was projected (clipped or shrunk).
  std::size_t clipped_iterations = 0;
  /// Iterations where projection merged perturbation points.
  std::size_t degenerate_iterations = 0;
};

/// Four-point zeroth-order ascent. Runs floor(T / 2m) iterations, each
/// spending 2 m1 draws on theta +- c_t w and 2 m2 on theta +- k c_t w, then
/// steps theta <- clip(theta + alpha_t g). Returns the tail-averaged iterate
/// and the mean of all per-iteration value estimates.
RunResult run_algorithm(const OutcomeModel& model, const AlgoConfig& cfg);

/// The same loop with the two-point central difference: 2m draws split m/m
/// over theta +- c_t w.
RunResult run_central_fd(const OutcomeModel& model, const AlgoConfig& cfg);

RunResult run_method(const OutcomeModel& model, const AlgoConfig& cfg, Method method);

}  // namespace zoab
