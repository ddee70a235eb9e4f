#include "zoab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "zoab/estimators.hpp"
#include "zoab/random_stream.hpp"

namespace zoab {
namespace {

void check_model(const OutcomeModel& model, const AlgoConfig& cfg) {
  cfg.validate();
  if (model.dim() != cfg.dim) {
    throw ConfigError("algorithm.dim", "model dimension is " + std::to_string(model.dim()) +
                                           " but the algorithm is configured for " +
                                           std::to_string(cfg.dim));
  }
}

// Accumulates the tail average and tail outcomes without storing iterates.
class RunState {
 public:
  RunState(const AlgoConfig& cfg)
      : theta_(cfg.theta0),
        iterations_(cfg.iterations()),
        draws_used_(static_cast<std::uint64_t>(iterations_) * 2 * cfg.m),
        tail_start_(iterations_ - static_cast<std::size_t>(
                                      std::ceil(cfg.beta * static_cast<double>(iterations_)))),
        theta_sum_(cfg.dim, 0.0) {
    if (cfg.record_trajectory) result_.trajectory.emplace().reserve(iterations_);
    result_.tail_outcomes.reserve(draws_used_ - draws_used_ / 2);
  }

  const Point& theta() const { return theta_; }
  std::size_t iterations() const { return iterations_; }

  void record_draws(std::uint64_t first_index, std::span<const LabeledOutcome> outcomes) {
    const std::uint64_t threshold = draws_used_ / 2;
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
      const std::uint64_t index = first_index + j;
      if (index > threshold) result_.tail_outcomes.push_back({index, outcomes[j].value});
    }
  }

  void step(std::size_t t, double mu_hat, const Point& gradient, double alpha, bool clipped,
            bool degenerate) {
    Point next = theta_;
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = std::clamp(next[i] + alpha * gradient[i], 0.0, 1.0);
    }
    mu_sum_ += mu_hat;
    if (clipped) ++result_.clipped_iterations;
    if (degenerate) ++result_.degenerate_iterations;
    if (result_.trajectory) result_.trajectory->push_back({t, theta_, mu_hat, gradient, next});
    theta_ = std::move(next);
    if (t > tail_start_) {
      for (std::size_t i = 0; i < theta_.size(); ++i) theta_sum_[i] += theta_[i];
    }
  }

  RunResult finish() && {
    const double tail_count = static_cast<double>(iterations_ - tail_start_);
    result_.theta_hat = std::move(theta_sum_);
    for (double& x : result_.theta_hat) x /= tail_count;
    result_.mu_hat = mu_sum_ / static_cast<double>(iterations_);
    result_.iterations = iterations_;
    result_.draws_used = draws_used_;
    return std::move(result_);
  }

 private:
  Point theta_;
  std::size_t iterations_;
  std::uint64_t draws_used_;
  std::size_t tail_start_;
  Point theta_sum_;
  double mu_sum_ = 0.0;
  RunResult result_;
};

// Under the shrink rule a direction with no room on either side (theta on an
// edge or corner of the box) yields no information; redraw it.
constexpr int kMaxDirectionDraws = 4096;

template <typename MakeStencil>
std::pair<Point, PerturbationSet> draw_stencil(RandomStream& rng, const AlgoConfig& cfg,
                                               MakeStencil make) {
  Point w = sample_unit_sphere(rng, cfg.dim);
  PerturbationSet points = make(w);
  for (int attempt = 1; cfg.boundary == BoundaryRule::shrink && attempt < kMaxDirectionDraws &&
                        points.width_plus == 0.0 && points.width_minus == 0.0;
       ++attempt) {
    w = sample_unit_sphere(rng, cfg.dim);
    points = make(w);
  }
  return {std::move(w), std::move(points)};
}

}  // namespace

std::string_view to_string(Method method) {
  return method == Method::four_point ? "four_point" : "central_fd";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "four_point") return Method::four_point;
  if (name == "central_fd") return Method::central_fd;
  return std::nullopt;
}

bool AlgoConfig::nu_outside_theory() const { return !(nu > 1.0 / 6.0 && nu < 0.25); }

void AlgoConfig::validate() const {
  if (dim == 0) throw ConfigError("algorithm.dim", "must be positive");
  if (theta0.size() != dim) {
    throw ConfigError("algorithm.theta0", "expected " + std::to_string(dim) + " coordinates");
  }
  for (double x : theta0) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("algorithm.theta0", "coordinates must lie in [0,1]");
  }
  if (!(k > 1.0) || !std::isfinite(k)) throw ConfigError("algorithm.k", "must exceed 1");
  if (m1 == 0) throw ConfigError("algorithm.m1", "must be positive");
  if (m2 == 0) throw ConfigError("algorithm.m2", "must be positive");
  if (m1 + m2 != m) throw ConfigError("algorithm.m", "must equal m1 + m2");
  if (total_budget < 2 * m) {
    throw ConfigError("algorithm.T", "budget " + std::to_string(total_budget) +
                                         " is smaller than one iteration (2m = " +
                                         std::to_string(2 * m) + ")");
  }
  if (!std::isfinite(nu) || nu <= 0.0) throw ConfigError("algorithm.nu", "must be positive");
  if (nu_outside_theory() && !allow_nu_outside) {
    throw ConfigError("algorithm.nu", "must lie in (1/6, 1/4); set allow_nu_outside to override");
  }
  if (!(c1 > 0.0) || !std::isfinite(c1)) throw ConfigError("algorithm.c1", "must be positive");
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw ConfigError("algorithm.c0", "must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("algorithm.beta", "must lie in (0, 1]");
}

double schedule_alpha(const AlgoConfig& cfg, std::size_t t) {
  if (t == 0) throw std::out_of_range("schedules are indexed from t = 1");
  return cfg.c0 / static_cast<double>(t);
}

double schedule_c(const AlgoConfig& cfg, std::size_t t) {
  if (t == 0) throw std::out_of_range("schedules are indexed from t = 1");
  return cfg.c1 * std::pow(static_cast<double>(t), -cfg.nu);
}

Point tail_average(std::span<const Point> iterates, double beta) {
  if (iterates.empty()) throw std::invalid_argument("tail_average of an empty trajectory");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
  const std::size_t n = iterates.size();
  const auto count = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(n)));
  Point avg(iterates.front().size(), 0.0);
  for (std::size_t i = n - count; i < n; ++i) {
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += iterates[i][j];
  }
  for (double& x : avg) x /= static_cast<double>(count);
  return avg;
}

RunResult run_algorithm(const OutcomeModel& model, const AlgoConfig& cfg) {
  check_model(model, cfg);
  RandomStream rng(cfg.seed);
  RunState state(cfg);
  std::uint64_t next_index = 1;
  for (std::size_t t = 1; t <= state.iterations(); ++t) {
    const double c = schedule_c(cfg, t);
    const auto [w, points] = draw_stencil(rng, cfg, [&](const Point& dir) {
      return make_perturbation(state.theta(), dir, c, cfg.k, cfg.boundary);
    });
    const IterationEstimates est = estimate_four_point(model, points, cfg.m1, cfg.m2, rng);
    state.record_draws(next_index, est.outcomes);
    next_index += est.draws_used;
    state.step(t, est.mu_hat, est.gradient, schedule_alpha(cfg, t), points.clipped,
               points.degenerate);
  }
  return std::move(state).finish();
}

RunResult run_central_fd(const OutcomeModel& model, const AlgoConfig& cfg) {
  check_model(model, cfg);
  RandomStream rng(cfg.seed);
  RunState state(cfg);
  std::uint64_t next_index = 1;
  for (std::size_t t = 1; t <= state.iterations(); ++t) {
    const double c = schedule_c(cfg, t);
    const auto [w, points] = draw_stencil(rng, cfg, [&](const Point& dir) {
      return central_points(state.theta(), dir, c, cfg.boundary);
    });
    const PairMeans pair = collect_pair_means(model, points.plus, points.minus, cfg.m, rng);
    state.record_draws(next_index, pair.outcomes);
    next_index += 2 * cfg.m;
    const DirectionalEstimate est = central_fd_estimate(pair.mean_a, pair.mean_b, points, cfg.m);
    state.step(t, est.value, est.gradient, schedule_alpha(cfg, t), points.clipped,
               points.degenerate);
  }
  return std::move(state).finish();
}

RunResult run_method(const OutcomeModel& model, const AlgoConfig& cfg, Method method) {
  return method == Method::four_point ? run_algorithm(model, cfg) : run_central_fd(model, cfg);
}

}  // namespace zoab
