#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zoab/random_stream.hpp"

namespace zoab {

/// A treatment parameter value in [0,1]^d.
using Point = std::vector<double>;

enum class ModelFamily {
  bernoulli_quadratic,
  pareto_quadratic,
  t_noise_quadratic,
  gaussian_quadratic,
  logistic,
  gaussian_constant,
};

std::string_view to_string(ModelFamily family);
std::optional<ModelFamily> parse_model_family(std::string_view name);

/// mu(theta) = a*theta^2 + b*theta + c on [0,1].
struct Quadratic {
  double a = -0.02125;
  double b = 0.01825;
  double c = 0.0105;

  double operator()(double x) const { return (a * x + b) * x + c; }
  bool operator==(const Quadratic&) const = default;
};

/// Coefficients for every family. Only the fields relevant to the chosen
/// family are read. The defaults reproduce the CTR experiments.
struct ModelParams {
  Quadratic quadratic{};
  double pareto_shape = 3.0;
  double t_dof = 3.0;
  /// Noise sd for gaussian_quadratic / gaussian_constant. Zero gives a
  /// noiseless oracle.
  double noise_sd = 1.0;
  double constant_mean = 0.0;
  /// logistic: mu = s(-0.5 * sum_i (theta_i - center)^2 + offset), s = sigmoid.
  double logistic_center = 1.0 / 3.0;
  double logistic_offset = -2.0;

  bool operator==(const ModelParams&) const = default;
};

/// The outcome distribution at one fixed point. Cheap to copy; drawing from
/// it does not re-evaluate mu(theta).
class PointSampler {
 public:
  double draw(RandomStream& rng) const;
  double mean() const { return mean_; }

 private:
  friend class OutcomeModel;
  ModelFamily family_{};
  double mean_ = 0.0;
  double scale_ = 0.0;  // sd, Pareto x_m, or unused
  double shape_ = 0.0;  // Pareto shape or t dof
};

/// Stochastic oracle Y(theta) = mu(theta) + sigma(theta) * eps_theta on
/// [0,1]^dim. Immutable after construction.
class OutcomeModel {
 public:
  /// Throws std::invalid_argument if the parameters give an ill-defined
  /// distribution somewhere on the domain.
  OutcomeModel(ModelFamily family, std::size_t dim, ModelParams params);

  static OutcomeModel bernoulli_quadratic(Quadratic q = {});
  static OutcomeModel pareto_quadratic(Quadratic q = {}, double shape = 3.0);
  static OutcomeModel t_noise_quadratic(Quadratic q = {}, double dof = 3.0);
  static OutcomeModel gaussian_quadratic(Quadratic q, double sd);
  static OutcomeModel logistic(std::size_t dim = 6);
  static OutcomeModel gaussian_constant(std::size_t dim, double mean, double sd);

  ModelFamily family() const { return family_; }
  std::size_t dim() const { return dim_; }
  const ModelParams& params() const { return params_; }

  double true_mean(std::span<const double> theta) const;
  double true_sd(std::span<const double> theta) const;
  double draw(std::span<const double> theta, RandomStream& rng) const;
  PointSampler sampler_at(std::span<const double> theta) const;

  /// Maximizer of true_mean on the box, when the family has a unique one.
  std::optional<Point> optimum() const;

  /// Throws std::domain_error unless theta has `dim()` finite coordinates
  /// in [0,1].
  void check_domain(std::span<const double> theta) const;

 private:
  double mean_unchecked(std::span<const double> theta) const;
  double sd_from_mean(double mean) const;

  ModelFamily family_;
  std::size_t dim_;
  ModelParams params_;
};

enum class ControlNoise { bernoulli, gaussian };

/// Control arm: Y~ = mean + sd * eps~.
class ControlModel {
 public:
  /// Bernoulli(p); sd is sqrt(p(1-p)).
  static ControlModel bernoulli(double p);
  static ControlModel gaussian(double mean, double sd);

  double mean() const { return mean_; }
  double sd() const { return sd_; }
  ControlNoise noise() const { return noise_; }
  double draw(RandomStream& rng) const;

 private:
  ControlModel(ControlNoise noise, double mean, double sd)
      : noise_(noise), mean_(mean), sd_(sd) {}

  ControlNoise noise_;
  double mean_;
  double sd_;
};

}  // namespace zoab
