#include "zoab/outcome_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace zoab {
namespace {

constexpr std::array kFamilyNames = {
    std::pair{ModelFamily::bernoulli_quadratic, std::string_view{"bernoulli_quadratic"}},
    std::pair{ModelFamily::pareto_quadratic, std::string_view{"pareto_quadratic"}},
    std::pair{ModelFamily::t_noise_quadratic, std::string_view{"t_noise_quadratic"}},
    std::pair{ModelFamily::gaussian_quadratic, std::string_view{"gaussian_quadratic"}},
    std::pair{ModelFamily::logistic, std::string_view{"logistic"}},
    std::pair{ModelFamily::gaussian_constant, std::string_view{"gaussian_constant"}},
};

bool is_quadratic(ModelFamily f) {
  return f == ModelFamily::bernoulli_quadratic || f == ModelFamily::pareto_quadratic ||
         f == ModelFamily::t_noise_quadratic || f == ModelFamily::gaussian_quadratic;
}

// Smallest and largest value of q on [0,1].
std::pair<double, double> quadratic_range(const Quadratic& q) {
  double lo = std::min(q(0.0), q(1.0));
  double hi = std::max(q(0.0), q(1.0));
  if (q.a != 0.0) {
    const double vertex = -q.b / (2.0 * q.a);
    if (vertex > 0.0 && vertex < 1.0) {
      lo = std::min(lo, q(vertex));
      hi = std::max(hi, q(vertex));
    }
  }
  return {lo, hi};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::string_view to_string(ModelFamily family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return name;
  }
  return "unknown";
}

std::optional<ModelFamily> parse_model_family(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames) {
    if (n == name) return f;
  }
  if (name == "logistic_6d") return ModelFamily::logistic;
  return std::nullopt;
}

double PointSampler::draw(RandomStream& rng) const {
  switch (family_) {
    case ModelFamily::bernoulli_quadratic:
    case ModelFamily::logistic:
      return rng.uniform() < mean_ ? 1.0 : 0.0;
    case ModelFamily::pareto_quadratic:
      return scale_ * std::pow(rng.uniform_positive(), -1.0 / shape_);
    case ModelFamily::t_noise_quadratic:
      return mean_ + rng.student_t(shape_);
    case ModelFamily::gaussian_quadratic:
    case ModelFamily::gaussian_constant:
      // sd 0 consumes no randomness, keeping noiseless runs exact.
      return scale_ == 0.0 ? mean_ : mean_ + scale_ * rng.normal();
  }
  return mean_;
}

OutcomeModel::OutcomeModel(ModelFamily family, std::size_t dim, ModelParams params)
    : family_(family), dim_(dim), params_(params) {
  if (dim_ == 0) throw std::invalid_argument("outcome model dimension must be positive");
  if (is_quadratic(family_) && dim_ != 1) {
    throw std::invalid_argument("quadratic outcome models are one-dimensional");
  }
  const auto [lo, hi] = quadratic_range(params_.quadratic);
  switch (family_) {
    case ModelFamily::bernoulli_quadratic:
      if (!(lo > 0.0 && hi < 1.0)) {
        throw std::invalid_argument("bernoulli_quadratic mean must stay in (0,1) on [0,1]");
      }
      break;
    case ModelFamily::pareto_quadratic:
      if (!(lo > 0.0)) throw std::invalid_argument("pareto_quadratic mean must be positive on [0,1]");
      if (!(params_.pareto_shape > 2.0)) {
        throw std::invalid_argument("pareto shape must exceed 2 for a finite variance");
      }
      break;
    case ModelFamily::t_noise_quadratic:
      if (!(params_.t_dof > 2.0)) {
        throw std::invalid_argument("t degrees of freedom must exceed 2 for a finite variance");
      }
      break;
    case ModelFamily::gaussian_quadratic:
    case ModelFamily::gaussian_constant:
      if (!(params_.noise_sd >= 0.0) || !std::isfinite(params_.noise_sd)) {
        throw std::invalid_argument("noise sd must be finite and nonnegative");
      }
      break;
    case ModelFamily::logistic:
      break;
  }
}

OutcomeModel OutcomeModel::bernoulli_quadratic(Quadratic q) {
  ModelParams p;
  p.quadratic = q;
  return {ModelFamily::bernoulli_quadratic, 1, p};
}

OutcomeModel OutcomeModel::pareto_quadratic(Quadratic q, double shape) {
  ModelParams p;
  p.quadratic = q;
  p.pareto_shape = shape;
  return {ModelFamily::pareto_quadratic, 1, p};
}

OutcomeModel OutcomeModel::t_noise_quadratic(Quadratic q, double dof) {
  ModelParams p;
  p.quadratic = q;
  p.t_dof = dof;
  return {ModelFamily::t_noise_quadratic, 1, p};
}

OutcomeModel OutcomeModel::gaussian_quadratic(Quadratic q, double sd) {
  ModelParams p;
  p.quadratic = q;
  p.noise_sd = sd;
  return {ModelFamily::gaussian_quadratic, 1, p};
}

OutcomeModel OutcomeModel::logistic(std::size_t dim) { return {ModelFamily::logistic, dim, {}}; }

OutcomeModel OutcomeModel::gaussian_constant(std::size_t dim, double mean, double sd) {
  ModelParams p;
  p.constant_mean = mean;
  p.noise_sd = sd;
  return {ModelFamily::gaussian_constant, dim, p};
}

void OutcomeModel::check_domain(std::span<const double> theta) const {
  if (theta.size() != dim_) {
    throw std::domain_error("theta has dimension " + std::to_string(theta.size()) +
                            ", model expects " + std::to_string(dim_));
  }
  for (double x : theta) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::domain_error("theta coordinate " + std::to_string(x) + " outside [0,1]");
    }
  }
}

double OutcomeModel::mean_unchecked(std::span<const double> theta) const {
  switch (family_) {
    case ModelFamily::bernoulli_quadratic:
    case ModelFamily::pareto_quadratic:
    case ModelFamily::t_noise_quadratic:
    case ModelFamily::gaussian_quadratic:
      return params_.quadratic(theta[0]);
    case ModelFamily::logistic: {
      double sq = 0.0;
      for (double x : theta) sq += (x - params_.logistic_center) * (x - params_.logistic_center);
      return sigmoid(-0.5 * sq + params_.logistic_offset);
    }
    case ModelFamily::gaussian_constant:
      return params_.constant_mean;
  }
  return 0.0;
}

double OutcomeModel::sd_from_mean(double mean) const {
  switch (family_) {
    case ModelFamily::bernoulli_quadratic:
    case ModelFamily::logistic:
      return std::sqrt(mean * (1.0 - mean));
    case ModelFamily::pareto_quadratic: {
      const double a = params_.pareto_shape;
      const double xm = mean * (a - 1.0) / a;
      return xm / (a - 1.0) * std::sqrt(a / (a - 2.0));
    }
    case ModelFamily::t_noise_quadratic:
      return std::sqrt(params_.t_dof / (params_.t_dof - 2.0));
    case ModelFamily::gaussian_quadratic:
    case ModelFamily::gaussian_constant:
      return params_.noise_sd;
  }
  return 0.0;
}

double OutcomeModel::true_mean(std::span<const double> theta) const {
  check_domain(theta);
  return mean_unchecked(theta);
}

double OutcomeModel::true_sd(std::span<const double> theta) const {
  check_domain(theta);
  return sd_from_mean(mean_unchecked(theta));
}

PointSampler OutcomeModel::sampler_at(std::span<const double> theta) const {
  check_domain(theta);
  PointSampler s;
  s.family_ = family_;
  s.mean_ = mean_unchecked(theta);
  switch (family_) {
    case ModelFamily::pareto_quadratic:
      s.shape_ = params_.pareto_shape;
      s.scale_ = s.mean_ * (s.shape_ - 1.0) / s.shape_;
      break;
    case ModelFamily::t_noise_quadratic:
      s.shape_ = params_.t_dof;
      break;
    case ModelFamily::gaussian_quadratic:
    case ModelFamily::gaussian_constant:
      s.scale_ = params_.noise_sd;
      break;
    default:
      break;
  }
  return s;
}

double OutcomeModel::draw(std::span<const double> theta, RandomStream& rng) const {
  return sampler_at(theta).draw(rng);
}

std::optional<Point> OutcomeModel::optimum() const {
  if (is_quadratic(family_)) {
    const Quadratic& q = params_.quadratic;
    if (q.a < 0.0) return Point{std::clamp(-q.b / (2.0 * q.a), 0.0, 1.0)};
    if (q(0.0) > q(1.0)) return Point{0.0};
    if (q(1.0) > q(0.0)) return Point{1.0};
    return std::nullopt;
  }
  if (family_ == ModelFamily::logistic) {
    return Point(dim_, std::clamp(params_.logistic_center, 0.0, 1.0));
  }
  return std::nullopt;
}

ControlModel ControlModel::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("control Bernoulli mean must lie in [0,1]");
  return {ControlNoise::bernoulli, p, std::sqrt(p * (1.0 - p))};
}

ControlModel ControlModel::gaussian(double mean, double sd) {
  if (!(sd >= 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
    throw std::invalid_argument("control sd must be finite and nonnegative");
  }
  return {ControlNoise::gaussian, mean, sd};
}

double ControlModel::draw(RandomStream& rng) const {
  if (noise_ == ControlNoise::bernoulli) return rng.uniform() < mean_ ? 1.0 : 0.0;
  return sd_ == 0.0 ? mean_ : mean_ + sd_ * rng.normal();
}

}  // namespace zoab
