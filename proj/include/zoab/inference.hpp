#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "zoab/optimizer.hpp"

namespace zoab {

struct ConfidenceInterval {
  double center = 0.0;
  double half_width = 0.0;
  double level = 0.95;
  double sigma_hat = 0.0;
  std::uint64_t T = 0;
  double k = 0.0;

  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
  bool contains(double x) const { return lower() <= x && x <= upper(); }
};

struct AteEstimate {
  double treatment_mean = 0.0;
  double control_mean = 0.0;
  double difference = 0.0;
  double se_difference = 0.0;
};

/// Two-sided normal quantile for the supported levels 0.90, 0.95 (1.96) and
/// 0.99. Throws std::invalid_argument for any other level.
double z_quantile(double level);

/// Sample standard deviation (n - 1 denominator). Needs two or more values.
double sigma_hat(std::span<const double> outcomes);
double sigma_hat(std::span<const TailOutcome> outcomes);

/// mu_hat +- z * (k^2 + 1) * sigma_hat / (sqrt(T) * (k^2 - 1)).
ConfidenceInterval confidence_interval(double mu_hat, double sigma_hat, double k, std::uint64_t T,
                                       double level = 0.95);

/// sqrt(T) (k^2 - 1) / ((k^2 + 1) sigma_star) * (mu_hat - mu_true), which is
/// asymptotically N(0, 1) for the four-point estimator.
double normalized_statistic(double mu_hat, double mu_true_at_theta_hat, double sigma_star, double k,
                            std::uint64_t T);

/// Integer split minimizing asymptotic_variance: the floor or ceiling of
/// k^2 m / (k^2 + 1), whichever is better (half up on ties), clamped so both
/// parts are at least 1.
std::pair<std::size_t, std::size_t> recommend_split(std::size_t m, double k);

/// Limit of T * Var(mu_hat): m / (k^2 - 1)^2 * (k^4 / m1 + 1 / m2) * sigma^2.
double asymptotic_variance(std::size_t m, std::size_t m1, std::size_t m2, double k,
                           double sigma_star);

/// (k^2 + 1)^2 / (k^2 - 1)^2: variance cost relative to sampling a known
/// optimum T times.
double variance_inflation(double k);

/// Treatment-minus-control contrast. The treatment side uses the
/// optimizer's value estimate with variance inflation(k) sigma_hat^2 / T;
/// the control side its sample mean and variance.
AteEstimate ate_contrast(const RunResult& treatment, double sigma_hat, double k,
                         std::span<const double> control_outcomes);

}  // namespace zoab
