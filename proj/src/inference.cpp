#include "zoab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace zoab {
namespace {

void require_spread(double k) {
  if (!(k > 1.0) || !std::isfinite(k)) throw std::invalid_argument("spread k must exceed 1");
}

// Welford; values are fed through a projection so both overloads share it.
template <typename Range, typename Proj>
double sample_sd(const Range& values, Proj proj) {
  if (values.size() < 2) throw std::invalid_argument("sigma_hat needs at least two outcomes");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    const double x = proj(v);
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  return std::sqrt(std::max(m2, 0.0) / static_cast<double>(n - 1));
}

}  // namespace

double z_quantile(double level) {
  if (std::fabs(level - 0.95) < 1e-12) return 1.96;
  if (std::fabs(level - 0.90) < 1e-12) return 1.6448536269514722;
  if (std::fabs(level - 0.99) < 1e-12) return 2.5758293035489004;
  throw std::invalid_argument("unsupported confidence level; use 0.90, 0.95 or 0.99");
}

double sigma_hat(std::span<const double> outcomes) {
  return sample_sd(outcomes, [](double x) { return x; });
}

double sigma_hat(std::span<const TailOutcome> outcomes) {
  return sample_sd(outcomes, [](const TailOutcome& o) { return o.value; });
}

ConfidenceInterval confidence_interval(double mu_hat, double sigma_hat, double k, std::uint64_t T,
                                       double level) {
  require_spread(k);
  if (T == 0) throw std::invalid_argument("confidence interval needs T >= 1");
  if (!(sigma_hat >= 0.0)) throw std::invalid_argument("sigma_hat must be nonnegative");
  const double k2 = k * k;
  ConfidenceInterval ci;
  ci.center = mu_hat;
  ci.level = level;
  ci.sigma_hat = sigma_hat;
  ci.T = T;
  ci.k = k;
  ci.half_width = z_quantile(level) * (k2 + 1.0) * sigma_hat /
                  (std::sqrt(static_cast<double>(T)) * (k2 - 1.0));
  return ci;
}

double normalized_statistic(double mu_hat, double mu_true_at_theta_hat, double sigma_star, double k,
                            std::uint64_t T) {
  require_spread(k);
  if (!(sigma_star > 0.0)) throw std::invalid_argument("sigma_star must be positive");
  const double k2 = k * k;
  return std::sqrt(static_cast<double>(T)) * (k2 - 1.0) / ((k2 + 1.0) * sigma_star) *
         (mu_hat - mu_true_at_theta_hat);
}

std::pair<std::size_t, std::size_t> recommend_split(std::size_t m, double k) {
  require_spread(k);
  if (m < 2) throw std::invalid_argument("recommend_split needs m >= 2");
  const double k2 = k * k;
  const double ideal = k2 * static_cast<double>(m) / (k2 + 1.0);
  // The variance is convex in m1, so the best integer split is the floor or
  // the ceiling of the ideal; rounding half up only breaks exact ties.
  const auto lo = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(ideal)), 1, m - 1);
  const auto hi = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(ideal)), 1, m - 1);
  const double v_lo = asymptotic_variance(m, lo, m - lo, k, 1.0);
  const double v_hi = asymptotic_variance(m, hi, m - hi, k, 1.0);
  const std::size_t m1 = v_lo < v_hi ? lo : hi;
  return {m1, m - m1};
}

double asymptotic_variance(std::size_t m, std::size_t m1, std::size_t m2, double k,
                           double sigma_star) {
  require_spread(k);
  if (m1 == 0 || m2 == 0) throw std::invalid_argument("m1 and m2 must be positive");
  const double k2 = k * k;
  return static_cast<double>(m) / ((k2 - 1.0) * (k2 - 1.0)) *
         (k2 * k2 / static_cast<double>(m1) + 1.0 / static_cast<double>(m2)) * sigma_star *
         sigma_star;
}

double variance_inflation(double k) {
  require_spread(k);
  const double r = (k * k + 1.0) / (k * k - 1.0);
  return r * r;
}

AteEstimate ate_contrast(const RunResult& treatment, double sigma_hat, double k,
                         std::span<const double> control_outcomes) {
  if (control_outcomes.empty()) throw std::invalid_argument("ate_contrast needs control outcomes");
  if (treatment.draws_used == 0) throw std::invalid_argument("treatment run has no draws");
  const auto n = static_cast<double>(control_outcomes.size());
  AteEstimate ate;
  ate.treatment_mean = treatment.mu_hat;
  ate.control_mean = std::accumulate(control_outcomes.begin(), control_outcomes.end(), 0.0) / n;
  ate.difference = ate.treatment_mean - ate.control_mean;
  const double control_var =
      control_outcomes.size() >= 2 ? std::pow(zoab::sigma_hat(control_outcomes), 2) / n : 0.0;
  const double treatment_var =
      variance_inflation(k) * sigma_hat * sigma_hat / static_cast<double>(treatment.draws_used);
  ate.se_difference = std::sqrt(treatment_var + control_var);
  return ate;
}

}  // namespace zoab
