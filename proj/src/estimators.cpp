#include "zoab/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace zoab {
namespace {

void require_positive_width(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("half width c must be positive");
}

void require_spread(double k) {
  if (!(k > 1.0) || !std::isfinite(k)) throw std::invalid_argument("spread k must exceed 1");
}

Point scaled(std::span<const double> w, double s) {
  Point out(w.begin(), w.end());
  for (double& x : out) x *= s;
  return out;
}

void check_stencil_inputs(std::span<const double> theta, std::span<const double> w, double c,
                          double k) {
  require_positive_width(c);
  require_spread(k);
  if (w.size() != theta.size()) throw std::domain_error("direction and theta differ in dimension");
  for (double x : theta) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("theta outside [0,1]");
  }
}

PerturbationSet empty_set(std::span<const double> theta, std::span<const double> w, double c,
                          double k, BoundaryRule rule) {
  PerturbationSet set;
  set.direction.assign(w.begin(), w.end());
  set.half_width = c;
  set.spread = k;
  set.width_plus = c;
  set.width_minus = c;
  set.rule = rule;
  const std::size_t d = theta.size();
  set.plus.resize(d);
  set.minus.resize(d);
  set.plus_plus.resize(d);
  set.minus_minus.resize(d);
  return set;
}

}  // namespace

Point sample_unit_sphere(RandomStream& rng, std::size_t dim) {
  if (dim == 0) throw std::domain_error("sphere dimension must be positive");
  Point w(dim);
  double norm = 0.0;
  do {
    for (double& x : w) x = rng.normal();
    norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
  } while (norm == 0.0);
  for (double& x : w) x /= norm;
  return w;
}

std::string_view to_string(BoundaryRule rule) {
  return rule == BoundaryRule::shrink ? "shrink" : "clip";
}

std::optional<BoundaryRule> parse_boundary_rule(std::string_view name) {
  if (name == "shrink") return BoundaryRule::shrink;
  if (name == "clip") return BoundaryRule::clip;
  return std::nullopt;
}

double reach_along(std::span<const double> theta, std::span<const double> w) {
  double reach = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (w[i] > 0.0) reach = std::min(reach, (1.0 - theta[i]) / w[i]);
    if (w[i] < 0.0) reach = std::min(reach, theta[i] / -w[i]);
  }
  return std::max(reach, 0.0);
}

PerturbationSet perturbation_points(std::span<const double> theta, std::span<const double> w,
                                    double c, double k) {
  check_stencil_inputs(theta, w, c, k);
  PerturbationSet set = empty_set(theta, w, c, k, BoundaryRule::clip);
  auto project = [&set](double x) {
    const double y = std::clamp(x, 0.0, 1.0);
    if (y != x) set.clipped = true;
    return y;
  };
  for (std::size_t i = 0; i < theta.size(); ++i) {
    set.plus[i] = project(theta[i] + c * w[i]);
    set.minus[i] = project(theta[i] - c * w[i]);
    set.plus_plus[i] = project(theta[i] + k * c * w[i]);
    set.minus_minus[i] = project(theta[i] - k * c * w[i]);
  }
  set.degenerate = set.plus == set.plus_plus || set.minus == set.minus_minus;
  return set;
}

PerturbationSet fitted_perturbation_points(std::span<const double> theta,
                                           std::span<const double> w, double c, double k) {
  check_stencil_inputs(theta, w, c, k);
  PerturbationSet set = empty_set(theta, w, c, k, BoundaryRule::shrink);
  const Point minus_w = scaled(w, -1.0);
  set.width_plus = std::min(c, reach_along(theta, w) / k);
  set.width_minus = std::min(c, reach_along(theta, minus_w) / k);
  set.clipped = !set.symmetric();
  // Rounding in reach/k * k can overshoot the face by an ulp.
  auto on_line = [](double x) { return std::clamp(x, 0.0, 1.0); };
  for (std::size_t i = 0; i < theta.size(); ++i) {
    set.plus[i] = on_line(theta[i] + set.width_plus * w[i]);
    set.minus[i] = on_line(theta[i] - set.width_minus * w[i]);
    set.plus_plus[i] = on_line(theta[i] + k * set.width_plus * w[i]);
    set.minus_minus[i] = on_line(theta[i] - k * set.width_minus * w[i]);
  }
  set.degenerate = set.width_plus == 0.0 || set.width_minus == 0.0;
  return set;
}

PerturbationSet make_perturbation(std::span<const double> theta, std::span<const double> w,
                                  double c, double k, BoundaryRule rule) {
  return rule == BoundaryRule::shrink ? fitted_perturbation_points(theta, w, c, k)
                                      : perturbation_points(theta, w, c, k);
}

std::vector<std::size_t> random_subset(RandomStream& rng, std::size_t m) {
  if (m == 0) throw std::invalid_argument("subset size must be positive");
  std::vector<std::size_t> idx(2 * m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(idx[i], idx[i + rng.below(2 * m - i)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

PairMeans collect_pair_means(const OutcomeModel& model, std::span<const double> point_a,
                             std::span<const double> point_b, std::size_t m, RandomStream& rng,
                             Arm tag_a, Arm tag_b) {
  const PointSampler at_a = model.sampler_at(point_a);
  const PointSampler at_b = model.sampler_at(point_b);
  const std::vector<std::size_t> subset = random_subset(rng, m);

  PairMeans out;
  out.outcomes.reserve(2 * m);
  double sum_a = 0.0;
  double sum_b = 0.0;
  auto next = subset.begin();
  for (std::size_t i = 0; i < 2 * m; ++i) {
    if (next != subset.end() && *next == i) {
      ++next;
      const double y = at_a.draw(rng);
      sum_a += y;
      out.outcomes.push_back({tag_a, y});
    } else {
      const double y = at_b.draw(rng);
      sum_b += y;
      out.outcomes.push_back({tag_b, y});
    }
  }
  out.mean_a = sum_a / static_cast<double>(m);
  out.mean_b = sum_b / static_cast<double>(m);
  return out;
}

Point gradient_four_point(const FourPointMeans& means, double k, double c,
                          std::span<const double> w) {
  require_spread(k);
  require_positive_width(c);
  const double k2 = k * k;
  const double k3 = k2 * k;
  const double numer = k3 * (means.plus - means.minus) - (means.plus_plus - means.minus_minus);
  return scaled(w, numer / (2.0 * k * (k2 - 1.0) * c));
}

double value_four_point(const FourPointMeans& means, double k) {
  require_spread(k);
  const double k2 = k * k;
  return (-means.plus_plus + k2 * means.plus + k2 * means.minus - means.minus_minus) /
         (2.0 * (k2 - 1.0));
}

Point gradient_central_fd(double mean_plus, double mean_minus, double c,
                          std::span<const double> w) {
  require_positive_width(c);
  return scaled(w, (mean_plus - mean_minus) / (2.0 * c));
}

double value_central_fd(double mean_plus, double mean_minus) {
  return 0.5 * (mean_plus + mean_minus);
}

Point gradient_forward_fd(double mean_plus, double mean_center, double c,
                          std::span<const double> w) {
  require_positive_width(c);
  return scaled(w, (mean_plus - mean_center) / c);
}

PerturbationSet central_points(std::span<const double> theta, std::span<const double> w,
                               double c, BoundaryRule rule) {
  check_stencil_inputs(theta, w, c, 2.0);
  PerturbationSet set = empty_set(theta, w, c, 1.0, rule);
  if (rule == BoundaryRule::shrink) {
    const Point minus_w = scaled(w, -1.0);
    set.width_plus = std::min(c, reach_along(theta, w));
    set.width_minus = std::min(c, reach_along(theta, minus_w));
    set.clipped = !set.symmetric();
    set.degenerate = set.width_plus == 0.0 || set.width_minus == 0.0;
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double up = theta[i] + set.width_plus * w[i];
    const double down = theta[i] - set.width_minus * w[i];
    set.plus[i] = std::clamp(up, 0.0, 1.0);
    set.minus[i] = std::clamp(down, 0.0, 1.0);
    if (rule == BoundaryRule::clip && (set.plus[i] != up || set.minus[i] != down)) {
      set.clipped = true;
    }
  }
  set.plus_plus = set.plus;
  set.minus_minus = set.minus;
  return set;
}

LineFit fit_along_line(std::span<const LineSample> samples) {
  std::vector<LineSample> pooled;
  for (const LineSample& s : samples) {
    if (!(s.count > 0.0)) throw std::invalid_argument("line samples need a positive count");
    auto same = std::find_if(pooled.begin(), pooled.end(),
                             [&s](const LineSample& p) { return p.offset == s.offset; });
    if (same == pooled.end()) {
      pooled.push_back(s);
    } else {
      same->mean = (same->mean * same->count + s.mean * s.count) / (same->count + s.count);
      same->count += s.count;
    }
  }
  if (pooled.empty()) throw std::invalid_argument("fit_along_line needs at least one sample");

  LineFit fit;
  fit.distinct_offsets = pooled.size();
  const std::size_t terms = std::min<std::size_t>(pooled.size(), 3);
  // Normal equations for sum_j n_j (y_j - sum_p beta_p s_j^p)^2, augmented.
  std::array<std::array<double, 4>, 3> a{};
  for (const LineSample& s : pooled) {
    const std::array<double, 3> basis{1.0, s.offset, s.offset * s.offset};
    for (std::size_t r = 0; r < terms; ++r) {
      for (std::size_t c = 0; c < terms; ++c) a[r][c] += s.count * basis[r] * basis[c];
      a[r][3] += s.count * basis[r] * s.mean;
    }
  }
  for (std::size_t col = 0; col < terms; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < terms; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < terms; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  fit.value = a[0][3] / a[0][0];
  if (terms > 1) fit.slope = a[1][3] / a[1][1];
  return fit;
}

DirectionalEstimate four_point_estimate(const FourPointMeans& means, const PerturbationSet& set,
                                        std::size_t m1, std::size_t m2) {
  if (set.rule == BoundaryRule::clip || set.symmetric()) {
    return {gradient_four_point(means, set.spread, set.half_width, set.direction),
            value_four_point(means, set.spread)};
  }
  const double k = set.spread;
  const std::array samples{
      LineSample{set.width_plus, means.plus, static_cast<double>(m1)},
      LineSample{-set.width_minus, means.minus, static_cast<double>(m1)},
      LineSample{k * set.width_plus, means.plus_plus, static_cast<double>(m2)},
      LineSample{-k * set.width_minus, means.minus_minus, static_cast<double>(m2)},
  };
  const LineFit fit = fit_along_line(samples);
  return {scaled(set.direction, fit.slope), fit.value};
}

DirectionalEstimate central_fd_estimate(double mean_plus, double mean_minus,
                                        const PerturbationSet& set, std::size_t m) {
  if (set.rule == BoundaryRule::clip || set.symmetric()) {
    return {gradient_central_fd(mean_plus, mean_minus, set.half_width, set.direction),
            value_central_fd(mean_plus, mean_minus)};
  }
  const std::array samples{
      LineSample{set.width_plus, mean_plus, static_cast<double>(m)},
      LineSample{-set.width_minus, mean_minus, static_cast<double>(m)},
  };
  const LineFit fit = fit_along_line(samples);
  return {scaled(set.direction, fit.slope), fit.value};
}

IterationEstimates estimate_four_point(const OutcomeModel& model, const PerturbationSet& points,
                                       std::size_t m1, std::size_t m2, RandomStream& rng) {
  PairMeans inner = collect_pair_means(model, points.plus, points.minus, m1, rng, Arm::plus,
                                       Arm::minus);
  PairMeans outer = collect_pair_means(model, points.plus_plus, points.minus_minus, m2, rng,
                                       Arm::plus_plus, Arm::minus_minus);
  IterationEstimates est;
  est.means = {inner.mean_a, inner.mean_b, outer.mean_a, outer.mean_b};
  DirectionalEstimate d = four_point_estimate(est.means, points, m1, m2);
  est.gradient = std::move(d.gradient);
  est.mu_hat = d.value;
  est.draws_used = 2 * (m1 + m2);
  est.outcomes = std::move(inner.outcomes);
  est.outcomes.insert(est.outcomes.end(), outer.outcomes.begin(), outer.outcomes.end());
  return est;
}

}  // namespace zoab
