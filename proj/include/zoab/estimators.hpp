#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zoab/outcome_models.hpp"
#include "zoab/random_stream.hpp"

namespace zoab {

/// Which perturbation point an outcome was drawn at.
enum class Arm : unsigned char { plus, minus, plus_plus, minus_minus, center };

struct LabeledOutcome {
  Arm arm;
  double value;
};

/// Uniform direction on the unit sphere in R^dim, by normalizing a standard
/// Gaussian vector. Throws std::domain_error for dim = 0.
Point sample_unit_sphere(RandomStream& rng, std::size_t dim);

/// How perturbation points that would leave [0,1]^d are brought back.
enum class BoundaryRule {
  /// Keep every point on the line theta + s*w: each side's inner width
  /// shrinks to min(c, reach / k) so the outer point stays in the box.
  shrink,
  /// Clip each point componentwise; estimates still use the requested c.
  clip,
};

std::string_view to_string(BoundaryRule rule);
std::optional<BoundaryRule> parse_boundary_rule(std::string_view name);

/// The four points theta +- c*w and theta +- k*c*w after projection.
struct PerturbationSet {
  Point plus;
  Point minus;
  Point plus_plus;
  Point minus_minus;
  Point direction;
  /// Requested half width c.
  double half_width = 0.0;
  double spread = 0.0;
  /// Inner widths actually used along +w and -w. Equal to half_width unless
  /// the shrink rule narrowed a side; outer widths are spread times these.
  double width_plus = 0.0;
  double width_minus = 0.0;
  BoundaryRule rule = BoundaryRule::clip;
  /// Some coordinate of some point was moved by the projection.
  bool clipped = false;
  /// Projection merged points: plus == plus_plus or minus == minus_minus.
  bool degenerate = false;

  /// Offsets are the requested +-c, +-k*c, so Eqs. for symmetric stencils
  /// apply verbatim.
  bool symmetric() const { return width_plus == half_width && width_minus == half_width; }
};

/// Largest s >= 0 with theta + s*w in [0,1]^d (infinite for w = 0).
double reach_along(std::span<const double> theta, std::span<const double> w);

/// Clip rule. Throws std::invalid_argument unless c > 0 and k > 1, and
/// std::domain_error unless theta is in [0,1]^d with |w| = |theta|.
PerturbationSet perturbation_points(std::span<const double> theta, std::span<const double> w,
                                    double c, double k);

/// Shrink rule; same preconditions as perturbation_points.
PerturbationSet fitted_perturbation_points(std::span<const double> theta,
                                           std::span<const double> w, double c, double k);

PerturbationSet make_perturbation(std::span<const double> theta, std::span<const double> w,
                                  double c, double k, BoundaryRule rule);

/// The two-point stencil theta +- c*w. Spread is 1 and the outer points
/// repeat the inner ones; under the shrink rule each width is
/// min(c, reach).
PerturbationSet central_points(std::span<const double> theta, std::span<const double> w,
                               double c, BoundaryRule rule);

/// Uniform `m`-element subset of the 2m positions {0, ..., 2m-1} (partial
/// Fisher-Yates), returned in increasing order.
std::vector<std::size_t> random_subset(RandomStream& rng, std::size_t m);

struct PairMeans {
  double mean_a = 0.0;
  double mean_b = 0.0;
  /// All 2m draws in the order they were taken.
  std::vector<LabeledOutcome> outcomes;
};

/// Draws 2m outcomes. Positions in a random m-subset go to `point_a`, the
/// rest to `point_b`; returns both sample means and the raw draws.
PairMeans collect_pair_means(const OutcomeModel& model, std::span<const double> point_a,
                             std::span<const double> point_b, std::size_t m, RandomStream& rng,
                             Arm tag_a = Arm::plus, Arm tag_b = Arm::minus);

/// Sample means at the four perturbation points.
struct FourPointMeans {
  double plus = 0.0;
  double minus = 0.0;
  double plus_plus = 0.0;
  double minus_minus = 0.0;
};

/// Gradient estimate with O(c^4) deterministic error:
///   (-mu(++) + k^3 mu(+) - k^3 mu(-) + mu(--)) / (2k(k^2-1)c) * w.
Point gradient_four_point(const FourPointMeans& means, double k, double c,
                          std::span<const double> w);

/// Value estimate at theta with O(c^3) deterministic error:
///   (-mu(++) + k^2 mu(+) + k^2 mu(-) - mu(--)) / (2(k^2-1)).
double value_four_point(const FourPointMeans& means, double k);

/// Two-point central difference (mu(+) - mu(-)) / (2c) * w.
Point gradient_central_fd(double mean_plus, double mean_minus, double c,
                          std::span<const double> w);
double value_central_fd(double mean_plus, double mean_minus);

/// Two-point forward difference (mu(+) - mu(theta)) / c * w.
Point gradient_forward_fd(double mean_plus, double mean_center, double c,
                          std::span<const double> w);

/// Sample mean of `count` draws taken at offset s along the direction.
struct LineSample {
  double offset;
  double mean;
  double count;
};

/// Value and directional slope at offset 0 of the count-weighted
/// least-squares polynomial through the samples: quadratic for three or more
/// distinct offsets, linear for two, constant for one. Samples sharing an
/// offset are pooled.
struct LineFit {
  double value = 0.0;
  double slope = 0.0;
  std::size_t distinct_offsets = 0;
};
LineFit fit_along_line(std::span<const LineSample> samples);

/// Gradient and value from four means at a perturbation set. Symmetric sets
/// use gradient_four_point / value_four_point; shrunk sets use
/// fit_along_line with m1 draws per inner point and m2 per outer point.
struct DirectionalEstimate {
  Point gradient;
  double value = 0.0;
};
DirectionalEstimate four_point_estimate(const FourPointMeans& means, const PerturbationSet& set,
                                        std::size_t m1, std::size_t m2);

/// Central-difference counterpart using only the inner pair.
DirectionalEstimate central_fd_estimate(double mean_plus, double mean_minus,
                                        const PerturbationSet& set, std::size_t m);

/// Everything one four-point iteration produces.
struct IterationEstimates {
  FourPointMeans means;
  Point gradient;
  double mu_hat = 0.0;
  std::size_t draws_used = 0;
  /// Inner pair draws first (2 m1), then the outer pair (2 m2).
  std::vector<LabeledOutcome> outcomes;
};

/// One full four-point iteration at the given perturbation set.
IterationEstimates estimate_four_point(const OutcomeModel& model, const PerturbationSet& points,
                                       std::size_t m1, std::size_t m2, RandomStream& rng);

}  // namespace zoab
