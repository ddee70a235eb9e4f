#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zoab/inference.hpp"
#include "zoab/optimizer.hpp"
#include "zoab/outcome_models.hpp"

namespace zoab {

/// Standard normal CDF.
double normal_cdf(double x);

/// Kolmogorov-Smirnov distance between the empirical CDF of `stats` and the
/// standard normal CDF. Needs two or more values.
double ks_against_normal(std::span<const double> stats);

struct HistogramBin {
  double lo;
  double hi;
  std::size_t count;
};

/// Bins [lo + i w, lo + (i+1) w) covering [lo, hi); the last bin is
/// truncated at hi. Values below lo or at/above hi land in the overflow
/// counters.
struct Histogram {
  std::vector<HistogramBin> bins;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  std::size_t total() const;
};

struct HistogramSpec {
  double bin_width = 0.25;
  double lo = -4.0;
  double hi = 4.0;

  bool operator==(const HistogramSpec&) const = default;
};

/// Throws std::invalid_argument unless bin_width > 0 and lo < hi.
Histogram histogram(std::span<const double> values, double bin_width, double lo, double hi);

struct ReplicationRecord {
  std::size_t rep_id = 0;
  std::uint64_t seed = 0;
  Point theta_hat;
  double mu_hat = 0.0;
  double mu_true_at_theta_hat = 0.0;
  double sigma_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool covered = false;
  double normalized_stat = 0.0;
  std::uint64_t draws_used = 0;

  bool operator==(const ReplicationRecord&) const = default;
};

struct ReplicationOptions {
  std::size_t replications = 1000;
  std::uint64_t master_seed = 1;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  HistogramSpec histogram{};
  double level = 0.95;
};

struct ReplicationSummary {
  Method method = Method::four_point;
  std::size_t replications = 0;
  double coverage_rate = 0.0;
  double stat_mean = 0.0;
  /// Absent for a single replication.
  std::optional<double> stat_sd;
  std::optional<double> ks_statistic;
  Histogram histogram;
  /// Configuration echo.
  AlgoConfig config;
  ModelFamily model_family = ModelFamily::bernoulli_quadratic;
  std::uint64_t master_seed = 0;
};

struct ReplicationResult {
  ReplicationSummary summary;
  std::vector<ReplicationRecord> records;
};

/// A replication failed; `rep_id()` names the lowest failing replication.
class ReplicationError : public std::runtime_error {
 public:
  ReplicationError(std::size_t rep_id, const std::string& what)
      : std::runtime_error("replication " + std::to_string(rep_id) + ": " + what),
        rep_id_(rep_id) {}
  std::size_t rep_id() const noexcept { return rep_id_; }

 private:
  std::size_t rep_id_;
};

/// Runs `fn(i)` for i in [0, count) on up to `threads` workers. Exceptions
/// are collected per index and the one with the lowest index is rethrown as
/// ReplicationError.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Seed of replication `rep_id`; see derive_seed.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep_id);

/// One replication: run, estimate sigma from the tail, build the interval
/// and the normalized statistic against the model's true mean.
ReplicationRecord replicate_once(const OutcomeModel& model, const AlgoConfig& cfg, Method method,
                                 std::size_t rep_id, std::uint64_t master_seed, double level = 0.95);

/// Aggregates records (in rep_id order) into a summary.
ReplicationSummary summarize(std::span<const ReplicationRecord> records, Method method,
                             const ReplicationOptions& options, const AlgoConfig& cfg,
                             ModelFamily family);

/// R independent replications with seeds derived from (master_seed, rep_id).
/// The result does not depend on the thread count.
ReplicationResult replicate(const OutcomeModel& model, const AlgoConfig& cfg, Method method,
                            const ReplicationOptions& options);

struct ConvergencePoint {
  std::size_t t;
  double mean_sq_error;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  /// Least-squares slope of log mean_sq_error on log t.
  std::optional<double> slope;
  /// Standard error of the slope; needs R >= 2 and three or more checkpoints.
  std::optional<double> slope_stderr;
  std::size_t replications = 0;
};

/// Monte Carlo estimate of E|theta^t - theta*|^2 at each checkpoint
/// (iteration counts). Needs a model with a known optimum and a budget
/// covering the largest checkpoint.
ConvergenceReport convergence_diagnostic(const OutcomeModel& model, const AlgoConfig& cfg,
                                         Method method, std::size_t replications,
                                         std::span<const std::size_t> checkpoints,
                                         std::uint64_t master_seed, unsigned threads = 0);

}  // namespace zoab
