#include "zoab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "zoab/random_stream.hpp"

namespace zoab {
namespace {

unsigned resolve_threads(unsigned requested, std::size_t work) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

struct MeanSd {
  double mean = 0.0;
  std::optional<double> sd;
};

MeanSd mean_sd(std::span<const double> xs) {
  MeanSd out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_against_normal(std::span<const double> stats) {
  if (stats.size() < 2) throw std::invalid_argument("ks_against_normal needs at least two values");
  std::vector<double> sorted(stats.begin(), stats.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::size_t Histogram::total() const {
  std::size_t n = underflow + overflow;
  for (const auto& b : bins) n += b.count;
  return n;
}

Histogram histogram(std::span<const double> values, double bin_width, double lo, double hi) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw std::invalid_argument("histogram bin width must be positive");
  }
  if (!(lo < hi)) throw std::invalid_argument("histogram range must satisfy lo < hi");
  Histogram h;
  const auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));
  h.bins.reserve(nbins);
  for (std::size_t i = 0; i < nbins; ++i) {
    const double a = lo + static_cast<double>(i) * bin_width;
    h.bins.push_back({a, std::min(hi, a + bin_width), 0});
  }
  for (double v : values) {
    if (v < lo || std::isnan(v)) {
      ++h.underflow;
    } else if (v >= hi) {
      ++h.overflow;
    } else {
      auto i = static_cast<std::size_t>((v - lo) / bin_width);
      i = std::min(i, nbins - 1);
      ++h.bins[i].count;
    }
  }
  return h;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = resolve_threads(threads, count);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw ReplicationError(i, e.what());
    } catch (...) {
      throw ReplicationError(i, "unknown error");
    }
  }
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep_id) {
  return derive_seed(master_seed, rep_id);
}

ReplicationRecord replicate_once(const OutcomeModel& model, const AlgoConfig& cfg, Method method,
                                 std::size_t rep_id, std::uint64_t master_seed, double level) {
  AlgoConfig run_cfg = cfg;
  run_cfg.seed = replication_seed(master_seed, rep_id);
  run_cfg.record_trajectory = false;
  const RunResult run = run_method(model, run_cfg, method);

  ReplicationRecord rec;
  rec.rep_id = rep_id;
  rec.seed = run_cfg.seed;
  rec.theta_hat = run.theta_hat;
  rec.mu_hat = run.mu_hat;
  rec.mu_true_at_theta_hat = model.true_mean(run.theta_hat);
  rec.sigma_hat = sigma_hat(run.tail_outcomes);
  const ConfidenceInterval ci =
      confidence_interval(run.mu_hat, rec.sigma_hat, cfg.k, run.draws_used, level);
  rec.ci_lo = ci.lower();
  rec.ci_hi = ci.upper();
  rec.covered = rec.ci_lo <= rec.mu_true_at_theta_hat && rec.mu_true_at_theta_hat <= rec.ci_hi;
  const std::optional<Point> best = model.optimum();
  const double sigma_star = model.true_sd(best ? *best : run.theta_hat);
  rec.normalized_stat =
      normalized_statistic(run.mu_hat, rec.mu_true_at_theta_hat, sigma_star, cfg.k, run.draws_used);
  rec.draws_used = run.draws_used;
  return rec;
}

ReplicationSummary summarize(std::span<const ReplicationRecord> records, Method method,
                             const ReplicationOptions& options, const AlgoConfig& cfg,
                             ModelFamily family) {
  ReplicationSummary s;
  s.method = method;
  s.replications = records.size();
  s.config = cfg;
  s.model_family = family;
  s.master_seed = options.master_seed;

  std::vector<double> stats;
  stats.reserve(records.size());
  std::size_t covered = 0;
  for (const auto& r : records) {
    stats.push_back(r.normalized_stat);
    if (r.covered) ++covered;
  }
  if (!records.empty()) {
    s.coverage_rate = static_cast<double>(covered) / static_cast<double>(records.size());
  }
  const MeanSd ms = mean_sd(stats);
  s.stat_mean = ms.mean;
  s.stat_sd = ms.sd;
  if (stats.size() >= 2) s.ks_statistic = ks_against_normal(stats);
  s.histogram = histogram(stats, options.histogram.bin_width, options.histogram.lo,
                          options.histogram.hi);
  return s;
}

ReplicationResult replicate(const OutcomeModel& model, const AlgoConfig& cfg, Method method,
                            const ReplicationOptions& options) {
  if (options.replications == 0) throw std::invalid_argument("replicate needs R >= 1");
  cfg.validate();
  ReplicationResult result;
  result.records.resize(options.replications);
  parallel_for(options.replications, options.threads, [&](std::size_t i) {
    result.records[i] = replicate_once(model, cfg, method, i, options.master_seed, options.level);
  });
  result.summary = summarize(result.records, method, options, cfg, model.family());
  return result;
}

ConvergenceReport convergence_diagnostic(const OutcomeModel& model, const AlgoConfig& cfg,
                                         Method method, std::size_t replications,
                                         std::span<const std::size_t> checkpoints,
                                         std::uint64_t master_seed, unsigned threads) {
  const std::optional<Point> best = model.optimum();
  if (!best) throw std::invalid_argument("convergence_diagnostic needs a model with a known optimum");
  if (replications == 0) throw std::invalid_argument("convergence_diagnostic needs R >= 1");
  if (checkpoints.empty()) throw std::invalid_argument("convergence_diagnostic needs checkpoints");
  const std::size_t last = *std::max_element(checkpoints.begin(), checkpoints.end());
  if (*std::min_element(checkpoints.begin(), checkpoints.end()) == 0) {
    throw std::invalid_argument("checkpoints are 1-based iteration counts");
  }
  AlgoConfig run_cfg = cfg;
  run_cfg.record_trajectory = true;
  run_cfg.total_budget = std::max<std::uint64_t>(cfg.total_budget, 2 * cfg.m * last);
  run_cfg.validate();

  std::vector<std::vector<double>> errors(replications, std::vector<double>(checkpoints.size()));
  parallel_for(replications, threads, [&](std::size_t r) {
    AlgoConfig rc = run_cfg;
    rc.seed = replication_seed(master_seed, r);
    const RunResult run = run_method(model, rc, method);
    for (std::size_t j = 0; j < checkpoints.size(); ++j) {
      const Point& theta = (*run.trajectory)[checkpoints[j] - 1].theta_next;
      double sq = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        sq += (theta[i] - (*best)[i]) * (theta[i] - (*best)[i]);
      }
      errors[r][j] = sq;
    }
  });

  ConvergenceReport report;
  report.replications = replications;
  for (std::size_t j = 0; j < checkpoints.size(); ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < replications; ++r) sum += errors[r][j];
    report.points.push_back({checkpoints[j], sum / static_cast<double>(replications)});
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : report.points) {
    if (p.mean_sq_error > 0.0) {
      xs.push_back(std::log(static_cast<double>(p.t)));
      ys.push_back(std::log(p.mean_sq_error));
    }
  }
  if (xs.size() >= 2 && xs.size() == report.points.size()) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx > 0.0) {
      const double slope = sxy / sxx;
      report.slope = slope;
      if (replications >= 2 && xs.size() >= 3) {
        double rss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const double e = ys[i] - (my + slope * (xs[i] - mx));
          rss += e * e;
        }
        report.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
      }
    }
  }
  return report;
}

}  // namespace zoab
