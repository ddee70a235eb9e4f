#include "zoab/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zoab/errors.hpp"
#include "zoab/harness.hpp"
#include "zoab/inference.hpp"
#include "zoab/optimizer.hpp"
#include "zoab/random_stream.hpp"

namespace zoab {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kControlStream = 0x636f6e74726f6cULL;

// Four-point must look unbiased and central FD biased for a pass verdict.
constexpr double kUnbiasedBound = 0.3;
constexpr double kBiasedBound = -1.0;

std::string sig6(double x) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(6) << x;
  return s.str();
}

std::string sig6(const Point& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) out += (i > 0 ? ", " : "") + sig6(p[i]);
  return out + ")";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << contents;
  f.flush();
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::optional<unsigned> env_threads(std::ostream& err) {
  const char* v = std::getenv("ZOAB_THREADS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0') {
    err << "warning: ignoring ZOAB_THREADS='" << v << "'\n";
    return std::nullopt;
  }
  return static_cast<unsigned>(n);
}

ReplicationOptions options_for(const ExperimentConfig& config) {
  ReplicationOptions o;
  o.replications = config.harness.replications;
  o.master_seed = config.harness.master_seed;
  o.threads = config.harness.threads;
  o.histogram = config.harness.histogram;
  o.level = config.harness.level;
  return o;
}

std::string records_csv(std::span<const ReplicationRecord> records, std::size_t dim) {
  std::string out = "rep_id,seed";
  for (std::size_t i = 0; i < dim; ++i) out += ",theta_hat_" + std::to_string(i);
  out += ",mu_hat,mu_true,sigma_hat,ci_lo,ci_hi,covered,normalized_stat,draws_used\n";
  for (const auto& r : records) {
    out += std::to_string(r.rep_id) + ',' + std::to_string(r.seed);
    for (double x : r.theta_hat) out += ',' + format_number(x);
    out += ',' + format_number(r.mu_hat) + ',' + format_number(r.mu_true_at_theta_hat) + ',' +
           format_number(r.sigma_hat) + ',' + format_number(r.ci_lo) + ',' +
           format_number(r.ci_hi) + ',' + (r.covered ? "1" : "0") + ',' +
           format_number(r.normalized_stat) + ',' + std::to_string(r.draws_used) + '\n';
  }
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& trajectory, std::size_t dim) {
  std::string out = "t";
  for (std::size_t i = 0; i < dim; ++i) out += ",theta_" + std::to_string(i);
  out += ",mu_hat";
  for (std::size_t i = 0; i < dim; ++i) out += ",gradient_" + std::to_string(i);
  for (std::size_t i = 0; i < dim; ++i) out += ",theta_next_" + std::to_string(i);
  out += '\n';
  for (const auto& p : trajectory) {
    out += std::to_string(p.t);
    for (double x : p.theta) out += ',' + format_number(x);
    out += ',' + format_number(p.mu_hat);
    for (double x : p.gradient) out += ',' + format_number(x);
    for (double x : p.theta_next) out += ',' + format_number(x);
    out += '\n';
  }
  return out;
}

Json config_json(const ExperimentConfig& c) {
  const ModelParams& p = c.model.params;
  const AlgoConfig& a = c.algorithm;
  Json model = {{"family", std::string(to_string(c.model.family))}, {"dim", c.model.dim}};
  switch (c.model.family) {
    case ModelFamily::logistic:
      model["logistic_center"] = p.logistic_center;
      model["logistic_offset"] = p.logistic_offset;
      break;
    case ModelFamily::gaussian_constant:
      model["constant_mean"] = p.constant_mean;
      model["noise_sd"] = p.noise_sd;
      break;
    default:
      model["a"] = p.quadratic.a;
      model["b"] = p.quadratic.b;
      model["c"] = p.quadratic.c;
      if (c.model.family == ModelFamily::pareto_quadratic) model["pareto_shape"] = p.pareto_shape;
      if (c.model.family == ModelFamily::t_noise_quadratic) model["t_dof"] = p.t_dof;
      if (c.model.family == ModelFamily::gaussian_quadratic) model["noise_sd"] = p.noise_sd;
  }
  Json algorithm = {{"T", a.total_budget},   {"k", a.k},       {"m", a.m},
                    {"m1", a.m1},            {"m2", a.m2},     {"nu", a.nu},
                    {"c1", a.c1},            {"c0", a.c0},     {"beta", a.beta},
                    {"theta0", a.theta0},    {"boundary", std::string(to_string(a.boundary))},
                    {"iterations", a.iterations()}};
  Json metadata = Json::object();
  if (c.metadata.q) metadata["q"] = *c.metadata.q;
  if (c.metadata.N) metadata["N"] = *c.metadata.N;
  if (!c.metadata.label.empty()) metadata["label"] = c.metadata.label;
  return {{"model", model}, {"algorithm", algorithm}, {"metadata", metadata}};
}

Json summary_json(const ReplicationSummary& s, const ExperimentConfig& config) {
  Json j;
  j["method"] = std::string(to_string(s.method));
  j["R"] = s.replications;
  j["master_seed"] = s.master_seed;
  j["coverage_rate"] = s.coverage_rate;
  j["level"] = config.harness.level;
  j["stat_mean"] = s.stat_mean;
  j["stat_sd"] = s.stat_sd ? Json(*s.stat_sd) : Json(nullptr);
  j["ks_statistic"] = s.ks_statistic ? Json(*s.ks_statistic) : Json(nullptr);
  Json bins = Json::array();
  for (const auto& b : s.histogram.bins) {
    bins.push_back({{"bin_lo", b.lo}, {"bin_hi", b.hi}, {"count", b.count}});
  }
  j["histogram"] = {{"bins", bins},
                    {"underflow", s.histogram.underflow},
                    {"overflow", s.histogram.overflow}};
  j["config"] = config_json(config);
  const ModelFamily f = config.model.family;
  if (f == ModelFamily::pareto_quadratic || f == ModelFamily::t_noise_quadratic) {
    j["notes"] = {"T and R for this family are artifact defaults (T=1e6, R=500), not published "
                  "values"};
  }
  return j;
}

template <typename Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

void apply_paper_scale(ExperimentConfig& config) {
  config.algorithm.total_budget = 10'000'000;
  if (config.model.family == ModelFamily::bernoulli_quadratic) config.harness.replications = 1000;
  if (config.model.family == ModelFamily::logistic) config.harness.replications = 200;
}

ExperimentConfig resolve_config(const std::string& path, const CliOverrides& overrides) {
  ExperimentConfig config = load_config(path);
  if (overrides.paper_scale) apply_paper_scale(config);
  if (overrides.seed) {
    config.algorithm.seed = *overrides.seed;
    config.harness.master_seed = *overrides.seed;
  }
  if (overrides.method) config.method = *overrides.method;
  if (overrides.T) config.algorithm.total_budget = *overrides.T;
  if (overrides.R) config.harness.replications = *overrides.R;
  if (overrides.threads) config.harness.threads = *overrides.threads;
  if (overrides.records_csv) config.harness.records_csv = *overrides.records_csv;
  if (overrides.summary_json) config.harness.summary_json = *overrides.summary_json;
  if (overrides.compare_json) config.harness.compare_json = *overrides.compare_json;
  validate(config);
  return config;
}

int cmd_run(const std::string& path, const CliOverrides& overrides, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = resolve_config(path, overrides);
    const OutcomeModel model = build_model(config);
    const RunResult run = run_method(model, config.algorithm, config.method);
    const double s = sigma_hat(run.tail_outcomes);
    const ConfidenceInterval ci = confidence_interval(run.mu_hat, s, config.algorithm.k,
                                                      run.draws_used, config.harness.level);
    out << "method = " << to_string(config.method) << '\n'
        << "iterations = " << run.iterations << '\n'
        << "draws_used = " << run.draws_used << '\n'
        << "theta_hat = " << sig6(run.theta_hat) << '\n'
        << "mu_hat = " << sig6(run.mu_hat) << '\n'
        << "sigma_hat = " << sig6(s) << '\n'
        << "ci_" << sig6(config.harness.level * 100) << " = [" << sig6(ci.lower()) << ", "
        << sig6(ci.upper()) << "]\n"
        << "mu_true_at_theta_hat = " << sig6(model.true_mean(run.theta_hat)) << '\n';
    if (config.control) {
      const ControlModel control = build_control(*config.control);
      RandomStream rng(derive_seed(config.algorithm.seed, kControlStream));
      std::vector<double> outcomes(config.control->n);
      for (double& y : outcomes) y = control.draw(rng);
      const AteEstimate ate = ate_contrast(run, s, config.algorithm.k, outcomes);
      const double z = z_quantile(config.harness.level);
      out << "control_mean = " << sig6(ate.control_mean) << '\n'
          << "ate = " << sig6(ate.difference) << '\n'
          << "ate_se = " << sig6(ate.se_difference) << '\n'
          << "ate_ci = [" << sig6(ate.difference - z * ate.se_difference) << ", "
          << sig6(ate.difference + z * ate.se_difference) << "]\n";
    }
    if (!config.trajectory_csv.empty()) {
      write_file(config.trajectory_csv, trajectory_csv(*run.trajectory, config.model.dim));
    }
    return kExitOk;
  });
}

int cmd_replicate(const std::string& path, const CliOverrides& overrides, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = resolve_config(path, overrides);
    const OutcomeModel model = build_model(config);
    const ReplicationResult result =
        replicate(model, config.algorithm, config.method, options_for(config));
    write_file(config.harness.records_csv, records_csv(result.records, config.model.dim));
    write_file(config.harness.summary_json, summary_json(result.summary, config).dump(2) + '\n');
    const ReplicationSummary& s = result.summary;
    out << to_string(s.method) << ": R = " << s.replications
        << ", coverage = " << sig6(s.coverage_rate) << ", stat_mean = " << sig6(s.stat_mean)
        << ", stat_sd = " << (s.stat_sd ? sig6(*s.stat_sd) : std::string("n/a")) << '\n';
    return kExitOk;
  });
}

int cmd_compare(const std::string& path, const CliOverrides& overrides, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = resolve_config(path, overrides);
    const OutcomeModel model = build_model(config);
    const ReplicationOptions options = options_for(config);
    const ReplicationResult fp = replicate(model, config.algorithm, Method::four_point, options);
    const ReplicationResult fd = replicate(model, config.algorithm, Method::central_fd, options);

    auto side = [](const ReplicationResult& r) {
      const ReplicationSummary& s = r.summary;
      return Json{{"stat_mean", s.stat_mean},
                  {"stat_sd", s.stat_sd ? Json(*s.stat_sd) : Json(nullptr)},
                  {"coverage_rate", s.coverage_rate},
                  {"draws_used", r.records.front().draws_used}};
    };
    const double fp_mean = fp.summary.stat_mean;
    const double fd_mean = fd.summary.stat_mean;
    const bool unbiased = std::abs(fp_mean) < kUnbiasedBound;
    const bool biased = fd_mean < kBiasedBound;
    const std::string verdict =
        std::string("four_point ") + (unbiased ? "unbiased" : "NOT unbiased") + " (|mean| " +
        sig6(std::abs(fp_mean)) + (unbiased ? " < " : " >= ") + sig6(kUnbiasedBound) +
        "); central_fd " + (biased ? "biased" : "NOT biased") + " (mean " + sig6(fd_mean) +
        (biased ? " < " : " >= ") + sig6(kBiasedBound) + ")";

    Json j;
    j["R"] = config.harness.replications;
    j["master_seed"] = config.harness.master_seed;
    j["four_point"] = side(fp);
    j["central_fd"] = side(fd);
    j["verdict"] = verdict;
    j["config"] = config_json(config);
    write_file(config.harness.compare_json, j.dump(2) + '\n');
    out << "verdict: " << verdict << '\n';
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Four-point zeroth-order optimization for adaptive A/B tests"};
  app.require_subcommand(1);

  std::string path;
  CliOverrides o;
  std::string method;
  std::uint64_t seed = 0;
  std::uint64_t T = 0;
  std::size_t R = 0;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", path, "Experiment config file")->required();
    sub->add_option("--seed", seed, "Seed for run and master seed for replications");
    sub->add_option("--method", method, "four_point or central_fd");
    sub->add_option("--T", T, "Treatment budget");
    sub->add_option("--R", R, "Replications");
    sub->add_option("--threads", threads, "Worker threads (0 = auto)");
    sub->add_flag("--paper-scale", o.paper_scale, "Use full-size budgets");
  };
  CLI::App* run = app.add_subcommand("run", "Single optimization run");
  CLI::App* rep = app.add_subcommand("replicate", "Monte Carlo replications");
  CLI::App* cmp = app.add_subcommand("compare", "four_point against central_fd");
  for (CLI::App* sub : {run, rep, cmp}) add_common(sub);
  std::string records;
  std::string summary;
  std::string compare;
  rep->add_option("--records", records, "Records CSV path");
  rep->add_option("--summary", summary, "Summary JSON path");
  cmp->add_option("--output", compare, "Comparison JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  CLI::App* active = app.get_subcommands().front();
  if (active->count("--seed") > 0) o.seed = seed;
  if (active->count("--T") > 0) o.T = T;
  if (active->count("--R") > 0) o.R = R;
  if (active->count("--threads") > 0) {
    o.threads = threads;
  } else {
    o.threads = env_threads(err);
  }
  if (active->count("--method") > 0) {
    o.method = parse_method(method);
    if (!o.method) {
      err << "config error: algorithm.method: unknown method '" << method << "'\n";
      return kExitConfig;
    }
  }
  if (!records.empty()) o.records_csv = records;
  if (!summary.empty()) o.summary_json = summary;
  if (!compare.empty()) o.compare_json = compare;

  if (active == run) return cmd_run(path, o, out, err);
  if (active == rep) return cmd_replicate(path, o, out, err);
  return cmd_compare(path, o, out, err);
}

}  // namespace zoab
