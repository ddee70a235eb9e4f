#include "zoab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "zoab/errors.hpp"
#include "zoab/inference.hpp"

namespace zoab {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  std::size_t line;
};

using Section = std::map<std::string, Entry, std::less<>>;

// Removes entries as they are read so leftovers can be reported as unknown.
class Reader {
 public:
  Reader(std::string name, Section entries) : name_(std::move(name)), entries_(std::move(entries)) {}

  std::string key(std::string_view k) const { return name_ + "." + std::string(k); }

  std::optional<std::string> take(std::string_view k) {
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    std::string v = std::move(it->second.value);
    entries_.erase(it);
    return v;
  }

  std::string require(std::string_view k) {
    auto v = take(k);
    if (!v) throw ConfigError(key(k), "required key is missing");
    return *v;
  }

  void number(std::string_view k, double& out) {
    if (auto v = take(k)) out = parse_double(k, *v);
  }

  template <typename Int>
  void integer(std::string_view k, Int& out) {
    if (auto v = take(k)) out = parse_integer<Int>(k, *v);
  }

  void flag(std::string_view k, bool& out) {
    auto v = take(k);
    if (!v) return;
    if (*v == "true") {
      out = true;
    } else if (*v == "false") {
      out = false;
    } else {
      throw ConfigError(key(k), "expected true or false, got '" + *v + "'");
    }
  }

  void text(std::string_view k, std::string& out) {
    if (auto v = take(k)) out = std::move(*v);
  }

  double parse_double(std::string_view k, std::string_view v) const {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(x)) {
      throw ConfigError(key(k), "expected a number, got '" + std::string(v) + "'");
    }
    return x;
  }

  // Accepts plain integers and exact scientific forms such as 1e6.
  template <typename Int>
  Int parse_integer(std::string_view k, std::string_view v) const {
    Int n{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec == std::errc{} && ptr == v.data() + v.size()) return n;
    double x = 0.0;
    const auto [p2, e2] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (e2 == std::errc{} && p2 == v.data() + v.size() && x >= 0.0 && x <= 9007199254740992.0 &&
        std::floor(x) == x && x <= static_cast<double>(std::numeric_limits<Int>::max())) {
      return static_cast<Int>(x);
    }
    throw ConfigError(key(k), "expected a non-negative integer, got '" + std::string(v) + "'");
  }

  std::vector<std::string_view> split_list(std::string_view v) const {
    std::vector<std::string_view> items;
    if (trim(v).empty()) return items;
    std::size_t start = 0;
    while (true) {
      const auto comma = v.find(',', start);
      items.push_back(trim(v.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return items;
  }

  void finish() const {
    if (!entries_.empty()) {
      const auto& [k, e] = *entries_.begin();
      throw ConfigError(key(k), "unknown key (line " + std::to_string(e.line) + ")");
    }
  }

 private:
  std::string name_;
  Section entries_;
};

const char* const kSections[] = {"model", "algorithm", "harness", "metadata", "control"};

std::map<std::string, Section, std::less<>> split_sections(std::string_view text) {
  std::map<std::string, Section, std::less<>> sections;
  Section* current = nullptr;
  std::string current_name;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("file", "malformed section header" + where);
      current_name = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const char* s : kSections) known = known || current_name == s;
      if (!known) throw ConfigError(current_name, "unknown section" + where);
      if (sections.contains(current_name)) {
        throw ConfigError(current_name, "section appears twice" + where);
      }
      current = &sections[current_name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("file", "expected key = value" + where);
    const std::string key(trim(line.substr(0, eq)));
    if (current == nullptr) throw ConfigError(key, "key outside any section" + where);
    if (key.empty()) throw ConfigError(current_name, "empty key" + where);
    if (current->contains(key)) {
      throw ConfigError(current_name + "." + key, "duplicate key" + where);
    }
    current->emplace(key, Entry{std::string(trim(line.substr(eq + 1))), line_no});
  }
  return sections;
}

Reader section_reader(std::map<std::string, Section, std::less<>>& sections, const char* name) {
  auto it = sections.find(name);
  if (it == sections.end()) return Reader(name, {});
  return Reader(name, std::move(it->second));
}

void read_model(Reader& r, ModelSection& model) {
  const std::string family = r.require("family");
  const auto parsed = parse_model_family(family);
  if (!parsed) throw ConfigError(r.key("family"), "unknown family '" + family + "'");
  model.family = *parsed;
  model.dim = model.family == ModelFamily::logistic ? 6 : 1;
  r.integer("dim", model.dim);
  ModelParams& p = model.params;
  r.number("a", p.quadratic.a);
  r.number("b", p.quadratic.b);
  r.number("c", p.quadratic.c);
  r.number("pareto_shape", p.pareto_shape);
  r.number("t_dof", p.t_dof);
  r.number("noise_sd", p.noise_sd);
  r.number("constant_mean", p.constant_mean);
  r.number("logistic_center", p.logistic_center);
  r.number("logistic_offset", p.logistic_offset);
  r.finish();
}

void read_algorithm(Reader& r, ExperimentConfig& config) {
  AlgoConfig& a = config.algorithm;
  a.dim = config.model.dim;
  a.total_budget = r.parse_integer<std::uint64_t>("T", r.require("T"));
  if (auto v = r.take("method")) {
    const auto m = parse_method(*v);
    if (!m) throw ConfigError(r.key("method"), "unknown method '" + *v + "'");
    config.method = *m;
  }
  r.number("k", a.k);
  r.integer("m", a.m);
  const auto m1 = r.take("m1");
  const auto m2 = r.take("m2");
  if (m1 || m2) {
    if (m1) a.m1 = r.parse_integer<std::size_t>("m1", *m1);
    if (m2) a.m2 = r.parse_integer<std::size_t>("m2", *m2);
    if (!m1) a.m1 = a.m >= a.m2 ? a.m - a.m2 : 0;
    if (!m2) a.m2 = a.m >= a.m1 ? a.m - a.m1 : 0;
  } else if (a.m >= 2 && a.k > 1.0) {
    std::tie(a.m1, a.m2) = recommend_split(a.m, a.k);
  }
  r.number("nu", a.nu);
  r.number("c1", a.c1);
  r.number("c0", a.c0);
  r.number("beta", a.beta);
  r.integer("seed", a.seed);
  r.flag("allow_nu_outside", a.allow_nu_outside);
  if (auto v = r.take("boundary")) {
    const auto rule = parse_boundary_rule(*v);
    if (!rule) throw ConfigError(r.key("boundary"), "unknown boundary rule '" + *v + "'");
    a.boundary = *rule;
  }
  a.theta0.assign(a.dim, 0.5);
  if (auto v = r.take("theta0")) {
    const auto items = r.split_list(*v);
    if (items.size() == 1) {
      a.theta0.assign(a.dim, r.parse_double("theta0", items[0]));
    } else {
      a.theta0.clear();
      for (auto item : items) a.theta0.push_back(r.parse_double("theta0", item));
    }
  }
  r.text("trajectory_csv", config.trajectory_csv);
  a.record_trajectory = !config.trajectory_csv.empty();
  r.finish();
}

void read_harness(Reader& r, HarnessSection& h) {
  r.integer("R", h.replications);
  r.integer("master_seed", h.master_seed);
  r.integer("threads", h.threads);
  r.number("level", h.level);
  if (auto v = r.take("checkpoints")) {
    for (auto item : r.split_list(*v)) {
      h.checkpoints.push_back(r.parse_integer<std::size_t>("checkpoints", item));
    }
  }
  r.number("histogram_width", h.histogram.bin_width);
  r.number("histogram_lo", h.histogram.lo);
  r.number("histogram_hi", h.histogram.hi);
  r.text("records_csv", h.records_csv);
  r.text("summary_json", h.summary_json);
  r.text("compare_json", h.compare_json);
  r.finish();
}

void read_metadata(Reader& r, MetadataSection& meta) {
  if (auto v = r.take("q")) meta.q = r.parse_double("q", *v);
  if (auto v = r.take("N")) meta.N = r.parse_integer<std::uint64_t>("N", *v);
  r.text("label", meta.label);
  r.finish();
}

void read_control(Reader& r, ControlSection& control) {
  const std::string noise = r.require("noise");
  if (noise == "bernoulli") {
    control.noise = ControlNoise::bernoulli;
  } else if (noise == "gaussian") {
    control.noise = ControlNoise::gaussian;
  } else {
    throw ConfigError(r.key("noise"), "expected bernoulli or gaussian, got '" + noise + "'");
  }
  control.mean = r.parse_double("mean", r.require("mean"));
  r.number("sd", control.sd);
  control.n = r.parse_integer<std::size_t>("n", r.require("n"));
  r.finish();
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_number(xs[i]);
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

ExperimentConfig parse_config(std::string_view text) {
  auto sections = split_sections(text);
  if (!sections.contains("model")) throw ConfigError("model.family", "required key is missing");
  if (!sections.contains("algorithm")) throw ConfigError("algorithm.T", "required key is missing");
  ExperimentConfig config;
  Reader model = section_reader(sections, "model");
  read_model(model, config.model);
  Reader algorithm = section_reader(sections, "algorithm");
  read_algorithm(algorithm, config);
  Reader harness = section_reader(sections, "harness");
  read_harness(harness, config.harness);
  Reader metadata = section_reader(sections, "metadata");
  read_metadata(metadata, config.metadata);
  if (sections.contains("control")) {
    Reader control = section_reader(sections, "control");
    read_control(control, config.control.emplace());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("file", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  const ModelParams& p = config.model.params;
  out << "[model]\n"
      << "family = " << to_string(config.model.family) << '\n'
      << "dim = " << config.model.dim << '\n'
      << "a = " << format_number(p.quadratic.a) << '\n'
      << "b = " << format_number(p.quadratic.b) << '\n'
      << "c = " << format_number(p.quadratic.c) << '\n'
      << "pareto_shape = " << format_number(p.pareto_shape) << '\n'
      << "t_dof = " << format_number(p.t_dof) << '\n'
      << "noise_sd = " << format_number(p.noise_sd) << '\n'
      << "constant_mean = " << format_number(p.constant_mean) << '\n'
      << "logistic_center = " << format_number(p.logistic_center) << '\n'
      << "logistic_offset = " << format_number(p.logistic_offset) << '\n';

  const AlgoConfig& a = config.algorithm;
  out << "\n[algorithm]\n"
      << "method = " << to_string(config.method) << '\n'
      << "T = " << a.total_budget << '\n'
      << "k = " << format_number(a.k) << '\n'
      << "m = " << a.m << '\n'
      << "m1 = " << a.m1 << '\n'
      << "m2 = " << a.m2 << '\n'
      << "nu = " << format_number(a.nu) << '\n'
      << "c1 = " << format_number(a.c1) << '\n'
      << "c0 = " << format_number(a.c0) << '\n'
      << "beta = " << format_number(a.beta) << '\n'
      << "theta0 = " << join(a.theta0) << '\n'
      << "seed = " << a.seed << '\n'
      << "boundary = " << to_string(a.boundary) << '\n'
      << "allow_nu_outside = " << (a.allow_nu_outside ? "true" : "false") << '\n'
      << "trajectory_csv = " << config.trajectory_csv << '\n';

  const HarnessSection& h = config.harness;
  out << "\n[harness]\n"
      << "R = " << h.replications << '\n'
      << "master_seed = " << h.master_seed << '\n'
      << "threads = " << h.threads << '\n'
      << "level = " << format_number(h.level) << '\n'
      << "checkpoints = ";
  for (std::size_t i = 0; i < h.checkpoints.size(); ++i) {
    out << (i > 0 ? ", " : "") << h.checkpoints[i];
  }
  out << '\n'
      << "histogram_width = " << format_number(h.histogram.bin_width) << '\n'
      << "histogram_lo = " << format_number(h.histogram.lo) << '\n'
      << "histogram_hi = " << format_number(h.histogram.hi) << '\n'
      << "records_csv = " << h.records_csv << '\n'
      << "summary_json = " << h.summary_json << '\n'
      << "compare_json = " << h.compare_json << '\n';

  out << "\n[metadata]\n";
  if (config.metadata.q) out << "q = " << format_number(*config.metadata.q) << '\n';
  if (config.metadata.N) out << "N = " << *config.metadata.N << '\n';
  out << "label = " << config.metadata.label << '\n';

  if (config.control) {
    const ControlSection& c = *config.control;
    out << "\n[control]\n"
        << "noise = " << (c.noise == ControlNoise::bernoulli ? "bernoulli" : "gaussian") << '\n'
        << "mean = " << format_number(c.mean) << '\n'
        << "sd = " << format_number(c.sd) << '\n'
        << "n = " << c.n << '\n';
  }
  return out.str();
}

OutcomeModel build_model(const ExperimentConfig& config) {
  try {
    return OutcomeModel(config.model.family, config.model.dim, config.model.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
}

ControlModel build_control(const ControlSection& control) {
  try {
    if (control.noise == ControlNoise::bernoulli) return ControlModel::bernoulli(control.mean);
    return ControlModel::gaussian(control.mean, control.sd);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("control", e.what());
  }
}

void validate(const ExperimentConfig& config) {
  if (config.model.dim == 0) throw ConfigError("model.dim", "must be at least 1");
  config.algorithm.validate();
  build_model(config);
  const HarnessSection& h = config.harness;
  if (h.replications == 0) throw ConfigError("harness.R", "must be at least 1");
  try {
    z_quantile(h.level);
  } catch (const std::invalid_argument&) {
    throw ConfigError("harness.level", "must be 0.9, 0.95 or 0.99");
  }
  if (!(h.histogram.bin_width > 0.0)) {
    throw ConfigError("harness.histogram_width", "must be positive");
  }
  if (!(h.histogram.lo < h.histogram.hi)) {
    throw ConfigError("harness.histogram_hi", "must exceed histogram_lo");
  }
  for (std::size_t t : h.checkpoints) {
    if (t == 0) throw ConfigError("harness.checkpoints", "checkpoints must be positive");
  }
  if (config.metadata.q && !(*config.metadata.q > 0.0 && *config.metadata.q <= 1.0)) {
    throw ConfigError("metadata.q", "must lie in (0, 1]");
  }
  if (config.control) {
    if (config.control->n == 0) throw ConfigError("control.n", "must be at least 1");
    build_control(*config.control);
  }
}

}  // namespace zoab
