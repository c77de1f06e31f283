#include "doco/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doco/ledger.hpp"
#include "doco/magnitude_learner.hpp"

namespace doco {

namespace {

std::string trim(std::string_view sv) {
  std::size_t begin = 0;
  std::size_t end = sv.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(sv[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(sv[end - 1]))) --end;
  return std::string(sv.substr(begin, end - begin));
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

double parse_number(const std::string& token, int line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) {
      throw std::invalid_argument(token);
    }
    return value;
  } catch (const std::exception&) {
    throw std::runtime_error("config line " + std::to_string(line_no) +
                             ": cannot parse number '" + token + "'");
  }
}

ConfigFile::Value parse_value(const std::string& raw, int line_no) {
  if (raw.empty()) {
    throw std::runtime_error("config line " + std::to_string(line_no) + ": missing value");
  }
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": unterminated string");
    }
    return raw.substr(1, raw.size() - 2);
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '[') {
    if (raw.back() != ']') {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": arrays must close on the same line");
    }
    std::vector<double> items;
    std::string body = raw.substr(1, raw.size() - 2);
    std::stringstream ss(body);
    std::string token;
    while (std::getline(ss, token, ',')) {
      token = trim(token);
      if (!token.empty()) {
        items.push_back(parse_number(token, line_no));
      }
    }
    return items;
  }
  return parse_number(raw, line_no);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  cfg.text_ = text;
  std::stringstream stream(text);
  std::string line;
  std::string table;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string content = trim(strip_comment(line));
    if (content.empty()) {
      continue;
    }
    if (content.front() == '[') {
      if (content.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": malformed table header");
      }
      table = trim(content.substr(1, content.size() - 2));
      if (table.empty()) {
        throw std::runtime_error("config line " + std::to_string(line_no) + ": empty table name");
      }
      cfg.table_order_.push_back(table);
      continue;
    }
    const std::size_t eq = content.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(content.substr(0, eq));
    if (key.empty()) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    }
    const std::string dotted = table.empty() ? key : table + "." + key;
    cfg.values_[dotted] = parse_value(trim(content.substr(eq + 1)), line_no);
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("ConfigFile::load: cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool ConfigFile::has(const std::string& dotted_key) const {
  return values_.count(dotted_key) > 0;
}

double ConfigFile::get_double(const std::string& dotted_key) const {
  const auto it = values_.find(dotted_key);
  if (it == values_.end()) {
    throw std::runtime_error("config: missing key '" + dotted_key + "'");
  }
  if (const double* v = std::get_if<double>(&it->second)) {
    return *v;
  }
  throw std::runtime_error("config: key '" + dotted_key + "' is not a number");
}

double ConfigFile::get_double_or(const std::string& dotted_key, double fallback) const {
  return has(dotted_key) ? get_double(dotted_key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& dotted_key) const {
  const double v = get_double(dotted_key);
  const auto rounded = static_cast<std::int64_t>(v);
  if (static_cast<double>(rounded) != v) {
    throw std::runtime_error("config: key '" + dotted_key + "' is not an integer");
  }
  return rounded;
}

std::int64_t ConfigFile::get_int_or(const std::string& dotted_key, std::int64_t fallback) const {
  return has(dotted_key) ? get_int(dotted_key) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& dotted_key, bool fallback) const {
  const auto it = values_.find(dotted_key);
  if (it == values_.end()) {
    return fallback;
  }
  if (const bool* v = std::get_if<bool>(&it->second)) {
    return *v;
  }
  throw std::runtime_error("config: key '" + dotted_key + "' is not a boolean");
}

std::string ConfigFile::get_string(const std::string& dotted_key) const {
  const auto it = values_.find(dotted_key);
  if (it == values_.end()) {
    throw std::runtime_error("config: missing key '" + dotted_key + "'");
  }
  if (const std::string* v = std::get_if<std::string>(&it->second)) {
    return *v;
  }
  throw std::runtime_error("config: key '" + dotted_key + "' is not a string");
}

std::string ConfigFile::get_string_or(const std::string& dotted_key,
                                      const std::string& fallback) const {
  return has(dotted_key) ? get_string(dotted_key) : fallback;
}

std::vector<double> ConfigFile::get_array(const std::string& dotted_key) const {
  const auto it = values_.find(dotted_key);
  if (it == values_.end()) {
    throw std::runtime_error("config: missing key '" + dotted_key + "'");
  }
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) {
    return *v;
  }
  throw std::runtime_error("config: key '" + dotted_key + "' is not an array");
}

std::vector<double> ConfigFile::get_array_or(const std::string& dotted_key,
                                             std::vector<double> fallback) const {
  return has(dotted_key) ? get_array(dotted_key) : fallback;
}

std::vector<std::string> ConfigFile::subtables(const std::string& prefix) const {
  std::vector<std::string> names;
  const std::string want = prefix + ".";
  for (const std::string& table : table_order_) {
    if (table.rfind(want, 0) == 0) {
      const std::string rest = table.substr(want.size());
      if (rest.find('.') == std::string::npos &&
          std::find(names.begin(), names.end(), rest) == names.end()) {
        names.push_back(rest);
      }
    }
  }
  return names;
}

namespace {

DiscountSchedule schedule_from(const ConfigFile& file) {
  const std::string kind = file.get_string_or("schedule.kind", "constant");
  const double floor = file.get_double_or("schedule.floor", DiscountSchedule::kDefaultFloor);
  if (kind == "constant") {
    // Radius-tracking runs default to mild forgetting; everything else to
    // the undiscounted game.
    const bool conformal = file.get_string_or("environment.kind", "") == "quantile_shift";
    return DiscountSchedule::constant(
        file.get_double_or("schedule.lambda", conformal ? 0.999 : 1.0));
  }
  if (kind == "piecewise") {
    const auto starts = file.get_array("schedule.starts");
    const auto values = file.get_array("schedule.values");
    if (starts.size() != values.size()) {
      throw std::runtime_error("config: schedule.starts and schedule.values disagree");
    }
    std::vector<std::pair<std::int64_t, double>> segments;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      segments.emplace_back(static_cast<std::int64_t>(starts[i]), values[i]);
    }
    return DiscountSchedule::piecewise(std::move(segments));
  }
  if (kind == "restart") {
    const auto rounds = file.get_array("schedule.restarts");
    std::vector<std::int64_t> indices(rounds.size());
    std::transform(rounds.begin(), rounds.end(), indices.begin(),
                   [](double r) { return static_cast<std::int64_t>(r); });
    return DiscountSchedule::restart(std::move(indices), floor);
  }
  if (kind == "explicit") {
    return DiscountSchedule::explicit_sequence(file.get_array("schedule.values"));
  }
  throw std::runtime_error("config: unknown schedule.kind '" + kind + "'");
}

StreamSpec environment_from(const ConfigFile& file, std::uint64_t seed, std::int64_t horizon) {
  StreamSpec spec;
  spec.seed = seed;
  spec.horizon = horizon;
  const std::string kind = file.get_string("environment.kind");
  if (kind == "rademacher") {
    RademacherSpec rad;
    rad.direction = file.get_array("environment.direction");
    rad.lipschitz = file.get_double_or("environment.lipschitz", 1.0);
    rad.budget = file.get_double_or("environment.budget", 0.0);  // resolved at run time
    spec.kind = rad;
  } else if (kind == "quantile_shift") {
    QuantileShiftSpec qs;
    const std::string mode = file.get_string_or("environment.mode", "sudden");
    if (mode == "sudden") {
      qs.mode = QuantileShiftSpec::Mode::kSudden;
    } else if (mode == "gradual") {
      qs.mode = QuantileShiftSpec::Mode::kGradual;
    } else {
      throw std::runtime_error("config: unknown environment.mode '" + mode + "'");
    }
    qs.shift_period = file.get_int_or("environment.shift_period", 500);
    qs.levels = file.get_array("environment.levels");
    qs.noise_scale = file.get_double_or("environment.noise_scale", 0.0);
    spec.kind = qs;
  } else if (kind == "piecewise_linear") {
    PiecewiseLinearSpec pw;
    const auto durations = file.get_array("environment.durations");
    const auto optima = file.get_array("environment.optima");
    const auto bounds = file.get_array("environment.bounds");
    const auto dim = static_cast<std::size_t>(file.get_int_or("environment.dim", 1));
    if (durations.size() != bounds.size() || optima.size() != durations.size() * dim) {
      throw std::runtime_error("config: piecewise environment arrays disagree");
    }
    for (std::size_t i = 0; i < durations.size(); ++i) {
      PiecewiseSegment seg;
      seg.duration = static_cast<std::int64_t>(durations[i]);
      seg.optimum.assign(optima.begin() + static_cast<std::ptrdiff_t>(i * dim),
                         optima.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
      seg.gradient_bound = bounds[i];
      pw.segments.push_back(std::move(seg));
    }
    spec.kind = pw;
  } else {
    throw std::runtime_error("config: unknown environment.kind '" + kind + "'");
  }
  return spec;
}

LearnerSpec learner_from(const ConfigFile& file, const std::string& id) {
  const std::string prefix = "learner." + id + ".";
  LearnerSpec spec;
  spec.id = id;
  spec.algo = file.get_string(prefix + "algo");
  spec.eps = file.get_double_or(prefix + "epsilon", 1.0);
  spec.v0 = file.get_double_or(prefix + "v0", MagnitudeState::kDefaultHintFreeV0);
  spec.diameter = file.get_double_or(prefix + "d", 1.0);
  spec.lipschitz = file.get_double_or(prefix + "g", 1.0);
  spec.lr_scale = file.get_double_or(prefix + "lr", 1.0);
  spec.domain = file.get_string_or(prefix + "domain", "default");
  spec.lo = file.get_double_or(prefix + "lo", -1.0);
  spec.hi = file.get_double_or(prefix + "hi", 1.0);
  spec.radius = file.get_double_or(prefix + "radius", 1.0);
  spec.center = file.get_array_or(prefix + "center", {});
  spec.bias = file.get_array_or(prefix + "bias", {});
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  return from_config(ConfigFile::load(path));
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& file) {
  ExperimentConfig cfg;
  cfg.name = file.get_string_or("experiment.name", "experiment");
  cfg.trials = file.get_int_or("experiment.trials", 1);
  cfg.seed = static_cast<std::uint64_t>(file.get_int_or("experiment.seed", 0));
  cfg.horizon = file.get_int_or("experiment.horizon", 1000);
  cfg.alpha = file.get_double_or("experiment.alpha", 0.1);
  cfg.radius_loss = file.get_string_or("experiment.radius_loss", "pinball");
  cfg.coverage_window = file.get_int_or("experiment.coverage_window", 100);
  cfg.comparators = file.get_array_or("experiment.comparators", {});
  cfg.out_dir = file.get_string_or("experiment.out", "runs");
  cfg.tau_windows.clear();
  for (double tau : file.get_array_or("experiment.tau_windows", {1.0})) {
    cfg.tau_windows.push_back(static_cast<std::int64_t>(tau));
  }
  if (cfg.trials < 1) {
    throw std::runtime_error("config: experiment.trials must be >= 1");
  }
  if (cfg.horizon < 1) {
    throw std::runtime_error("config: experiment.horizon must be >= 1");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::runtime_error("config: experiment.alpha must lie in (0, 1)");
  }
  if (cfg.radius_loss != "pinball" && cfg.radius_loss != "skewed_quadratic") {
    throw std::runtime_error("config: unknown experiment.radius_loss '" + cfg.radius_loss + "'");
  }

  cfg.schedule = schedule_from(file);
  cfg.environment = environment_from(file, cfg.seed, cfg.horizon);

  const auto learner_ids = file.subtables("learner");
  if (learner_ids.empty()) {
    throw std::runtime_error("config: at least one [learner.<id>] table is required");
  }
  for (const std::string& id : learner_ids) {
    cfg.learners.push_back(learner_from(file, id));
  }

  cfg.spec_hash = fnv1a_hex(file.text());
  return cfg;
}

}  // namespace doco
