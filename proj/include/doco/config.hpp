#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "doco/schedule.hpp"
#include "doco/streams.hpp"

namespace doco {

/// Minimal TOML-style configuration reader: `[table.subtable]` headers,
/// `key = value` pairs, strings, numbers, booleans, and single-line arrays of
/// scalars. Keys are exposed with dotted paths. docs/formats.md pins the
/// accepted grammar.
class ConfigFile {
 public:
  using Value = std::variant<bool, double, std::string, std::vector<double>>;

  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& dotted_key) const;
  double get_double(const std::string& dotted_key) const;
  double get_double_or(const std::string& dotted_key, double fallback) const;
  std::int64_t get_int(const std::string& dotted_key) const;
  std::int64_t get_int_or(const std::string& dotted_key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& dotted_key, bool fallback) const;
  std::string get_string(const std::string& dotted_key) const;
  std::string get_string_or(const std::string& dotted_key, const std::string& fallback) const;
  std::vector<double> get_array(const std::string& dotted_key) const;
  std::vector<double> get_array_or(const std::string& dotted_key,
                                   std::vector<double> fallback) const;

  /// Names of the direct subtables of `prefix`, in file order.
  std::vector<std::string> subtables(const std::string& prefix) const;

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::map<std::string, Value> values_;
  std::vector<std::string> table_order_;
};

/// One learner entry of an experiment. Algorithm ids: magl_d, magl, magdis,
/// vector, ogd_constant, ogd_horizon, ogd_adagrad, simple_ogd.
struct LearnerSpec {
  std::string id;
  std::string algo;
  double eps = 1.0;
  double v0 = 1e-6;                  // magdis variance seed
  double diameter = 1.0;             // ogd rules
  double lipschitz = 1.0;            // ogd_constant / ogd_horizon
  double lr_scale = 1.0;             // simple_ogd
  std::string domain = "default";    // default | unconstrained | interval | ball | halfline
  double lo = -1.0, hi = 1.0;        // interval bounds
  double radius = 1.0;               // ball radius
  std::vector<double> center;        // ball center
  std::vector<double> bias;          // vector-learner inductive bias
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::int64_t horizon = 1000;
  double alpha = 0.1;
  std::string radius_loss = "pinball";  // pinball | skewed_quadratic
  std::int64_t coverage_window = 100;   // k for the local-coverage metrics
  std::vector<double> comparators;      // u grid (scalar; vectors use u * e1)
  std::vector<std::int64_t> tau_windows{1};
  std::filesystem::path out_dir = "runs";

  DiscountSchedule schedule = DiscountSchedule::constant(1.0);
  StreamSpec environment;
  std::vector<LearnerSpec> learners;

  std::string spec_hash;  // fingerprint of the config text

  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig from_config(const ConfigFile& file);
};

}  // namespace doco
