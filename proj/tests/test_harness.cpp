#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doco/config.hpp"
#include "doco/harness.hpp"
#include "doco/ledger.hpp"
#include "doco/metrics.hpp"

using doco::ConfigFile;
using doco::ExperimentConfig;
using doco::read_jsonl;
using doco::RunLedger;
using doco::write_jsonl;

namespace {

const char* kOcoConfig = R"(
[experiment]
name = "oco-smoke"
trials = 2
seed = 11
horizon = 120
comparators = [-0.5, 0.0, 0.5]
tau_windows = [1, 40, 120]

[schedule]
kind = "constant"
lambda = 0.99

[environment]
kind = "piecewise_linear"
durations = [60, 60]
optima = [0.5, -0.5]
bounds = [1.0, 1.0]

[learner.horizon]
algo = "ogd_horizon"
d = 2.0
g = 1.0
domain = "interval"
lo = -1.0
hi = 1.0

[learner.adagrad]
algo = "ogd_adagrad"
d = 2.0
domain = "interval"
lo = -1.0
hi = 1.0

[learner.mag]
algo = "magl_d"
epsilon = 1.0
)";

const char* kConformalConfig = R"(
[experiment]
name = "ocp-smoke"
trials = 2
seed = 3
horizon = 800
alpha = 0.1
comparators = [0.0, 1.0]
tau_windows = [1, 100]
coverage_window = 50

[schedule]
kind = "constant"
lambda = 0.999

[environment]
kind = "quantile_shift"
mode = "sudden"
shift_period = 200
levels = [1.0, 2.0, 0.5, 1.5]
noise_scale = 0.2

[learner.acp]
algo = "magl_d"

[learner.acp_undiscounted]
algo = "magl"

[learner.magdis]
algo = "magdis"

[learner.ogd]
algo = "simple_ogd"
)";

std::filesystem::path temp_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("doco_test_") + tag + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parser handles the documented subset") {
  const auto file = ConfigFile::parse(R"(
# top comment
[experiment]
name = "demo"   # trailing comment
trials = 3
alpha = 0.05
flag = true
values = [1.0, 2.5, -3]

[learner.a]
algo = "magl_d"

[learner.b]
algo = "magl"
)");
  CHECK(file.get_string("experiment.name") == "demo");
  CHECK(file.get_int("experiment.trials") == 3);
  CHECK(file.get_double("experiment.alpha") == 0.05);
  CHECK(file.get_bool_or("experiment.flag", false));
  CHECK(file.get_array("experiment.values") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK(file.subtables("learner") == std::vector<std::string>{"a", "b"});
  CHECK_THROWS(file.get_string("experiment.missing"));
  CHECK_THROWS(ConfigFile::parse("key value-without-equals\n"));
  CHECK_THROWS(ConfigFile::parse("[unclosed\n"));
}

TEST_CASE("experiment config validation") {
  CHECK_THROWS(ExperimentConfig::from_config(ConfigFile::parse("[experiment]\ntrials = 0\n")));
  const char* no_learner = R"(
[experiment]
trials = 1
[environment]
kind = "quantile_shift"
levels = [1.0]
)";
  CHECK_THROWS(ExperimentConfig::from_config(ConfigFile::parse(no_learner)));

  const char* vector_on_radius = R"(
[experiment]
trials = 1
horizon = 10
[environment]
kind = "quantile_shift"
levels = [1.0]
[learner.v]
algo = "vector"
)";
  const auto config = ExperimentConfig::from_config(ConfigFile::parse(vector_on_radius));
  CHECK_THROWS(doco::run_single_trial(config, config.learners[0], 0));
}

TEST_CASE("ledger round trip is lossless") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kOcoConfig));
  const RunLedger ledger = doco::run_single_trial(config, config.learners[2], 0);
  REQUIRE(ledger.rounds.size() == 120);

  const auto dir = temp_dir("roundtrip");
  const auto path = dir / "ledger.jsonl";
  write_jsonl(ledger, path);
  const RunLedger loaded = read_jsonl(path);
  REQUIRE(loaded.rounds.size() == ledger.rounds.size());
  CHECK(loaded.meta.algorithm == ledger.meta.algorithm);
  CHECK(loaded.meta.seed == ledger.meta.seed);
  for (std::size_t t = 0; t < ledger.rounds.size(); ++t) {
    CHECK(loaded.rounds[t].x == ledger.rounds[t].x);
    CHECK(loaded.rounds[t].g == ledger.rounds[t].g);
    CHECK(loaded.rounds[t].lambda_prev == ledger.rounds[t].lambda_prev);
    CHECK(loaded.rounds[t].loss_value == ledger.rounds[t].loss_value);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical config and seed give byte-identical ledgers") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kOcoConfig));
  const auto dir = temp_dir("determinism");
  const auto path_a = dir / "a.jsonl";
  const auto path_b = dir / "b.jsonl";
  write_jsonl(doco::run_single_trial(config, config.learners[0], 1), path_a);
  write_jsonl(doco::run_single_trial(config, config.learners[0], 1), path_b);

  std::ifstream a(path_a), b(path_b);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("replay reproduces recorded predictions") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kOcoConfig));
  for (std::size_t li = 0; li < config.learners.size(); ++li) {
    const RunLedger ledger = doco::run_single_trial(config, config.learners[li], 0);
    const auto result = doco::replay_ledger(ledger, config.learners[li], config);
    CHECK(result.ok);
  }
}

TEST_CASE("bound verdicts pass on honest runs and fail on corrupted ones") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kOcoConfig));
  RunLedger ledger = doco::run_single_trial(config, config.learners[0], 0);
  auto verdicts = doco::verify_bounds(ledger, config.learners[0], config, 0);
  REQUIRE(!verdicts.empty());
  for (const auto& v : verdicts) {
    CHECK(v.pass);
  }

  // negative control: a wildly perturbed prediction sequence can break the
  // envelope
  for (auto& round : ledger.rounds) {
    round.x[0] = 50.0;
    round.g[0] = 1.0;
  }
  auto corrupted = doco::verify_bounds(ledger, config.learners[0], config, 0);
  bool any_fail = false;
  for (const auto& v : corrupted) {
    any_fail = any_fail || !v.pass;
  }
  CHECK(any_fail);
}

TEST_CASE("full experiment run emits ledgers, csvs, and passing bounds") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kOcoConfig));
  const auto dir = temp_dir("run");
  config.out_dir = dir;
  doco::RunOptions options;
  options.quiet = true;
  const auto report = doco::run_experiment(config, options);
  CHECK(report.all_bounds_pass);
  REQUIRE(report.learners.size() == 3);
  CHECK(report.learners[0].bounds_checked > 0);
  CHECK(std::filesystem::exists(dir / "oco-smoke" / "horizon-trial0.jsonl"));
  CHECK(std::filesystem::exists(dir / "oco-smoke" / "horizon-trial1.jsonl"));
  CHECK(std::filesystem::exists(dir / "oco-smoke" / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "oco-smoke" / "bounds.csv"));

  // summary has the versioned header row
  std::ifstream summary(dir / "oco-smoke" / "summary.csv");
  std::string header;
  std::getline(summary, header);
  CHECK(header.rfind("version,learner,algo,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("conformal experiment reports coverage and respects its bounds") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kConformalConfig));
  const auto dir = temp_dir("ocp");
  config.out_dir = dir;
  doco::RunOptions options;
  options.quiet = true;
  const auto report = doco::run_experiment(config, options);
  CHECK(report.all_bounds_pass);
  for (const auto& learner : report.learners) {
    REQUIRE(learner.coverage_mean.has_value());
    CHECK(*learner.coverage_mean > 0.5);
    CHECK(*learner.coverage_mean <= 1.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty comparator grid omits regret rows but keeps coverage") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kConformalConfig));
  config.comparators.clear();
  const RunLedger ledger = doco::run_single_trial(config, config.learners[0], 0);
  const auto verdicts = doco::verify_bounds(ledger, config.learners[0], config, 0);
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].check == "coverage_deviation");
}

TEST_CASE("worker count respects the environment cap") {
  ::setenv("DISCOUNTED_OCO_THREADS", "2", 1);
  CHECK(doco::worker_count(100) == 2);
  ::setenv("DISCOUNTED_OCO_THREADS", "64", 1);
  CHECK(doco::worker_count(3) == 3);
  ::unsetenv("DISCOUNTED_OCO_THREADS");
  CHECK(doco::worker_count(1) == 1);
}

TEST_CASE("gradual quantile mode and skewed loss run end to end") {
  const char* config_text = R"(
[experiment]
name = "gradual"
trials = 1
seed = 21
horizon = 400
alpha = 0.1
radius_loss = "skewed_quadratic"
coverage_window = 50
comparators = [0.5]
tau_windows = [1]

[schedule]
kind = "constant"
lambda = 0.999

[environment]
kind = "quantile_shift"
mode = "gradual"
shift_period = 100
levels = [0.5, 1.5, 1.0]
noise_scale = 0.1

[learner.acp]
algo = "magl_d"
)";
  auto config = ExperimentConfig::from_config(ConfigFile::parse(config_text));
  const RunLedger ledger = doco::run_single_trial(config, config.learners[0], 0);
  REQUIRE(ledger.rounds.size() == 400);
  CHECK(ledger.rounds[0].loss.has_value());
  CHECK(ledger.rounds[0].loss->kind == doco::LossSpec::Kind::kSkewedQuadratic);
  const auto verdicts = doco::verify_bounds(ledger, config.learners[0], config, 0);
  for (const auto& v : verdicts) {
    CHECK(v.pass);
  }
  CHECK(doco::replay_ledger(ledger, config.learners[0], config).ok);
}

TEST_CASE("two-dimensional piecewise environment drives the vector learner") {
  const char* config_text = R"(
[experiment]
name = "plane"
trials = 1
seed = 5
horizon = 300
comparators = [0.0, 0.5]
tau_windows = [1, 100]

[schedule]
kind = "constant"
lambda = 0.99

[environment]
kind = "piecewise_linear"
dim = 2
durations = [150, 150]
optima = [0.5, 0.5, -0.5, 0.0]
bounds = [1.0, 1.0]

[learner.vec]
algo = "vector"
bias = [0.1, 0.0]
)";
  auto config = ExperimentConfig::from_config(ConfigFile::parse(config_text));
  const RunLedger ledger = doco::run_single_trial(config, config.learners[0], 0);
  REQUIRE(ledger.rounds.size() == 300);
  CHECK(ledger.rounds[0].x.size() == 2);
  CHECK(ledger.rounds[0].x == std::vector<double>{0.1, 0.0});  // fresh prediction = bias
  const auto verdicts = doco::verify_bounds(ledger, config.learners[0], config, 0);
  REQUIRE(!verdicts.empty());
  for (const auto& v : verdicts) {
    CHECK(v.pass);
  }
  CHECK(doco::replay_ledger(ledger, config.learners[0], config).ok);
}

TEST_CASE("explicit and restart schedules drive runs") {
  const char* config_text = R"(
[experiment]
name = "sched"
trials = 1
seed = 9
horizon = 50
comparators = [0.0]
tau_windows = [1]

[schedule]
kind = "restart"
restarts = [25]

[environment]
kind = "piecewise_linear"
durations = [50]
optima = [0.5]
bounds = [1.0]

[learner.mag]
algo = "magl_d"
)";
  auto config = ExperimentConfig::from_config(ConfigFile::parse(config_text));
  const RunLedger ledger = doco::run_single_trial(config, config.learners[0], 0);
  REQUIRE(ledger.rounds.size() == 50);
  // the restart index appears as the lambda consumed in the following round
  CHECK(ledger.rounds[25].lambda_prev == doco::DiscountSchedule::kDefaultFloor);
  CHECK(ledger.rounds[24].lambda_prev == 1.0);
  CHECK(doco::replay_ledger(ledger, config.learners[0], config).ok);
}

TEST_CASE("replay flags a tampered ledger") {
  auto config = ExperimentConfig::from_config(ConfigFile::parse(kOcoConfig));
  RunLedger ledger = doco::run_single_trial(config, config.learners[2], 0);
  ledger.rounds[40].x[0] += 0.125;
  const auto result = doco::replay_ledger(ledger, config.learners[2], config);
  CHECK_FALSE(result.ok);
  CHECK(result.first_mismatch == 41);
}
