#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "doco/config.hpp"
#include "doco/ledger.hpp"
#include "doco/metrics.hpp"

namespace doco {

/// One row of the bound-compliance table: a measured quantity against its
/// guaranteed envelope. `u` and `tau` are blank (nullopt) for checks that do
/// not range over a comparator or stability window.
struct BoundVerdict {
  std::string learner;
  std::int64_t trial = 0;
  std::string check;
  std::optional<double> u;
  std::optional<std::int64_t> tau;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct LearnerSummary {
  std::string id;
  std::string algo;
  std::int64_t trials = 0;
  double step_ns_mean = 0.0;
  double step_ns_std = 0.0;
  std::optional<double> coverage_mean;
  std::optional<double> coverage_std;
  std::optional<double> width_mean;
  std::optional<double> width_std;
  std::optional<double> lce_mean;
  std::optional<double> lce_max;
  std::int64_t bounds_checked = 0;
  std::int64_t bounds_failed = 0;
};

struct ExperimentReport {
  std::vector<LearnerSummary> learners;
  std::vector<BoundVerdict> verdicts;
  bool all_bounds_pass = true;
};

struct RunOptions {
  bool write_outputs = true;
  bool quiet = false;
};

/// Drives the full experiment: every (learner, trial) pair fans out over a
/// worker pool (capped by DISCOUNTED_OCO_THREADS), each trial replays the
/// interaction protocol against its environment, and results merge back in
/// deterministic (learner, trial) order. Writes JSONL ledgers plus
/// summary.csv / bounds.csv under <out>/<name>/ when requested.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Runs one (learner, trial) pair and returns its ledger. `step_ns` (when
/// non-null) receives the mean wall-clock nanoseconds per protocol step.
RunLedger run_single_trial(const ExperimentConfig& config, const LearnerSpec& learner,
                           std::int64_t trial, double* step_ns = nullptr);

/// Re-checks every applicable regret/coverage envelope on a recorded ledger.
std::vector<BoundVerdict> verify_bounds(const RunLedger& ledger, const LearnerSpec& learner,
                                        const ExperimentConfig& config, std::int64_t trial);

/// Re-derives the prediction sequence from a ledger's recorded gradients and
/// discounts and compares against the recorded predictions.
struct ReplayResult {
  bool ok = true;
  std::int64_t first_mismatch = -1;  // 1-based round index
  double max_abs_diff = 0.0;
};
ReplayResult replay_ledger(const RunLedger& ledger, const LearnerSpec& learner,
                           const ExperimentConfig& config);

/// Worker cap: DISCOUNTED_OCO_THREADS when set, else hardware concurrency.
unsigned worker_count(std::size_t task_count);

}  // namespace doco
