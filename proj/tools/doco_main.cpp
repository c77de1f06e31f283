#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "doco/config.hpp"
#include "doco/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  long long trials = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  auto* out = cmd->add_option("--out", args.out_dir, "output directory");
  if (needs_out) {
    (void)out;
  }
  cmd->add_option("--seed", args.seed, "override experiment.seed");
  cmd->add_option("--trials", args.trials, "override experiment.trials");
  cmd->add_flag("--quiet", args.quiet, "suppress the per-learner report");
}

doco::ExperimentConfig load_config(const CommonArgs& args) {
  doco::ExperimentConfig config = doco::ExperimentConfig::from_file(args.config_path);
  if (!args.out_dir.empty()) {
    config.out_dir = args.out_dir;
  }
  if (args.seed >= 0) {
    config.seed = static_cast<std::uint64_t>(args.seed);
  }
  if (args.trials >= 1) {
    config.trials = args.trials;
  }
  return config;
}

int report_exit(const doco::ExperimentReport& report, bool quiet) {
  std::size_t failed = 0;
  for (const doco::BoundVerdict& v : report.verdicts) {
    if (!v.pass) {
      ++failed;
      if (!quiet) {
        std::printf("FAIL %s trial %lld %s u=%s tau=%s measured=%.6g bound=%.6g\n",
                    v.learner.c_str(), static_cast<long long>(v.trial), v.check.c_str(),
                    v.u ? std::to_string(*v.u).c_str() : "-",
                    v.tau ? std::to_string(*v.tau).c_str() : "-", v.measured, v.bound);
      }
    }
  }
  if (!quiet) {
    std::printf("%zu bound checks, %zu failed\n", report.verdicts.size(), failed);
  }
  return report.all_bounds_pass ? 0 : 1;
}

int cmd_run(const CommonArgs& args) {
  const doco::ExperimentConfig config = load_config(args);
  doco::RunOptions options;
  options.quiet = args.quiet;
  const doco::ExperimentReport report = doco::run_experiment(config, options);
  return report_exit(report, args.quiet);
}

int cmd_verify(const CommonArgs& args) {
  const doco::ExperimentConfig config = load_config(args);
  const std::filesystem::path dir = config.out_dir / config.name;
  doco::ExperimentReport report;
  for (const doco::LearnerSpec& learner : config.learners) {
    for (std::int64_t trial = 0; trial < config.trials; ++trial) {
      const std::filesystem::path file =
          dir / (learner.id + "-trial" + std::to_string(trial) + ".jsonl");
      const doco::RunLedger ledger = doco::read_jsonl(file);
      for (doco::BoundVerdict& v : doco::verify_bounds(ledger, learner, config, trial)) {
        if (!v.pass) {
          report.all_bounds_pass = false;
        }
        report.verdicts.push_back(std::move(v));
      }
    }
  }
  return report_exit(report, args.quiet);
}

int cmd_replay(const CommonArgs& args) {
  const doco::ExperimentConfig config = load_config(args);
  const std::filesystem::path dir = config.out_dir / config.name;
  bool all_ok = true;
  for (const doco::LearnerSpec& learner : config.learners) {
    for (std::int64_t trial = 0; trial < config.trials; ++trial) {
      const std::filesystem::path file =
          dir / (learner.id + "-trial" + std::to_string(trial) + ".jsonl");
      const doco::RunLedger ledger = doco::read_jsonl(file);
      const doco::ReplayResult result = doco::replay_ledger(ledger, learner, config);
      if (!result.ok) {
        all_ok = false;
        std::printf("REPLAY MISMATCH %s trial %lld: round %lld, max |diff| %.3g\n",
                    learner.id.c_str(), static_cast<long long>(trial),
                    static_cast<long long>(result.first_mismatch), result.max_abs_diff);
      } else if (!args.quiet) {
        std::printf("replay ok %s trial %lld (%zu rounds)\n", learner.id.c_str(),
                    static_cast<long long>(trial), ledger.rounds.size());
      }
    }
  }
  return all_ok ? 0 : 1;
}

int cmd_bench(const CommonArgs& args) {
  const doco::ExperimentConfig config = load_config(args);
  doco::RunOptions options;
  options.write_outputs = false;
  options.quiet = true;
  const doco::ExperimentReport report = doco::run_experiment(config, options);
  std::printf("%-16s %-12s %12s %12s\n", "learner", "algo", "ns/step", "stddev");
  for (const doco::LearnerSummary& s : report.learners) {
    std::printf("%-16s %-12s %12.1f %12.1f\n", s.id.c_str(), s.algo.c_str(), s.step_ns_mean,
                s.step_ns_std);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discounted online learning benchmark harness"};
  app.require_subcommand(1);

  CommonArgs run_args, verify_args, replay_args, bench_args;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  add_common(run, run_args, true);
  CLI::App* verify = app.add_subcommand("verify", "re-check bounds on stored ledgers");
  add_common(verify, verify_args, true);
  CLI::App* replay = app.add_subcommand("replay", "re-derive predictions from stored ledgers");
  add_common(replay, replay_args, true);
  CLI::App* bench = app.add_subcommand("bench", "per-step timing without file output");
  add_common(bench, bench_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (replay->parsed()) return cmd_replay(replay_args);
    if (bench->parsed()) return cmd_bench(bench_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
