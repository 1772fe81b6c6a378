#pragma once

#include <string>
#include <vector>

#include "pcmdp/algorithms.hpp"
#include "pcmdp/env.hpp"
#include "pcmdp/oracle.hpp"

namespace pcmdp {

struct ExperimentConfig {
  std::string env_name;          // preset name; ignored when config_path set
  std::string env_config_path;   // optional key = value file
  LearnerConfig learner;         // algo + hyperparameters
  int episodes = 1;
  std::vector<int> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t master_seed = 0;
  int eval_every = 50;           // cadence, in training episodes
  int eval_episodes = 50;        // frozen-greedy window per cadence point
  bool regret = false;           // exact per-episode regret (exportable envs)

  void validate() const;
};

struct RunRecord {
  int seed = 0;
  int episode = 0;          // 1-based cadence episode
  double train_return = 0;  // raw scale, the cadence episode itself
  double eval_return = 0;   // raw scale, mean over the eval window
  double cum_regret = 0;    // raw scale
  bool has_regret = false;
  std::int64_t wall_ms = 0;
};

struct ExperimentResult {
  std::string env;
  std::string algo;
  std::vector<std::vector<RunRecord>> per_seed;  // ordered as config.seeds
};

/// Runs every seed independently (worker pool, PCMDP_WORKERS overrides the
/// thread count); output depends only on (config, master seed), never on
/// scheduling. Rejects model-based learners on the full-scale trading
/// environment.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Same, against an already built environment.
ExperimentResult run_experiment(const ExperimentConfig& config, const Env& env);

struct AggregateRecord {
  std::string env;
  std::string algo;
  int episode = 0;
  double mean_eval = 0;
  double ci_low = 0;
  double ci_high = 0;
  bool has_ci = false;  // needs >= 2 seeds
};

std::vector<AggregateRecord> aggregate(const ExperimentResult& result);

/// Raw CSV: header env,algo,seed,episode,train_return,eval_return,
/// cum_regret,wall_ms; floats at 17 significant digits; missing regret as
/// an empty field.
void emit_csv(const ExperimentResult& result, const std::string& path);
ExperimentResult parse_csv(const std::string& path);

/// Aggregate CSV: header env,algo,episode,mean_eval,ci_low,ci_high.
void emit_aggregate_csv(const std::vector<AggregateRecord>& records,
                        const std::string& path);

/// Lower-bound family sweep: one run of max(K_grid) episodes per (N, seed),
/// reading cumulative regret at each grid point, averaged over seeds.
struct ScalingResult {
  int branching = 0;
  std::vector<double> mean_regret;  // per K grid point
  ScalingFit fit;
};

std::vector<ScalingResult> scaling_experiment(const std::vector<int>& branching_grid,
                                              const std::vector<int>& episode_grid,
                                              const LearnerConfig& learner,
                                              const std::vector<int>& seeds,
                                              std::uint64_t master_seed = 0);

/// Exact value of the optimal policy from the initial distribution, raw scale.
double optimal_value(const Env& env);
/// Exact value of a fixed policy from the initial distribution, raw scale.
double policy_value(const Env& env, const DeterministicPolicy& policy);

int worker_count();

}  // namespace pcmdp
