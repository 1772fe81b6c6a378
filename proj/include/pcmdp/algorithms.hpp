#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pcmdp/env.hpp"
#include "pcmdp/estimation.hpp"

namespace pcmdp {

/// Episode-level learner protocol. A training episode is: begin_episode();
/// then for each step act / observe (next_s = -1 at the last step); then
/// end_episode(), where batched updates and replanning happen.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual void begin_episode() = 0;
  virtual int act(int h, int s, Rng& rng) = 0;
  virtual int greedy(int h, int s) const = 0;
  virtual void observe(int h, int s, int a, double r, int next_s) = 0;
  virtual void end_episode() = 0;
  /// Increments whenever the greedy policy may have changed; lets callers
  /// cache exact policy evaluations.
  virtual std::int64_t policy_epoch() const = 0;
  virtual void materialize_policy(DeterministicPolicy& out) const = 0;
  /// Checkpoint of the learned state (counts and value tables) in the same
  /// binary format as the statistics dumps. Restoring into a learner built
  /// with the same (env, config) resumes the run.
  virtual void checkpoint(std::ostream& os) const = 0;
  virtual void restore(std::istream& is) = 0;
};

struct LearnerConfig {
  std::string algo;          // exavi | ucbvi | exaq | ql
  int total_episodes = 1;    // K in the ucbvi bonus log term
  double bonus_c = 0.5;
  double delta = 1e-6;
  int replan_every = 1;      // exavi cadence (1 in all reported runs)
  double ql_alpha = 0.05;
  double eps_start = 1.0;
  double eps_min = 0.0;
  double eps_decay = 0.99985;
  std::string eps_decay_type = "exp";  // exp | mixed (both floor at eps_min)
};

/// Greedy acting, no bonuses: learns only the exogenous kernel and replans
/// by exact value iteration on the composed empirical model.
class ExAvi : public Learner {
 public:
  ExAvi(const Env& env, const LearnerConfig& config);

  void begin_episode() override {}
  int act(int h, int s, Rng&) override { return policy_.at(h, s); }
  int greedy(int h, int s) const override { return policy_.at(h, s); }
  void observe(int h, int s, int a, double r, int next_s) override;
  void end_episode() override;
  std::int64_t policy_epoch() const override { return epoch_; }
  void materialize_policy(DeterministicPolicy& out) const override { out = policy_; }

  void checkpoint(std::ostream& os) const override;
  void restore(std::istream& is) override;

  const ExoStatistics& exo_stats() const { return stats_; }
  const FactoredModel& planning_model() const { return work_; }

 private:
  void replan();

  ExoStatistics stats_;
  FactoredModel work_;  // known parts + empirical exogenous kernel
  FactoredPlanner planner_;
  DeterministicPolicy policy_;
  std::vector<int> touched_;  // (h, s_exo) rows to refresh, flattened
  int replan_every_ = 1;
  int since_replan_ = 0;
  std::int64_t epoch_ = 0;
};

/// Optimistic model-based baseline over the unfactored state space.
class Ucbvi : public Learner {
 public:
  Ucbvi(const Env& env, const LearnerConfig& config);

  void begin_episode() override {}
  int act(int h, int s, Rng&) override { return policy_.at(h, s); }
  int greedy(int h, int s) const override { return policy_.at(h, s); }
  void observe(int h, int s, int a, double r, int next_s) override;
  void end_episode() override;
  std::int64_t policy_epoch() const override { return epoch_; }
  void materialize_policy(DeterministicPolicy& out) const override { out = policy_; }

  void checkpoint(std::ostream& os) const override;
  void restore(std::istream& is) override;

  double bonus(std::int64_t n) const;
  double value(int h, int s) const { return v_[h][s]; }

 private:
  const std::shared_ptr<const FactoredModel> model_;
  FullStatistics stats_;
  std::vector<std::vector<double>> v_;  // dense, optimistic defaults
  DeterministicPolicy policy_;
  std::vector<std::array<int, 3>> episode_;  // (s, a, next_s) per step
  double log_term_ = 1.0;
  double bonus_c_ = 0.5;
  mutable std::vector<double> bonus_by_count_;  // lazy; bonus depends on n only
  std::int64_t epoch_ = 0;
};

/// Counterfactual Q-learning: one observed exogenous trajectory updates
/// every controllable cell sharing it.
class ExAq : public Learner {
 public:
  ExAq(const Env& env, const LearnerConfig& config);

  void begin_episode() override {}
  int act(int h, int s, Rng&) override { return greedy(h, s); }
  int greedy(int h, int s) const override;
  void observe(int h, int s, int a, double r, int next_s) override;
  void end_episode() override;
  std::int64_t policy_epoch() const override { return epoch_; }
  void materialize_policy(DeterministicPolicy& out) const override;

  void checkpoint(std::ostream& os) const override;
  void restore(std::istream& is) override;

  const StepTables& tables() const { return tables_; }
  const ExoStatistics& exo_stats() const { return stats_; }

 private:
  const std::shared_ptr<const FactoredModel> model_;
  StepTables tables_;
  ExoStatistics stats_;
  LearningRateSchedule schedule_;
  std::vector<int> episode_states_;  // s_h per step of the running episode
  std::int64_t epoch_ = 0;
};

/// Single-cell ε-greedy Q-learning with a constant learning rate.
class Ql : public Learner {
 public:
  Ql(const Env& env, const LearnerConfig& config);

  void begin_episode() override {}
  int act(int h, int s, Rng& rng) override;
  int greedy(int h, int s) const override;
  void observe(int h, int s, int a, double r, int next_s) override;
  void end_episode() override;
  std::int64_t policy_epoch() const override { return epoch_; }
  void materialize_policy(DeterministicPolicy& out) const override;

  void checkpoint(std::ostream& os) const override;
  void restore(std::istream& is) override;

  double epsilon() const { return eps_; }
  const StepTables& tables() const { return tables_; }

 private:
  double best_next(int h, int s) const;

  const std::shared_ptr<const FactoredModel> model_;
  StepTables tables_;
  double alpha_;
  double eps_, eps_min_, eps_decay_;
  std::int64_t epoch_ = 0;
};

std::unique_ptr<Learner> make_learner(const Env& env, const LearnerConfig& config);

/// Linear liquidation reference: target inventory round(u0 * (H - h) / H)
/// at 1-based step h, clamped to the holdings. Trading environments only.
DeterministicPolicy twap_policy(const Env& env);

}  // namespace pcmdp
