#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "pcmdp/core.hpp"

namespace pcmdp {

/// Visitation counts n_h(s_exo) and transition counts m_h(s_exo, s_exo').
/// Transition counts exist for h < H-1 only; visit counts for every step
/// (the last step has no successor but still keys the learning rate).
class ExoStatistics {
 public:
  ExoStatistics() = default;
  ExoStatistics(int horizon, int n_exogenous);

  void record_transition(int h, int s_exo, int next_exo);
  void record_visit(int h, int s_exo);  // last step: no successor

  std::int64_t visits(int h, int s_exo) const {
    return n_[static_cast<std::size_t>(h) * n_exo_ + s_exo];
  }
  std::int64_t transitions(int h, int s_exo, int next_exo) const {
    return m_[(static_cast<std::size_t>(h) * n_exo_ + s_exo) * n_exo_ + next_exo];
  }
  int horizon() const { return horizon_; }
  int n_exogenous() const { return n_exo_; }

  struct Row {
    std::vector<double> p;
    bool unvisited = false;  // uniform fallback in effect
  };
  /// Empirical exogenous row; uniform fallback (flagged) when unvisited.
  Row empirical_row(int h, int s_exo) const;

  void dump(std::ostream& os) const;
  static ExoStatistics load(std::istream& is);
  bool operator==(const ExoStatistics&) const = default;

 private:
  int horizon_ = 0;
  int n_exo_ = 0;
  std::vector<std::int64_t> n_;  // [h][s_exo], h in [0, H)
  std::vector<std::int64_t> m_;  // [h][s_exo][s_exo'], h in [0, H-1)
};

/// Sparse per-step counts over (s, a) and (s, a, s'), as used by the
/// full-kernel baseline estimator. Dense storage is infeasible at scale.
class FullStatistics {
 public:
  struct ActionEntry {
    std::int64_t count = 0;
    // successor sets are tiny (factored kernels); a sorted flat vector beats
    // a hash map on both iteration speed and dump determinism
    std::vector<std::pair<int, std::int64_t>> successors;
  };
  using StateEntry = std::vector<ActionEntry>;  // indexed by action

  FullStatistics() = default;
  FullStatistics(int horizon, int n_actions) : horizon_(horizon), n_actions_(n_actions) {
    per_step_.resize(horizon_);
  }

  /// next_s = -1 records a visit without a successor (last step).
  void record(int h, int s, int a, int next_s);

  std::int64_t count(int h, int s, int a) const;
  /// p_hat(s'|s,a) = count(s,a,s') / max{1, count(s,a)}; all-zero row when
  /// the pair was never visited.
  std::vector<std::pair<int, double>> empirical_row(int h, int s, int a) const;

  const std::unordered_map<int, StateEntry>& states_at(int h) const { return per_step_[h]; }
  int horizon() const { return horizon_; }
  int n_actions() const { return n_actions_; }

  void dump(std::ostream& os) const;
  static FullStatistics load(std::istream& is);

 private:
  int horizon_ = 0;
  int n_actions_ = 0;
  std::vector<std::unordered_map<int, StateEntry>> per_step_;
};

/// alpha_t = (H+1)/(H+t).
class LearningRateSchedule {
 public:
  explicit LearningRateSchedule(int horizon) : horizon_(horizon) {}
  double rate(std::int64_t t) const;
  int horizon() const { return horizon_; }

 private:
  int horizon_ = 0;
};

/// Weights alpha_t^i = alpha_i * prod_{j=i+1}^t (1 - alpha_j) for i in
/// [0, t]; index 0 holds alpha_t^0. Computed iteratively.
std::vector<double> learning_rate_weights(const LearningRateSchedule& schedule, int t);

/// Per-step Q/V tables with lazy per-(step, exogenous state) blocks.
/// Unallocated entries read as the optimistic default H-1-h (H-h for
/// 1-based steps), matching the Q-learning initialization.
class StepTables {
 public:
  StepTables() = default;
  StepTables(int horizon, int n_controllable, int n_exogenous, int n_actions);

  double default_value(int h) const { return static_cast<double>(horizon_ - 1 - h); }
  bool allocated(int h, int s_exo) const {
    return !blocks_[static_cast<std::size_t>(h) * n_exo_ + s_exo].q.empty();
  }
  double q(int h, int s, int a) const;
  double v(int h, int s) const;

  struct Block {
    std::vector<double> q;  // n_dia * A
    std::vector<double> v;  // n_dia
  };
  /// Allocates (filling defaults) and returns the block for in-place update.
  Block& block_for_update(int h, int s_exo);
  const Block* block_if_allocated(int h, int s_exo) const {
    const Block& b = blocks_[static_cast<std::size_t>(h) * n_exo_ + s_exo];
    return b.q.empty() ? nullptr : &b;
  }

  int horizon() const { return horizon_; }
  int n_controllable() const { return n_dia_; }
  int n_exogenous() const { return n_exo_; }
  int n_actions() const { return n_actions_; }

  void dump(std::ostream& os) const;
  static StepTables load(std::istream& is);

 private:
  int horizon_ = 0, n_dia_ = 0, n_exo_ = 0, n_actions_ = 0;
  std::vector<Block> blocks_;  // [h * n_exo + s_exo]
};

/// Eq.-style counterfactual target: sum over next controllable states of
/// f(s_dia', observed_next_exo) weighted by the known controllable kernel.
/// Returns 0 at the last step (next state undefined).
double counterfactual_target(const ControllableBlock& block, int horizon, int h,
                             int observed_next_exo, std::span<const double> f,
                             int n_exogenous, int s_dia, int a);

/// Convenience overload resolving the block from a model.
double counterfactual_target(const FactoredModel& model, int h, int observed_next_exo,
                             std::span<const double> f, int s_dia, int s_exo, int a);

/// Bernstein deviation bound for a sum of zero-mean variables bounded by B
/// with total variance `variance_sum`:
///   sqrt(2 * variance_sum * log(2/delta)) + (2B/3) * log(2/delta).
double bernstein_bound(double variance_sum, double bound_B, double delta);

/// The same bound divided by n, for use on the empirical mean.
double bernstein_mean_bound(double variance_sum, double bound_B, std::int64_t n,
                            double delta);

}  // namespace pcmdp
