#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcmdp/rng.hpp"

namespace pcmdp {

// Steps are 0-based internally: h in [0, H). Transitions exist for
// h in [0, H-1); rewards for every h.

/// Factorization of the global state into a controllable and an exogenous
/// coordinate. Encoding: s = s_dia * n_exogenous + s_exo, so states sharing
/// a controllable index are contiguous in the exogenous coordinate.
struct StateFactorization {
  int n_controllable = 0;
  int n_exogenous = 0;

  int total() const { return n_controllable * n_exogenous; }
  int encode(int s_dia, int s_exo) const { return s_dia * n_exogenous + s_exo; }
  int controllable(int s) const { return s / n_exogenous; }
  int exogenous(int s) const { return s % n_exogenous; }
};

using SparseDist = std::vector<std::pair<int, double>>;

/// Row-stochastic sparse rows over next controllable states, one row per
/// (s_dia, a) pair, grouped per exogenous state. CSR layout keeps the
/// per-exogenous-state block contiguous for the counterfactual sweep.
struct ControllableBlock {
  int n_controllable = 0;
  int n_actions = 0;
  std::vector<int> offsets;   // size n_controllable * n_actions + 1
  std::vector<int> cols;      // next controllable indices, strictly increasing per row
  std::vector<double> probs;

  int row_begin(int s_dia, int a) const { return offsets[s_dia * n_actions + a]; }
  int row_end(int s_dia, int a) const { return offsets[s_dia * n_actions + a + 1]; }
};

/// Per-step controllable kernel: one block per exogenous state. `steps`
/// has size 1 when the kernel is step-homogeneous; an inner vector has
/// size 1 when the kernel does not depend on the exogenous coordinate.
struct ControllableKernel {
  int n_exogenous = 0;
  std::vector<std::vector<ControllableBlock>> steps;  // [step][s_exo]

  const ControllableBlock& block(int h, int s_exo) const {
    const auto& row = steps[steps.size() == 1 ? 0 : static_cast<std::size_t>(h)];
    return row[row.size() == 1 ? 0 : static_cast<std::size_t>(s_exo)];
  }
};

/// Dense row-stochastic matrix over exogenous states, with per-row nonzero
/// ranges so banded kernels (e.g. a discretized random walk) iterate only
/// their support.
struct ExoMatrix {
  int n = 0;
  std::vector<double> p;                      // row-major n x n
  std::vector<std::pair<int, int>> support;   // [begin, end) per row

  const double* row(int i) const { return p.data() + static_cast<std::size_t>(i) * n; }
  void compute_support(double eps = 0.0);
};

struct ExogenousKernel {
  std::vector<ExoMatrix> steps;  // size 1 when step-homogeneous

  const ExoMatrix& at(int h) const {
    return steps[steps.size() == 1 ? 0 : static_cast<std::size_t>(h)];
  }
};

/// Full factored PCMDP: known controllable kernel, true exogenous kernel,
/// reward tables and horizon. Immutable after construction and safely
/// shareable across runs.
struct FactoredModel {
  StateFactorization factorization;
  int n_actions = 0;
  int horizon = 0;
  ControllableKernel controllable;
  ExogenousKernel exogenous;
  std::vector<std::vector<double>> rewards;      // [step or 0][s * A + a]
  std::vector<std::vector<std::uint8_t>> legal;  // empty => all legal; else [step or 0][s * A + a]
  std::vector<std::uint8_t> legal_final;         // nonempty: overrides `legal` at the last step
  double reward_min = 0.0;
  double reward_max = 1.0;
  SparseDist initial;  // distribution over global initial states

  double reward(int h, int s, int a) const {
    const auto& t = rewards[rewards.size() == 1 ? 0 : static_cast<std::size_t>(h)];
    return t[static_cast<std::size_t>(s) * n_actions + a];
  }
  bool is_legal(int h, int s, int a) const {
    if (!legal_final.empty() && h == horizon - 1)
      return legal_final[static_cast<std::size_t>(s) * n_actions + a] != 0;
    if (legal.empty()) return true;
    const auto& t = legal[legal.size() == 1 ? 0 : static_cast<std::size_t>(h)];
    return t[static_cast<std::size_t>(s) * n_actions + a] != 0;
  }
  int first_legal_action(int h, int s) const {
    for (int a = 0; a < n_actions; ++a)
      if (is_legal(h, s, a)) return a;
    return 0;
  }
  /// Checks row-stochasticity of both kernels; throws on violation.
  void validate(double tol = 1e-12) const;
};

/// Step-dependent deterministic policy, one action per (step, global state).
struct DeterministicPolicy {
  std::vector<std::vector<std::uint16_t>> actions;  // [h][s]

  int at(int h, int s) const { return actions[h][s]; }
  bool operator==(const DeterministicPolicy&) const = default;
};

struct Trajectory {
  std::vector<int> states;     // size H
  std::vector<int> actions;    // size H
  std::vector<double> rewards; // raw scale, size H
};

struct ValueSolution {
  std::vector<std::vector<double>> q;  // [h][s * A]
  std::vector<std::vector<double>> v;  // [h][s]
  DeterministicPolicy policy;
};

/// Reusable buffers for backward induction; one planner per run.
class FactoredPlanner {
 public:
  /// Backward recursion from h = H-1 to 0, writing the greedy policy
  /// (tie-break: lowest legal action index) into `policy`. Returns V_0.
  const std::vector<double>& plan(const FactoredModel& model, DeterministicPolicy& policy);

  /// Exact policy evaluation; returns V_0^pi.
  const std::vector<double>& evaluate(const FactoredModel& model,
                                      const DeterministicPolicy& policy);

 private:
  std::vector<double> v_next_, v_cur_, w_, q_;
};

// --- Operations -----------------------------------------------------------

/// Dense composition p(s'|s,a) = p_dia(s_dia'|s,a) * p_exo(s_exo'|s_exo),
/// laid out [s][a][s']. Intended for small instances; throws if
/// S * A * S exceeds `budget` entries.
std::vector<double> compose_full_kernel(const FactoredModel& model, int h,
                                        std::size_t budget = std::size_t{1} << 24);

/// One factored Bellman backup: Q_h(s,a) = r_h(s,a) + E[next_v]. `next_v`
/// must be all-zero for h = H-1.
std::vector<double> bellman_backup(const FactoredModel& model, int h,
                                   std::span<const double> next_v);

/// Exact finite-horizon planning; returns per-step Q*, V* and the greedy
/// policy. For large models prefer FactoredPlanner, which keeps only two
/// value layers alive.
ValueSolution value_iteration(const FactoredModel& model);

/// Exact per-step value tables of a fixed policy.
std::vector<std::vector<double>> evaluate_policy(const FactoredModel& model,
                                                 const DeterministicPolicy& policy);

/// Samples one episode from the model under a fixed policy. Deterministic
/// given the rng state.
Trajectory sample_episode(const FactoredModel& model, const DeterministicPolicy& policy,
                          Rng& rng);

int sample_initial_state(const FactoredModel& model, Rng& rng);

/// Cumulative-regret ledger. Both inputs must come from exact evaluation
/// against the true model; a negative increment beyond tolerance indicates
/// an oracle bug and throws.
class RegretLedger {
 public:
  void update(double v_star_at_s1, double v_pi_at_s1);
  double cumulative() const { return cumulative_; }
  int episodes() const { return episodes_; }

 private:
  double cumulative_ = 0.0;
  int episodes_ = 0;
};

struct NormalizedModel {
  FactoredModel model;   // rewards mapped into [0, 1]
  double scale = 1.0;    // raw = scale * normalized + offset (per step)
  double offset = 0.0;
  bool degenerate = false;  // r_max == r_min: all-zero rewards
};

/// Uniform per-step affine map of rewards into [0, 1]. Greedy policies are
/// invariant under the transform (tie-breaks included).
NormalizedModel normalize_rewards(const FactoredModel& model);

}  // namespace pcmdp
