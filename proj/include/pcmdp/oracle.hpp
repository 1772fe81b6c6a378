#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pcmdp/core.hpp"

namespace pcmdp {

/// Log-log least-squares fit of regret against episode count.
struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (log K, log R)
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;
};

/// Requires >= 4 strictly increasing K values and positive regrets.
ScalingFit regret_slope(std::span<const double> episodes, std::span<const double> regrets);

/// Exact V*_1 per state by enumerating every deterministic step-dependent
/// policy; independent of the backward-induction planner. Throws when the
/// policy count exceeds `max_policies`.
std::vector<double> brute_force_optimal(const FactoredModel& model,
                                        double max_policies = 1e7);

/// Small random PCMDP for oracle cross-checks. Sizes drawn so that full
/// policy enumeration stays within `max_policies`.
FactoredModel random_model(Rng& rng, int max_controllable = 3, int max_exogenous = 3,
                           int max_actions = 2, int max_horizon = 3,
                           double max_policies = 1e7);

struct ExogeneityResult {
  bool skipped = false;   // degenerate table: at most one outcome observed
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Chi-square independence test of next-outcome counts against the action.
/// `sampler(a, rng)` draws one next exogenous outcome after playing a.
ExogeneityResult exogeneity_test(const std::function<int(int, Rng&)>& sampler,
                                 int n_actions, int n_outcomes,
                                 int samples_per_action, Rng& rng);

/// Empirical violation rate of the per-entry Bernstein envelope
///   sqrt(2 p (1 - p) L / n) + 4 L / (3 n),  L = log(2 |p| / delta),
/// for the count-based estimator of p over `trials` independent samples
/// of size n.
double concentration_coverage(std::span<const double> p, int n, double delta,
                              int trials, Rng& rng);

}  // namespace pcmdp
