#pragma once

// Small hand-built model fixtures shared by the test suites.

#include <vector>

#include "pcmdp/core.hpp"

namespace pcmdp::testing {

// 1 controllable state, 2 exogenous states forming a sticky chain, 2 actions.
// Only the exogenous part matters; rewards favor matching the exogenous state
// with the action, so the optimal policy depends on the learned kernel.
inline FactoredModel exo_chain(int horizon, double stay = 0.8) {
  FactoredModel m;
  m.factorization = {1, 2};
  m.n_actions = 2;
  m.horizon = horizon;

  ControllableBlock block;
  block.n_controllable = 1;
  block.n_actions = 2;
  block.offsets = {0, 1, 2};
  block.cols = {0, 0};
  block.probs = {1.0, 1.0};
  m.controllable.n_exogenous = 2;
  m.controllable.steps = {{block}};

  ExoMatrix exo;
  exo.n = 2;
  exo.p = {stay, 1.0 - stay, 1.0 - stay, stay};
  exo.compute_support();
  m.exogenous.steps = {exo};

  // reward 1 when a == s_exo, else 0
  m.rewards = {{1.0, 0.0, 0.0, 1.0}};
  m.reward_min = 0.0;
  m.reward_max = 1.0;
  m.initial = {{0, 1.0}};
  m.validate();
  return m;
}

// 2 controllable x 1 exogenous, 2 actions, deterministic transitions:
// action a moves to controllable state a. Reward only in state 1.
inline FactoredModel two_state(int horizon) {
  FactoredModel m;
  m.factorization = {2, 1};
  m.n_actions = 2;
  m.horizon = horizon;

  ControllableBlock block;
  block.n_controllable = 2;
  block.n_actions = 2;
  block.offsets = {0, 1, 2, 3, 4};
  block.cols = {0, 1, 0, 1};
  block.probs = {1.0, 1.0, 1.0, 1.0};
  m.controllable.n_exogenous = 1;
  m.controllable.steps = {{block}};

  ExoMatrix exo;
  exo.n = 1;
  exo.p = {1.0};
  exo.compute_support();
  m.exogenous.steps = {exo};

  m.rewards = {{0.0, 0.0, 1.0, 1.0}};  // r(s=1, *) = 1
  m.reward_min = 0.0;
  m.reward_max = 1.0;
  m.initial = {{0, 1.0}};
  m.validate();
  return m;
}

}  // namespace pcmdp::testing
