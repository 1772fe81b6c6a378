#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "pcmdp/core.hpp"
#include "pcmdp/rng.hpp"

namespace pcmdp {

/// A benchmark instance. `model` holds the full truth with rewards already
/// normalized into [0, 1]; learners may read its controllable kernel,
/// rewards and legality (these are given), but only the simulation methods
/// below may touch the exogenous kernel. `exportable` gates oracle use of
/// the full model (exact planning, per-episode regret).
struct Env {
  std::string name;
  bool desk_scale = false;
  std::shared_ptr<const FactoredModel> model;
  double reward_scale = 1.0;   // raw = scale * normalized + offset
  double reward_offset = 0.0;
  bool exportable = false;

  int n_states() const { return model->factorization.total(); }
  int n_actions() const { return model->n_actions; }
  int horizon() const { return model->horizon; }

  int reset(Rng& rng) const { return sample_initial_state(*model, rng); }

  /// Normalized reward and sampled successor; successor is -1 at the last
  /// step, where no next state exists.
  std::pair<int, double> step(int h, int s, int a, Rng& rng) const {
    const FactoredModel& m = *model;
    if (!m.is_legal(h, s, a)) throw std::invalid_argument("illegal action");
    const double r = m.reward(h, s, a);
    if (h >= m.horizon - 1) return {-1, r};
    const int d = m.factorization.controllable(s);
    const int e = m.factorization.exogenous(s);
    const ControllableBlock& block = m.controllable.block(h, e);
    int next_d = -1;
    double u = rng.uniform();
    for (int i = block.row_begin(d, a); i < block.row_end(d, a); ++i) {
      next_d = block.cols[i];
      u -= block.probs[i];
      if (u <= 0.0) break;
    }
    const ExoMatrix& exo = m.exogenous.at(h);
    const int next_e = rng.sample_dense({exo.row(e), static_cast<std::size_t>(exo.n)});
    return {m.factorization.encode(next_d, next_e), r};
  }

  double raw_return(double normalized_return) const {
    return reward_scale * normalized_return + reward_offset * model->horizon;
  }
};

}  // namespace pcmdp
