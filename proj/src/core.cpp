#include "pcmdp/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace pcmdp {

void ExoMatrix::compute_support(double eps) {
  support.resize(n);
  for (int i = 0; i < n; ++i) {
    const double* r = row(i);
    int b = 0, e = n;
    while (b < n && r[b] <= eps) ++b;
    while (e > b && r[e - 1] <= eps) --e;
    support[i] = {b, e};
  }
}

namespace {

void check_row(double sum, double tol, const char* what) {
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument(std::string(what) + ": row sums to " + std::to_string(sum));
}

}  // namespace

void FactoredModel::validate(double tol) const {
  const int s_dia = factorization.n_controllable;
  const int s_exo = factorization.n_exogenous;
  for (const auto& step : exogenous.steps) {
    if (step.n != s_exo) throw std::invalid_argument("exogenous kernel size mismatch");
    for (int i = 0; i < s_exo; ++i) {
      double sum = 0.0;
      for (int j = 0; j < s_exo; ++j) {
        const double p = step.row(i)[j];
        if (p < -tol || p > 1.0 + tol)
          throw std::invalid_argument("exogenous probability out of [0,1]");
        sum += p;
      }
      check_row(sum, tol, "exogenous kernel");
    }
  }
  for (const auto& step : controllable.steps) {
    if (static_cast<int>(step.size()) != s_exo && step.size() != 1)
      throw std::invalid_argument("controllable kernel block count mismatch");
    for (const auto& block : step) {
      for (int d = 0; d < s_dia; ++d) {
        for (int a = 0; a < n_actions; ++a) {
          double sum = 0.0;
          int prev = -1;
          for (int i = block.row_begin(d, a); i < block.row_end(d, a); ++i) {
            if (block.cols[i] <= prev)
              throw std::invalid_argument("controllable support not strictly increasing");
            prev = block.cols[i];
            if (block.cols[i] < 0 || block.cols[i] >= s_dia)
              throw std::invalid_argument("controllable support index out of range");
            if (block.probs[i] < -tol)
              throw std::invalid_argument("negative controllable probability");
            sum += block.probs[i];
          }
          check_row(sum, tol, "controllable kernel");
        }
      }
    }
  }
  // Bounds cover legal (s, a) pairs; masked actions are excluded.
  for (std::size_t step = 0; step < rewards.size(); ++step) {
    const int h = rewards.size() == 1 ? 0 : static_cast<int>(step);
    for (int s = 0; s < factorization.total(); ++s)
      for (int a = 0; a < n_actions; ++a) {
        if (!is_legal(h, s, a)) continue;
        const double r = rewards[step][static_cast<std::size_t>(s) * n_actions + a];
        if (r < reward_min - 1e-9 || r > reward_max + 1e-9)
          throw std::invalid_argument("reward entry outside analytic bounds");
      }
  }
}

std::vector<double> compose_full_kernel(const FactoredModel& model, int h,
                                        std::size_t budget) {
  const int s_total = model.factorization.total();
  const int s_exo = model.factorization.n_exogenous;
  const int a_n = model.n_actions;
  const std::size_t need = static_cast<std::size_t>(s_total) * a_n * s_total;
  if (need > budget)
    throw std::runtime_error("compose_full_kernel: " + std::to_string(need) +
                             " entries exceed budget of " + std::to_string(budget));
  if (h < 0 || h >= model.horizon - 1) throw std::out_of_range("compose_full_kernel: step");

  std::vector<double> full(need, 0.0);
  const ExoMatrix& exo = model.exogenous.at(h);
  for (int s = 0; s < s_total; ++s) {
    const int d = model.factorization.controllable(s);
    const int e = model.factorization.exogenous(s);
    const ControllableBlock& block = model.controllable.block(h, e);
    const double* exo_row = exo.row(e);
    for (int a = 0; a < a_n; ++a) {
      double* out = full.data() + (static_cast<std::size_t>(s) * a_n + a) * s_total;
      for (int i = block.row_begin(d, a); i < block.row_end(d, a); ++i) {
        const int nd = block.cols[i];
        const double pd = block.probs[i];
        for (int ne = 0; ne < s_exo; ++ne)
          out[nd * s_exo + ne] = pd * exo_row[ne];
      }
    }
  }
  return full;
}

namespace {

// Q_h(s,a) for all (s,a) given V_{h+1}; `w` scratch holds the exogenous
// expectation E_{s_exo'}[V(s_dia', s_exo')] per (s_dia', s_exo).
void backup_into(const FactoredModel& model, int h, std::span<const double> next_v,
                 std::vector<double>& w, std::vector<double>& q) {
  const int s_dia = model.factorization.n_controllable;
  const int s_exo = model.factorization.n_exogenous;
  const int a_n = model.n_actions;
  const int s_total = s_dia * s_exo;
  q.resize(static_cast<std::size_t>(s_total) * a_n);

  const bool terminal = (h == model.horizon - 1);
  if (!terminal) {
    const ExoMatrix& exo = model.exogenous.at(h);
    w.resize(static_cast<std::size_t>(s_total));
    for (int e = 0; e < s_exo; ++e) {
      const double* row = exo.row(e);
      const auto [b, end] = exo.support[e];
      for (int nd = 0; nd < s_dia; ++nd) {
        const double* v = next_v.data() + static_cast<std::size_t>(nd) * s_exo;
        double acc = 0.0;
        for (int ne = b; ne < end; ++ne) acc += row[ne] * v[ne];
        w[static_cast<std::size_t>(nd) * s_exo + e] = acc;
      }
    }
  }

  const auto& rtab = model.rewards[model.rewards.size() == 1 ? 0 : static_cast<std::size_t>(h)];
  for (int e = 0; e < s_exo; ++e) {
    const ControllableBlock& block = terminal ? model.controllable.block(0, e)
                                              : model.controllable.block(h, e);
    for (int d = 0; d < s_dia; ++d) {
      const int s = d * s_exo + e;
      double* qrow = q.data() + static_cast<std::size_t>(s) * a_n;
      const double* rrow = rtab.data() + static_cast<std::size_t>(s) * a_n;
      if (terminal) {
        std::memcpy(qrow, rrow, sizeof(double) * a_n);
        continue;
      }
      for (int a = 0; a < a_n; ++a) {
        double acc = rrow[a];
        for (int i = block.row_begin(d, a); i < block.row_end(d, a); ++i)
          acc += block.probs[i] * w[static_cast<std::size_t>(block.cols[i]) * s_exo + e];
        qrow[a] = acc;
      }
    }
  }
}

}  // namespace

std::vector<double> bellman_backup(const FactoredModel& model, int h,
                                   std::span<const double> next_v) {
  if (h < 0 || h >= model.horizon) throw std::out_of_range("bellman_backup: step");
  std::vector<double> w, q;
  if (h == model.horizon - 1) {
    for (double v : next_v)
      if (v != 0.0) throw std::invalid_argument("bellman_backup: terminal step expects zero next_v");
  }
  backup_into(model, h, next_v, w, q);
  return q;
}

const std::vector<double>& FactoredPlanner::plan(const FactoredModel& model,
                                                 DeterministicPolicy& policy) {
  const int s_total = model.factorization.total();
  const int a_n = model.n_actions;
  const int horizon = model.horizon;
  policy.actions.resize(horizon);
  v_next_.assign(s_total, 0.0);
  v_cur_.resize(s_total);
  for (int h = horizon - 1; h >= 0; --h) {
    backup_into(model, h, v_next_, w_, q_);
    auto& pol = policy.actions[h];
    pol.resize(s_total);
    for (int s = 0; s < s_total; ++s) {
      const double* qrow = q_.data() + static_cast<std::size_t>(s) * a_n;
      int best = -1;
      double best_q = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < a_n; ++a) {
        if (!model.is_legal(h, s, a)) continue;
        if (qrow[a] > best_q) {
          best_q = qrow[a];
          best = a;
        }
      }
      pol[s] = static_cast<std::uint16_t>(best < 0 ? 0 : best);
      v_cur_[s] = best < 0 ? 0.0 : best_q;
    }
    std::swap(v_cur_, v_next_);
  }
  return v_next_;
}

const std::vector<double>& FactoredPlanner::evaluate(const FactoredModel& model,
                                                     const DeterministicPolicy& policy) {
  const int s_dia = model.factorization.n_controllable;
  const int s_exo = model.factorization.n_exogenous;
  const int s_total = s_dia * s_exo;
  const int horizon = model.horizon;
  v_next_.assign(s_total, 0.0);
  v_cur_.resize(s_total);
  for (int h = horizon - 1; h >= 0; --h) {
    const bool terminal = (h == horizon - 1);
    if (!terminal) {
      const ExoMatrix& exo = model.exogenous.at(h);
      w_.resize(s_total);
      for (int e = 0; e < s_exo; ++e) {
        const double* row = exo.row(e);
        const auto [b, end] = exo.support[e];
        for (int nd = 0; nd < s_dia; ++nd) {
          const double* v = v_next_.data() + static_cast<std::size_t>(nd) * s_exo;
          double acc = 0.0;
          for (int ne = b; ne < end; ++ne) acc += row[ne] * v[ne];
          w_[static_cast<std::size_t>(nd) * s_exo + e] = acc;
        }
      }
    }
    const auto& pol = policy.actions[h];
    for (int s = 0; s < s_total; ++s) {
      const int a = pol[s];
      double acc = model.reward(h, s, a);
      if (!terminal) {
        const int d = s / s_exo, e = s % s_exo;
        const ControllableBlock& block = model.controllable.block(h, e);
        for (int i = block.row_begin(d, a); i < block.row_end(d, a); ++i)
          acc += block.probs[i] * w_[static_cast<std::size_t>(block.cols[i]) * s_exo + e];
      }
      v_cur_[s] = acc;
    }
    std::swap(v_cur_, v_next_);
  }
  return v_next_;
}

ValueSolution value_iteration(const FactoredModel& model) {
  const int s_total = model.factorization.total();
  const int a_n = model.n_actions;
  const int horizon = model.horizon;
  ValueSolution out;
  out.q.resize(horizon);
  out.v.resize(horizon);
  out.policy.actions.resize(horizon);
  std::vector<double> v_next(s_total, 0.0), w;
  for (int h = horizon - 1; h >= 0; --h) {
    backup_into(model, h, v_next, w, out.q[h]);
    out.v[h].resize(s_total);
    out.policy.actions[h].resize(s_total);
    for (int s = 0; s < s_total; ++s) {
      const double* qrow = out.q[h].data() + static_cast<std::size_t>(s) * a_n;
      int best = -1;
      double best_q = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < a_n; ++a) {
        if (!model.is_legal(h, s, a)) continue;
        if (qrow[a] > best_q) {
          best_q = qrow[a];
          best = a;
        }
      }
      out.policy.actions[h][s] = static_cast<std::uint16_t>(best < 0 ? 0 : best);
      out.v[h][s] = best < 0 ? 0.0 : best_q;
    }
    v_next = out.v[h];
  }
  return out;
}

std::vector<std::vector<double>> evaluate_policy(const FactoredModel& model,
                                                 const DeterministicPolicy& policy) {
  const int s_total = model.factorization.total();
  const int horizon = model.horizon;
  std::vector<std::vector<double>> v(horizon);
  FactoredPlanner planner;
  // Backward pass, capturing each layer. Reuses the planner's buffers by
  // recomputing from the bottom; horizon is small wherever this API is used.
  std::vector<double> v_next(s_total, 0.0), w;
  for (int h = horizon - 1; h >= 0; --h) {
    const bool terminal = (h == horizon - 1);
    const int s_exo = model.factorization.n_exogenous;
    if (!terminal) {
      const ExoMatrix& exo = model.exogenous.at(h);
      w.resize(s_total);
      for (int e = 0; e < s_exo; ++e) {
        const double* row = exo.row(e);
        const auto [b, end] = exo.support[e];
        for (int nd = 0; nd < model.factorization.n_controllable; ++nd) {
          const double* vn = v_next.data() + static_cast<std::size_t>(nd) * s_exo;
          double acc = 0.0;
          for (int ne = b; ne < end; ++ne) acc += row[ne] * vn[ne];
          w[static_cast<std::size_t>(nd) * s_exo + e] = acc;
        }
      }
    }
    v[h].resize(s_total);
    for (int s = 0; s < s_total; ++s) {
      const int a = policy.at(h, s);
      double acc = model.reward(h, s, a);
      if (!terminal) {
        const int d = s / s_exo, e = s % s_exo;
        const ControllableBlock& block = model.controllable.block(h, e);
        for (int i = block.row_begin(d, a); i < block.row_end(d, a); ++i)
          acc += block.probs[i] * w[static_cast<std::size_t>(block.cols[i]) * s_exo + e];
      }
      v[h][s] = acc;
    }
    v_next = v[h];
  }
  return v;
}

int sample_initial_state(const FactoredModel& model, Rng& rng) {
  return rng.sample_sparse(model.initial);
}

Trajectory sample_episode(const FactoredModel& model, const DeterministicPolicy& policy,
                          Rng& rng) {
  Trajectory traj;
  const int horizon = model.horizon;
  traj.states.resize(horizon);
  traj.actions.resize(horizon);
  traj.rewards.resize(horizon);
  const int s_exo = model.factorization.n_exogenous;
  int s = sample_initial_state(model, rng);
  for (int h = 0; h < horizon; ++h) {
    traj.states[h] = s;
    const int a = policy.at(h, s);
    traj.actions[h] = a;
    traj.rewards[h] = model.reward(h, s, a);
    if (h + 1 < horizon) {
      const int d = s / s_exo, e = s % s_exo;
      const ControllableBlock& block = model.controllable.block(h, e);
      // Controllable draw first, then the independent exogenous draw.
      double u = rng.uniform();
      int nd = block.cols[block.row_end(d, a) - 1];
      for (int i = block.row_begin(d, a); i < block.row_end(d, a); ++i) {
        u -= block.probs[i];
        if (u < 0.0) {
          nd = block.cols[i];
          break;
        }
      }
      const ExoMatrix& exo = model.exogenous.at(h);
      const int ne = rng.sample_dense(std::span<const double>(exo.row(e), exo.n));
      s = nd * s_exo + ne;
    }
  }
  return traj;
}

void RegretLedger::update(double v_star_at_s1, double v_pi_at_s1) {
  const double increment = v_star_at_s1 - v_pi_at_s1;
  if (increment < -1e-9)
    throw std::logic_error("regret increment negative beyond tolerance: " +
                           std::to_string(increment));
  cumulative_ += std::max(increment, 0.0);
  ++episodes_;
}

NormalizedModel normalize_rewards(const FactoredModel& model) {
  NormalizedModel out;
  out.model = model;
  const double range = model.reward_max - model.reward_min;
  if (range <= 0.0) {
    out.degenerate = true;
    out.scale = 1.0;
    out.offset = model.reward_min;
    for (auto& table : out.model.rewards) std::fill(table.begin(), table.end(), 0.0);
  } else {
    out.scale = range;
    out.offset = model.reward_min;
    for (auto& table : out.model.rewards)
      for (double& r : table) r = (r - model.reward_min) / range;
  }
  out.model.reward_min = 0.0;
  out.model.reward_max = out.degenerate ? 0.0 : 1.0;
  return out;
}

}  // namespace pcmdp
