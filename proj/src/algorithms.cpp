#include "pcmdp/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pcmdp {
namespace {

void put_f64(std::ostream& os, double x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

double get_f64(std::istream& is) {
  double x;
  is.read(reinterpret_cast<char*>(&x), sizeof x);
  if (!is) throw std::runtime_error("truncated checkpoint");
  return x;
}

int argmax_legal(const FactoredModel& m, int h, int s,
                 const std::function<double(int)>& q) {
  int best = -1;
  double best_q = 0.0;
  for (int a = 0; a < m.n_actions; ++a) {
    if (!m.is_legal(h, s, a)) continue;
    const double v = q(a);
    if (best < 0 || v > best_q) {
      best = a;
      best_q = v;
    }
  }
  if (best < 0) throw std::logic_error("state has no legal action");
  return best;
}

void materialize_greedy(const Learner& learner, const FactoredModel& m,
                        DeterministicPolicy& out) {
  out.actions.assign(m.horizon, std::vector<std::uint16_t>(m.factorization.total()));
  for (int h = 0; h < m.horizon; ++h)
    for (int s = 0; s < m.factorization.total(); ++s)
      out.actions[h][s] = static_cast<std::uint16_t>(learner.greedy(h, s));
}

}  // namespace

// --- ExAVI -------------------------------------------------------------------

ExAvi::ExAvi(const Env& env, const LearnerConfig& config)
    : stats_(env.horizon(), env.model->factorization.n_exogenous),
      work_(*env.model),
      replan_every_(config.replan_every) {
  if (replan_every_ < 1) throw std::invalid_argument("replan cadence must be >= 1");
  const int n_exo = work_.factorization.n_exogenous;
  // start from the uniform-fallback estimate at zero counts
  ExoMatrix uniform;
  uniform.n = n_exo;
  uniform.p.assign(static_cast<std::size_t>(n_exo) * n_exo, 1.0 / n_exo);
  uniform.support.assign(n_exo, {0, n_exo});
  work_.exogenous.steps.assign(std::max(1, work_.horizon - 1), uniform);
  replan();
}

void ExAvi::observe(int h, int s, int, double, int next_s) {
  const int e = work_.factorization.exogenous(s);
  if (next_s >= 0) {
    stats_.record_transition(h, e, work_.factorization.exogenous(next_s));
    touched_.push_back(h * work_.factorization.n_exogenous + e);
  } else {
    stats_.record_visit(h, e);
  }
}

void ExAvi::end_episode() {
  for (const int key : touched_) {
    const int n_exo = work_.factorization.n_exogenous;
    const int h = key / n_exo, e = key % n_exo;
    const ExoStatistics::Row row = stats_.empirical_row(h, e);
    std::copy(row.p.begin(), row.p.end(),
              work_.exogenous.steps[h].p.begin() + static_cast<std::size_t>(e) * n_exo);
  }
  touched_.clear();
  if (++since_replan_ >= replan_every_) {
    since_replan_ = 0;
    replan();
  }
}

void ExAvi::replan() {
  planner_.plan(work_, policy_);
  ++epoch_;
}

void ExAvi::checkpoint(std::ostream& os) const { stats_.dump(os); }

void ExAvi::restore(std::istream& is) {
  stats_ = ExoStatistics::load(is);
  if (stats_.horizon() != work_.horizon ||
      stats_.n_exogenous() != work_.factorization.n_exogenous)
    throw std::runtime_error("checkpoint does not match the environment");
  const int n_exo = work_.factorization.n_exogenous;
  for (int h = 0; h + 1 < work_.horizon; ++h)
    for (int e = 0; e < n_exo; ++e) {
      const ExoStatistics::Row row = stats_.empirical_row(h, e);
      if (row.unvisited) continue;
      std::copy(row.p.begin(), row.p.end(),
                work_.exogenous.steps[h].p.begin() + static_cast<std::size_t>(e) * n_exo);
    }
  touched_.clear();
  since_replan_ = 0;
  replan();
}

// --- UCBVI -------------------------------------------------------------------

Ucbvi::Ucbvi(const Env& env, const LearnerConfig& config)
    : model_(env.model),
      stats_(env.horizon(), env.n_actions()),
      bonus_c_(config.bonus_c) {
  const FactoredModel& m = *model_;
  const int S = m.factorization.total();
  log_term_ = std::log(static_cast<double>(S) * m.n_actions * m.horizon *
                       std::max(1, config.total_episodes) / config.delta);
  v_.resize(m.horizon);
  policy_.actions.resize(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    v_[h].assign(S, static_cast<double>(m.horizon - h));  // pure optimism
    policy_.actions[h].resize(S);
    for (int s = 0; s < S; ++s)
      policy_.actions[h][s] = static_cast<std::uint16_t>(m.first_legal_action(h, s));
  }
  episode_.reserve(m.horizon);
}

double Ucbvi::bonus(std::int64_t n) const {
  const auto idx = static_cast<std::size_t>(std::max<std::int64_t>(0, n));
  while (bonus_by_count_.size() <= idx) {
    const auto k = std::max<std::size_t>(1, bonus_by_count_.size());
    bonus_by_count_.push_back(bonus_c_ * model_->horizon *
                              std::sqrt(log_term_ / static_cast<double>(k)));
  }
  return bonus_by_count_[idx];
}

void Ucbvi::observe(int, int s, int a, double, int next_s) {
  episode_.push_back({s, a, next_s});
}

void Ucbvi::end_episode() {
  const FactoredModel& m = *model_;
  for (std::size_t h = 0; h < episode_.size(); ++h)
    stats_.record(static_cast<int>(h), episode_[h][0], episode_[h][1], episode_[h][2]);
  episode_.clear();

  for (int h = m.horizon - 1; h >= 0; --h) {
    const double cap = static_cast<double>(m.horizon - h);  // steps left incl. h
    const std::vector<double>* next_v = h + 1 < m.horizon ? &v_[h + 1] : nullptr;
    for (const auto& [s, entry] : stats_.states_at(h)) {
      int best = -1;
      double best_q = 0.0;
      for (int a = 0; a < m.n_actions; ++a) {
        if (!m.is_legal(h, s, a)) continue;
        double q = m.reward(h, s, a) + bonus(entry[a].count);
        if (next_v) {
          const double denom =
              static_cast<double>(std::max<std::int64_t>(1, entry[a].count));
          for (const auto& [next_s, c] : entry[a].successors)
            q += (static_cast<double>(c) / denom) * (*next_v)[next_s];
        }
        q = std::min(cap, q);
        if (best < 0 || q > best_q) {
          best = a;
          best_q = q;
        }
      }
      v_[h][s] = best_q;
      policy_.actions[h][s] = static_cast<std::uint16_t>(best);
    }
  }
  ++epoch_;
}

void Ucbvi::checkpoint(std::ostream& os) const {
  stats_.dump(os);
  for (const auto& row : v_)
    for (const double x : row) put_f64(os, x);
  for (const auto& row : policy_.actions)
    for (const std::uint16_t a : row) put_f64(os, a);
}

void Ucbvi::restore(std::istream& is) {
  stats_ = FullStatistics::load(is);
  if (stats_.horizon() != model_->horizon ||
      stats_.n_actions() != model_->n_actions)
    throw std::runtime_error("checkpoint does not match the environment");
  for (auto& row : v_)
    for (double& x : row) x = get_f64(is);
  for (auto& row : policy_.actions)
    for (std::uint16_t& a : row) a = static_cast<std::uint16_t>(get_f64(is));
  episode_.clear();
  ++epoch_;
}

// --- ExAQ --------------------------------------------------------------------

ExAq::ExAq(const Env& env, const LearnerConfig&)
    : model_(env.model),
      tables_(env.horizon(), env.model->factorization.n_controllable,
              env.model->factorization.n_exogenous, env.n_actions()),
      stats_(env.horizon(), env.model->factorization.n_exogenous),
      schedule_(env.horizon()) {
  episode_states_.assign(env.horizon(), -1);
}

int ExAq::greedy(int h, int s) const {
  return argmax_legal(*model_, h, s, [&](int a) { return tables_.q(h, s, a); });
}

void ExAq::observe(int h, int s, int, double, int) { episode_states_[h] = s; }

void ExAq::end_episode() {
  const FactoredModel& m = *model_;
  const StateFactorization& f = m.factorization;
  const int A = m.n_actions;
  // ascending in h: Q_h writes touch only V_h, so every V_{h+1} read below
  // still sees the episode-start snapshot
  for (int h = 0; h < m.horizon; ++h) {
    const int e = f.exogenous(episode_states_[h]);
    int next_e = -1;
    if (h < m.horizon - 1) {
      next_e = f.exogenous(episode_states_[h + 1]);
      stats_.record_transition(h, e, next_e);
    } else {
      stats_.record_visit(h, e);
    }
    const double alpha = schedule_.rate(stats_.visits(h, e));
    StepTables::Block& block = tables_.block_for_update(h, e);
    const StepTables::Block* next_block =
        next_e >= 0 ? tables_.block_if_allocated(h + 1, next_e) : nullptr;
    const double next_default = h + 1 < m.horizon ? tables_.default_value(h + 1) : 0.0;
    const ControllableBlock* cb = h < m.horizon - 1 ? &m.controllable.block(h, e) : nullptr;
    for (int d = 0; d < f.n_controllable; ++d) {
      const int s = f.encode(d, e);
      for (int a = 0; a < A; ++a) {
        double w = m.reward(h, s, a);
        if (cb) {
          for (int i = cb->row_begin(d, a); i < cb->row_end(d, a); ++i)
            w += cb->probs[i] *
                 (next_block ? next_block->v[cb->cols[i]] : next_default);
        }
        double& q = block.q[static_cast<std::size_t>(d) * A + a];
        q = (1.0 - alpha) * q + alpha * w;
      }
      double best = 0.0;
      bool any = false;
      for (int a = 0; a < A; ++a) {
        if (!m.is_legal(h, s, a)) continue;
        const double q = block.q[static_cast<std::size_t>(d) * A + a];
        if (!any || q > best) {
          best = q;
          any = true;
        }
      }
      block.v[d] = best;
    }
  }
  ++epoch_;
}

void ExAq::materialize_policy(DeterministicPolicy& out) const {
  materialize_greedy(*this, *model_, out);
}

void ExAq::checkpoint(std::ostream& os) const {
  tables_.dump(os);
  stats_.dump(os);
}

void ExAq::restore(std::istream& is) {
  tables_ = StepTables::load(is);
  stats_ = ExoStatistics::load(is);
  if (stats_.horizon() != model_->horizon ||
      stats_.n_exogenous() != model_->factorization.n_exogenous)
    throw std::runtime_error("checkpoint does not match the environment");
  ++epoch_;
}

// --- QL ----------------------------------------------------------------------

Ql::Ql(const Env& env, const LearnerConfig& config)
    : model_(env.model),
      tables_(env.horizon(), env.model->factorization.n_controllable,
              env.model->factorization.n_exogenous, env.n_actions()),
      alpha_(config.ql_alpha),
      eps_(config.eps_start),
      eps_min_(config.eps_min),
      eps_decay_(config.eps_decay) {
  if (alpha_ <= 0.0 || alpha_ > 1.0) throw std::invalid_argument("bad learning rate");
  if (config.eps_decay_type != "exp" && config.eps_decay_type != "mixed")
    throw std::invalid_argument("unknown epsilon decay type");
}

int Ql::act(int h, int s, Rng& rng) {
  if (rng.uniform() < eps_) {
    int n = 0;
    for (int a = 0; a < model_->n_actions; ++a)
      if (model_->is_legal(h, s, a)) ++n;
    if (n == 0) throw std::logic_error("state has no legal action");
    int k = rng.uniform_int(n);
    for (int a = 0;; ++a)
      if (model_->is_legal(h, s, a) && k-- == 0) return a;
  }
  return greedy(h, s);
}

int Ql::greedy(int h, int s) const {
  return argmax_legal(*model_, h, s, [&](int a) { return tables_.q(h, s, a); });
}

double Ql::best_next(int h, int s) const {
  double best = 0.0;
  bool any = false;
  for (int a = 0; a < model_->n_actions; ++a) {
    if (!model_->is_legal(h, s, a)) continue;
    const double q = tables_.q(h, s, a);
    if (!any || q > best) {
      best = q;
      any = true;
    }
  }
  return best;
}

void Ql::observe(int h, int s, int a, double r, int next_s) {
  const double target = r + (next_s >= 0 ? best_next(h + 1, next_s) : 0.0);
  StepTables::Block& block =
      tables_.block_for_update(h, model_->factorization.exogenous(s));
  double& q = block.q[static_cast<std::size_t>(model_->factorization.controllable(s)) *
                          model_->n_actions + a];
  q = (1.0 - alpha_) * q + alpha_ * target;
}

void Ql::end_episode() {
  eps_ = std::max(eps_min_, eps_ * eps_decay_);
  ++epoch_;
}

void Ql::materialize_policy(DeterministicPolicy& out) const {
  materialize_greedy(*this, *model_, out);
}

void Ql::checkpoint(std::ostream& os) const {
  tables_.dump(os);
  put_f64(os, eps_);
}

void Ql::restore(std::istream& is) {
  tables_ = StepTables::load(is);
  eps_ = get_f64(is);
  ++epoch_;
}

// --- Factory and references ----------------------------------------------------

std::unique_ptr<Learner> make_learner(const Env& env, const LearnerConfig& config) {
  if (config.algo == "exavi") return std::make_unique<ExAvi>(env, config);
  if (config.algo == "ucbvi") return std::make_unique<Ucbvi>(env, config);
  if (config.algo == "exaq") return std::make_unique<ExAq>(env, config);
  if (config.algo == "ql") return std::make_unique<Ql>(env, config);
  throw std::invalid_argument("unknown algorithm: " + config.algo);
}

DeterministicPolicy twap_policy(const Env& env) {
  if (env.name.rfind("trading", 0) != 0)
    throw std::invalid_argument("twap is defined for trading environments only");
  const FactoredModel& m = *env.model;
  const int n_exo = m.factorization.n_exogenous;
  const int u0 = m.factorization.n_controllable - 1;
  DeterministicPolicy pi;
  pi.actions.assign(m.horizon, std::vector<std::uint16_t>(m.factorization.total()));
  for (int h = 0; h < m.horizon; ++h) {
    const int target = static_cast<int>(
        std::lround(static_cast<double>(u0) * (m.horizon - 1 - h) / m.horizon));
    for (int s = 0; s < m.factorization.total(); ++s) {
      const int u = s / n_exo;
      pi.actions[h][s] = static_cast<std::uint16_t>(std::min(u, target));
    }
  }
  return pi;
}

}  // namespace pcmdp
