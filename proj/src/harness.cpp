#include "pcmdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pcmdp/environments.hpp"

namespace pcmdp {
namespace {

double initial_expectation(const FactoredModel& model, const std::vector<double>& v0) {
  double e = 0.0;
  for (const auto& [s, p] : model.initial) e += p * v0[s];
  return e;
}

bool model_based(const std::string& algo) { return algo == "exavi" || algo == "ucbvi"; }

std::vector<RunRecord> run_seed(const Env& env, const ExperimentConfig& config,
                                int seed, double v_star_norm, bool regret_on) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng train(derive_seed(config.master_seed, static_cast<std::uint64_t>(seed), 1));
  Rng eval(derive_seed(config.master_seed, static_cast<std::uint64_t>(seed), 2));
  LearnerConfig lc = config.learner;
  lc.total_episodes = config.episodes;
  std::unique_ptr<Learner> learner = make_learner(env, lc);

  FactoredPlanner eval_planner;
  DeterministicPolicy snapshot;
  RegretLedger ledger;
  std::vector<RunRecord> out;

  for (int k = 1; k <= config.episodes; ++k) {
    if (regret_on) {
      // value of the policy the learner is about to execute
      learner->materialize_policy(snapshot);
      const double v_pi = initial_expectation(*env.model,
                                              eval_planner.evaluate(*env.model, snapshot));
      ledger.update(v_star_norm, v_pi);
    }
    learner->begin_episode();
    int s = env.reset(train);
    double ep_return = 0.0;
    for (int h = 0; h < env.horizon(); ++h) {
      const int a = learner->act(h, s, train);
      const auto [next_s, r] = env.step(h, s, a, train);
      learner->observe(h, s, a, r, next_s);
      ep_return += r;
      s = next_s;
    }
    learner->end_episode();

    if (k % config.eval_every == 0 || k == config.episodes) {
      double eval_sum = 0.0;
      for (int i = 0; i < config.eval_episodes; ++i) {
        int es = env.reset(eval);
        for (int h = 0; h < env.horizon(); ++h) {
          const auto [next_s, r] = env.step(h, es, learner->greedy(h, es), eval);
          eval_sum += r;
          es = next_s;
        }
      }
      RunRecord rec;
      rec.seed = seed;
      rec.episode = k;
      rec.train_return = env.raw_return(ep_return);
      rec.eval_return = env.raw_return(eval_sum / config.eval_episodes);
      rec.has_regret = regret_on;
      rec.cum_regret = env.reward_scale * ledger.cumulative();  // offsets cancel
      rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  if (std::set<int>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("seeds must be distinct");
  if (eval_every < 1 || eval_episodes < 1) throw std::invalid_argument("bad eval cadence");
}

int worker_count() {
  if (const char* w = std::getenv("PCMDP_WORKERS")) {
    const int n = std::atoi(w);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Env& env) {
  config.validate();
  if (model_based(config.learner.algo) && env.name == "trading")
    throw std::invalid_argument(
        "model-based learners are not admissible on full-scale trading");

  const bool regret_on = config.regret && env.exportable;
  double v_star_norm = 0.0;
  if (regret_on) {
    FactoredPlanner planner;
    DeterministicPolicy pi;
    v_star_norm = initial_expectation(*env.model, planner.plan(*env.model, pi));
  }

  ExperimentResult result;
  result.env = env.name;
  result.algo = config.learner.algo;
  result.per_seed.resize(config.seeds.size());

  const int workers = std::min<int>(worker_count(), static_cast<int>(config.seeds.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i)
      result.per_seed[i] = run_seed(env, config, config.seeds[i], v_star_norm, regret_on);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < config.seeds.size();
             i = next.fetch_add(1))
          result.per_seed[i] =
              run_seed(env, config, config.seeds[i], v_star_norm, regret_on);
      });
    for (std::thread& t : pool) t.join();
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Env env = config.env_config_path.empty()
                      ? build_named_env(config.env_name)
                      : build_env_from_file(config.env_config_path);
  return run_experiment(config, env);
}

std::vector<AggregateRecord> aggregate(const ExperimentResult& result) {
  if (result.per_seed.empty()) return {};
  const std::size_t points = result.per_seed[0].size();
  for (const auto& run : result.per_seed)
    if (run.size() != points)
      throw std::invalid_argument("seed record streams are misaligned");
  std::vector<AggregateRecord> out;
  for (std::size_t i = 0; i < points; ++i) {
    AggregateRecord rec;
    rec.env = result.env;
    rec.algo = result.algo;
    rec.episode = result.per_seed[0][i].episode;
    double sum = 0.0;
    for (const auto& run : result.per_seed) {
      if (run[i].episode != rec.episode)
        throw std::invalid_argument("seed record streams are misaligned");
      sum += run[i].eval_return;
    }
    const double n = static_cast<double>(result.per_seed.size());
    rec.mean_eval = sum / n;
    if (result.per_seed.size() >= 2) {
      double ss = 0.0;
      for (const auto& run : result.per_seed) {
        const double d = run[i].eval_return - rec.mean_eval;
        ss += d * d;
      }
      const double half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      rec.ci_low = rec.mean_eval - half;
      rec.ci_high = rec.mean_eval + half;
      rec.has_ci = true;
    }
    out.push_back(rec);
  }
  return out;
}

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void emit_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "env,algo,seed,episode,train_return,eval_return,cum_regret,wall_ms\n";
  for (const auto& run : result.per_seed)
    for (const RunRecord& rec : run) {
      out << result.env << ',' << result.algo << ',' << rec.seed << ',' << rec.episode
          << ',' << fmt17(rec.train_return) << ',' << fmt17(rec.eval_return) << ','
          << (rec.has_regret ? fmt17(rec.cum_regret) : std::string()) << ','
          << rec.wall_ms << '\n';
    }
  if (!out.good()) throw std::runtime_error("write failure: " + path);
}

ExperimentResult parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty file: " + path);
  if (line != "env,algo,seed,episode,train_return,eval_return,cum_regret,wall_ms")
    throw std::runtime_error("unrecognized CSV header in " + path);

  ExperimentResult result;
  std::vector<RunRecord>* current = nullptr;
  int current_seed = -1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (line.back() == ',') f.push_back("");
    if (f.size() != 8)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 8 fields");
    if (result.per_seed.empty()) {
      result.env = f[0];
      result.algo = f[1];
    } else if (f[0] != result.env || f[1] != result.algo) {
      throw std::runtime_error(path + ": mixed env/algo streams");
    }
    RunRecord rec;
    rec.seed = std::stoi(f[2]);
    rec.episode = std::stoi(f[3]);
    rec.train_return = std::stod(f[4]);
    rec.eval_return = std::stod(f[5]);
    rec.has_regret = !f[6].empty();
    if (rec.has_regret) rec.cum_regret = std::stod(f[6]);
    rec.wall_ms = std::strtoll(f[7].c_str(), nullptr, 10);
    if (rec.seed != current_seed) {
      result.per_seed.emplace_back();
      current = &result.per_seed.back();
      current_seed = rec.seed;
    }
    current->push_back(rec);
  }
  return result;
}

void emit_aggregate_csv(const std::vector<AggregateRecord>& records,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "env,algo,episode,mean_eval,ci_low,ci_high\n";
  for (const AggregateRecord& rec : records) {
    out << rec.env << ',' << rec.algo << ',' << rec.episode << ',' << fmt17(rec.mean_eval)
        << ',' << (rec.has_ci ? fmt17(rec.ci_low) : std::string()) << ','
        << (rec.has_ci ? fmt17(rec.ci_high) : std::string()) << '\n';
  }
  if (!out.good()) throw std::runtime_error("write failure: " + path);
}

std::vector<ScalingResult> scaling_experiment(const std::vector<int>& branching_grid,
                                              const std::vector<int>& episode_grid,
                                              const LearnerConfig& learner,
                                              const std::vector<int>& seeds,
                                              std::uint64_t master_seed) {
  if (episode_grid.size() < 4)
    throw std::invalid_argument("need at least 4 episode grid points for a fit");
  double log_k = 0.0;
  for (const int k : episode_grid) log_k += std::log(static_cast<double>(k));
  const double k_mid = std::exp(log_k / static_cast<double>(episode_grid.size()));

  std::vector<ScalingResult> out;
  for (const int n : branching_grid) {
    // hardest instance for this sweep: every branch sits at the critical
    // gap |2p - 1| = sqrt(N / K). Wider gaps saturate (regret flattens),
    // narrower ones never resolve (regret stays linear); anchoring at the
    // grid's geometric mean keeps the whole sweep near the sqrt regime.
    const double gap = std::min(0.5, 2.0 * std::sqrt(n / k_mid));
    LowerBoundSpec spec;
    spec.branching = n;
    for (int i = 0; i < n; ++i)
      spec.leaf_probs.push_back(0.5 + 0.5 * gap * (i % 2 == 0 ? 1.0 : -1.0));
    const Env env = build_lower_bound(spec);

    ExperimentConfig config;
    config.learner = learner;
    config.episodes = *std::max_element(episode_grid.begin(), episode_grid.end());
    config.seeds = seeds;
    config.master_seed = master_seed;
    config.eval_every = episode_grid[0];
    config.regret = true;
    // cadence grid must contain every requested episode count
    for (const int k : episode_grid)
      if (k % config.eval_every != 0)
        throw std::invalid_argument("episode grid points must share a common cadence");
    const ExperimentResult result = run_experiment(config, env);

    ScalingResult sr;
    sr.branching = n;
    for (const int k : episode_grid) {
      double mean = 0.0;
      for (const auto& run : result.per_seed) {
        const auto it = std::find_if(run.begin(), run.end(),
                                     [&](const RunRecord& r) { return r.episode == k; });
        if (it == run.end() || !it->has_regret)
          throw std::logic_error("missing regret record at requested grid point");
        mean += it->cum_regret;
      }
      sr.mean_regret.push_back(mean / result.per_seed.size());
    }
    std::vector<double> ks(episode_grid.begin(), episode_grid.end());
    sr.fit = regret_slope(ks, sr.mean_regret);
    out.push_back(std::move(sr));
  }
  return out;
}

double optimal_value(const Env& env) {
  FactoredPlanner planner;
  DeterministicPolicy pi;
  return env.raw_return(initial_expectation(*env.model, planner.plan(*env.model, pi)));
}

double policy_value(const Env& env, const DeterministicPolicy& policy) {
  FactoredPlanner planner;
  return env.raw_return(initial_expectation(*env.model, planner.evaluate(*env.model, policy)));
}

}  // namespace pcmdp
