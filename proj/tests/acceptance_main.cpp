// End-to-end acceptance gate: twelve checks, one pass/fail line each.
// Slow by design; run via the `acceptance` ctest entry, not the unit suites.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pcmdp/core.hpp"
#include "pcmdp/env.hpp"
#include "pcmdp/environments.hpp"
#include "pcmdp/estimation.hpp"
#include "pcmdp/harness.hpp"
#include "pcmdp/oracle.hpp"

using namespace pcmdp;

namespace {

std::filesystem::path g_out_dir = "acceptance_out";

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Line {
  bool ok = false;
  std::string detail;
};

std::vector<int> ten_seeds() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// mean eval return across seeds at one cadence episode
double mean_eval_at(const ExperimentResult& r, int episode) {
  double sum = 0.0;
  int found = 0;
  for (const auto& seed_records : r.per_seed)
    for (const RunRecord& rec : seed_records)
      if (rec.episode == episode) {
        sum += rec.eval_return;
        ++found;
      }
  if (found != static_cast<int>(r.per_seed.size()))
    throw std::runtime_error("missing cadence point " + std::to_string(episode));
  return sum / found;
}

// mean eval return across seeds and all cadence points inside the final
// `window` training episodes
double tail_mean_eval(const ExperimentResult& r, int total_episodes, int window) {
  double sum = 0.0;
  int n = 0;
  for (const auto& seed_records : r.per_seed)
    for (const RunRecord& rec : seed_records)
      if (rec.episode > total_episodes - window) {
        sum += rec.eval_return;
        ++n;
      }
  return sum / n;
}

double mean_final_regret(const ExperimentResult& r) {
  double sum = 0.0;
  for (const auto& seed_records : r.per_seed) sum += seed_records.back().cum_regret;
  return sum / static_cast<double>(r.per_seed.size());
}

// first cadence episode whose cross-seed mean eval reaches the threshold
int first_crossing(const ExperimentResult& r, int eval_every, int total, double threshold) {
  for (int ep = eval_every; ep <= total; ep += eval_every)
    if (mean_eval_at(r, ep) >= threshold) return ep;
  return std::numeric_limits<int>::max();
}

ExperimentConfig taxi_config(const std::string& algo, int episodes) {
  ExperimentConfig c;
  c.env_name = "taxi";
  c.learner.algo = algo;
  c.episodes = episodes;
  c.seeds = ten_seeds();
  c.eval_every = 50;
  c.eval_episodes = 50;
  return c;
}

std::string strip_wall_column(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find_last_of(',');
    out << line.substr(0, comma) << '\n';
  }
  return out.str();
}

// --- criteria ---------------------------------------------------------------

Line c1_planner_vs_brute_force() {
  Rng rng(derive_seed(9001, 0));
  double max_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const FactoredModel m = random_model(rng, 3, 3, 2, 3);
    const std::vector<double> exact = brute_force_optimal(m);
    const ValueSolution sol = value_iteration(m);
    for (int s = 0; s < m.factorization.total(); ++s)
      max_err = std::max(max_err, std::abs(sol.v[0][s] - exact[s]));
  }
  return {max_err <= 1e-9, fmt("max |V*_vi - V*_enum| = %.3g over 50 models", max_err)};
}

Line c2_counterfactual_unbiased() {
  Rng rng(derive_seed(9002, 0));
  const int n_draws = 100000;
  double worst_z = 0.0;
  for (int tuple = 0; tuple < 20; ++tuple) {
    FactoredModel m = random_model(rng, 3, 3, 2, 3);
    while (m.horizon < 2) m = random_model(rng, 3, 3, 2, 3);
    const int S = m.factorization.total();
    std::vector<double> f(S);
    for (double& x : f) x = rng.uniform();
    const int d = rng.uniform_int(m.factorization.n_controllable);
    const int e = rng.uniform_int(m.factorization.n_exogenous);
    int a = rng.uniform_int(m.n_actions);
    if (!m.is_legal(0, m.factorization.encode(d, e), a))
      a = m.first_legal_action(0, m.factorization.encode(d, e));

    // exact expectation through the dense composed kernel
    const auto kernel = compose_full_kernel(m, 0);
    const int s = m.factorization.encode(d, e);
    double exact = 0.0;
    for (int ns = 0; ns < S; ++ns)
      exact += kernel[(static_cast<std::size_t>(s) * m.n_actions + a) * S + ns] * f[ns];

    // Monte-Carlo over exogenous draws
    const ExoMatrix& exo = m.exogenous.steps[0];
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n_draws; ++i) {
      double u = rng.uniform(), acc = 0.0;
      int ne = exo.n - 1;
      for (int j = 0; j < exo.n; ++j) {
        acc += exo.p[static_cast<std::size_t>(e) * exo.n + j];
        if (u < acc) { ne = j; break; }
      }
      const double t = counterfactual_target(m, 0, ne, f, d, e, a);
      sum += t;
      sumsq += t * t;
    }
    const double mean = sum / n_draws;
    const double var = std::max(0.0, sumsq / n_draws - mean * mean);
    const double se = std::sqrt(var / n_draws);
    const double z = std::abs(mean - exact) / std::max(se, 1e-12);
    if (se < 1e-12 && std::abs(mean - exact) > 1e-9)
      return {false, fmt("tuple %d: deterministic target off by %.3g", tuple, mean - exact)};
    worst_z = std::max(worst_z, se < 1e-12 ? 0.0 : z);
    if (z > 3.0 && se >= 1e-12)
      return {false, fmt("tuple %d: |mean - exact| = %.3g = %.2f se", tuple,
                         std::abs(mean - exact), z)};
  }
  return {true, fmt("20 tuples x 1e5 draws, worst deviation %.2f se", worst_z)};
}

Line c3_learning_rate_identities() {
  const int T = 10000;
  for (const int H : {1, 5, 10}) {
    const LearningRateSchedule sched(H);
    std::vector<double> cur;        // cur[i-1] = alpha_t^i at the current t
    std::vector<double> acc(T + 1, 0.0);  // partial sums over t for fixed i
    cur.reserve(T);
    for (int t = 1; t <= T; ++t) {
      const double alpha = sched.rate(t);
      for (double& x : cur) x *= 1.0 - alpha;
      cur.push_back(alpha);
      double sum = 0.0, weighted = 0.0, max_w = 0.0, sq = 0.0;
      for (int i = 1; i <= t; ++i) {
        const double w = cur[i - 1];
        sum += w;
        weighted += w / std::sqrt(static_cast<double>(i));
        max_w = std::max(max_w, w);
        sq += w * w;
        acc[i] += w;
      }
      const double rt = std::sqrt(static_cast<double>(t));
      if (std::abs(sum - 1.0) > 1e-9)
        return {false, fmt("H=%d t=%d: weight sum %.12f != 1", H, t, sum)};
      if (weighted < 1.0 / rt - 1e-12 || weighted > 2.0 / rt + 1e-12)
        return {false, fmt("H=%d t=%d: sqrt-weighted sum outside [1,2]/sqrt(t)", H, t)};
      if (max_w > 2.0 * H / t + 1e-12 || sq > 2.0 * H / t + 1e-12)
        return {false, fmt("H=%d t=%d: max/squared weight above 2H/t", H, t)};
    }
    for (int i = 1; i <= T; ++i)
      if (acc[i] > 1.0 + 1.0 / H + 1e-9)
        return {false, fmt("H=%d i=%d: partial sum %.12f > 1 + 1/H", H, i, acc[i])};
  }
  return {true, "all four identities hold for H in {1,5,10}, t <= 1e4"};
}

Line c4_concentration_coverage() {
  const Env env = build_named_env("taxi");
  const ExoMatrix& exo = env.model->exogenous.steps[0];
  const int e = env.model->factorization.exogenous(env.model->initial.front().first);
  const std::vector<double> p(exo.p.begin() + static_cast<std::ptrdiff_t>(e) * exo.n,
                              exo.p.begin() + static_cast<std::ptrdiff_t>(e + 1) * exo.n);
  Rng rng(derive_seed(9004, 0));
  const double rate = concentration_coverage(p, 10000, 0.05, 1000, rng);
  return {rate <= 0.06, fmt("violation rate %.4f (allowed 0.06) on an %d-entry row",
                            rate, exo.n)};
}

// shared with criterion 12
ExperimentResult g_c5_exavi, g_c5_ucbvi;
double g_taxi_threshold = 0.0;

Line c5_taxi_model_based_ordering() {
  const Env env = build_named_env("taxi");
  g_taxi_threshold = 0.95 * optimal_value(env);
  g_c5_exavi = run_experiment(taxi_config("exavi", 5000), env);
  g_c5_ucbvi = run_experiment(taxi_config("ucbvi", 5000), env);
  emit_csv(g_c5_exavi, (g_out_dir / "taxi_exavi.csv").string());
  emit_csv(g_c5_ucbvi, (g_out_dir / "taxi_ucbvi.csv").string());

  const double exavi_100 = mean_eval_at(g_c5_exavi, 100);
  double ucbvi_best = -std::numeric_limits<double>::infinity();
  for (int ep = 50; ep <= 1000; ep += 50)
    ucbvi_best = std::max(ucbvi_best, mean_eval_at(g_c5_ucbvi, ep));
  const bool ok = exavi_100 >= g_taxi_threshold && ucbvi_best < g_taxi_threshold;
  return {ok, fmt("threshold %.2f, exavi@100 = %.2f, ucbvi best through ep 1000 = %.2f",
                  g_taxi_threshold, exavi_100, ucbvi_best)};
}

Line c6_taxi_model_free_ordering() {
  const Env env = build_named_env("taxi");
  ExperimentConfig exaq = taxi_config("exaq", 5000);
  ExperimentConfig ql = taxi_config("ql", 15000);
  ql.learner.ql_alpha = 0.05;
  ql.learner.eps_decay = 0.99985;
  ql.learner.eps_min = 0.0;
  const ExperimentResult r_exaq = run_experiment(exaq, env);
  const ExperimentResult r_ql = run_experiment(ql, env);
  const int cross_exaq = first_crossing(r_exaq, 50, 5000, g_taxi_threshold);
  const int cross_ql = first_crossing(r_ql, 50, 15000, g_taxi_threshold);
  // QL never crossing counts as crossing beyond its run length
  const long ql_episodes = cross_ql == std::numeric_limits<int>::max() ? 15001L : cross_ql;
  const bool ok = cross_exaq != std::numeric_limits<int>::max() &&
                  10L * cross_exaq <= ql_episodes;
  return {ok, fmt("95%% crossing: exaq ep %d, ql ep %ld", cross_exaq, ql_episodes)};
}

Line c7_regret_slope() {
  const std::vector<int> K = {1000, 2000, 4000, 8000, 16000};
  LearnerConfig exaq;
  exaq.algo = "exaq";
  LearnerConfig ql;
  ql.algo = "ql";
  const auto r_exaq = scaling_experiment({4}, K, exaq, ten_seeds());
  const auto r_ql = scaling_experiment({4}, K, ql, ten_seeds());
  const double s_exaq = r_exaq[0].fit.slope;
  const double s_ql = r_ql[0].fit.slope;
  const double c_exaq = r_exaq[0].mean_regret.back();
  const double c_ql = r_ql[0].mean_regret.back();
  const bool slope_ok = s_exaq >= 0.35 && s_exaq <= 0.65;
  const bool ql_worse = s_ql >= 2.0 * s_exaq || c_ql >= 2.0 * c_exaq;
  return {slope_ok && ql_worse,
          fmt("slopes exaq %.3f (band [0.35,0.65]) ql %.3f; regret@16k exaq %.1f ql %.1f",
              s_exaq, s_ql, c_exaq, c_ql)};
}

Line c8_branching_scaling() {
  const std::vector<int> K = {1000, 2000, 4000, 8000};
  LearnerConfig exaq;
  exaq.algo = "exaq";
  const auto res = scaling_experiment({2, 4, 8}, K, exaq, ten_seeds());
  const double r2 = res[0].mean_regret.back();
  const double r4 = res[1].mean_regret.back();
  const double r8 = res[2].mean_regret.back();
  const double ratio = r8 / r2;
  const bool ok = r2 < r4 && r4 < r8 && ratio >= 1.4 && ratio <= 3.5;
  return {ok, fmt("regret@8k: N=2 %.1f, N=4 %.1f, N=8 %.1f; R(8)/R(2) = %.2f", r2, r4, r8, ratio)};
}

Line c9_desk_trading_ordering() {
  ExperimentConfig base;
  base.env_name = "trading_desk";
  base.episodes = 2000;
  base.seeds = ten_seeds();
  base.eval_every = 50;
  base.eval_episodes = 50;
  base.regret = true;

  ExperimentConfig exaq = base;
  exaq.learner.algo = "exaq";
  ExperimentConfig ql = base;
  ql.learner.algo = "ql";
  ql.learner.ql_alpha = 1.0;
  ql.learner.eps_decay = 0.9998;
  ql.learner.eps_min = 0.05;
  ql.learner.eps_decay_type = "mixed";

  const ExperimentResult r_exaq = run_experiment(exaq);
  const ExperimentResult r_ql = run_experiment(ql);

  int wins = 0;
  for (std::size_t i = 0; i < r_exaq.per_seed.size(); ++i) {
    auto eval_at = [](const std::vector<RunRecord>& recs, int ep) {
      for (const RunRecord& r : recs)
        if (r.episode == ep) return r.eval_return;
      throw std::runtime_error("missing cadence point");
    };
    if (eval_at(r_exaq.per_seed[i], 500) >= eval_at(r_ql.per_seed[i], 500)) ++wins;
  }
  const double reg_exaq = mean_final_regret(r_exaq);
  const double reg_ql = mean_final_regret(r_ql);

  // the full-scale instance has no exact regret oracle; exercise it as a smoke run
  ExperimentConfig smoke;
  smoke.env_name = "trading";
  smoke.learner.algo = "ql";
  smoke.episodes = 10;
  smoke.seeds = {1};
  smoke.eval_every = 10;
  smoke.eval_episodes = 2;
  run_experiment(smoke);

  const bool ok = wins >= 8 && reg_exaq <= 0.5 * reg_ql;
  return {ok, fmt("exaq >= ql at ep 500 in %d/10 seeds; regret@2000 exaq %.1f ql %.1f",
                  wins, reg_exaq, reg_ql)};
}

Line c10_elevator_ordering() {
  const Env env = build_named_env("elevator");
  auto cfg = [&](const std::string& algo, int episodes) {
    ExperimentConfig c;
    c.env_name = "elevator";
    c.learner.algo = algo;
    c.episodes = episodes;
    c.seeds = ten_seeds();
    c.eval_every = 50;
    c.eval_episodes = 50;
    return c;
  };
  ExperimentConfig ql = cfg("ql", 7000);
  ql.learner.ql_alpha = 0.01;
  ql.learner.eps_decay = 0.9995;
  ql.learner.eps_min = 0.05;

  const ExperimentResult r_exavi = run_experiment(cfg("exavi", 5000), env);
  const ExperimentResult r_ucbvi = run_experiment(cfg("ucbvi", 5000), env);
  const ExperimentResult r_exaq = run_experiment(cfg("exaq", 500), env);
  const ExperimentResult r_ql = run_experiment(ql, env);

  const double asym_exavi = tail_mean_eval(r_exavi, 5000, 500);
  const double asym_ucbvi = tail_mean_eval(r_ucbvi, 5000, 500);
  const double ql_final = tail_mean_eval(r_ql, 7000, 500);
  // 2% band absorbs cadence-point noise around the asymptote
  const double exavi_100 = mean_eval_at(r_exavi, 100);
  const bool exavi_fast = exavi_100 >= asym_exavi - 0.02 * std::abs(asym_exavi);
  double exaq_best = -std::numeric_limits<double>::infinity();
  for (int ep = 50; ep <= 500; ep += 50)
    exaq_best = std::max(exaq_best, mean_eval_at(r_exaq, ep));
  const bool exaq_fast = exaq_best >= ql_final - 0.02 * std::abs(ql_final);

  const bool ok = exavi_fast && asym_exavi > asym_ucbvi && exaq_fast;
  return {ok, fmt("exavi@100 %.2f vs asymptote %.2f; ucbvi asymptote %.2f; "
                  "exaq best through ep 500 %.2f vs ql final %.2f",
                  exavi_100, asym_exavi, asym_ucbvi, exaq_best, ql_final)};
}

Line c11_exogeneity() {
  Rng rng(derive_seed(9011, 0));
  for (const char* name : {"taxi", "trading_desk", "elevator"}) {
    const Env env = build_named_env(name);
    const int s = env.model->initial.front().first;
    auto sampler = [&](int a, Rng& r) {
      if (!env.model->is_legal(0, s, a)) a = env.model->first_legal_action(0, s);
      return env.model->factorization.exogenous(env.step(0, s, a, r).first);
    };
    const ExogeneityResult res = exogeneity_test(
        sampler, env.n_actions(), env.model->factorization.n_exogenous, 2000, rng);
    if (!res.skipped && res.p_value <= 0.001)
      return {false, fmt("%s flagged as non-exogenous (p = %.3g)", name, res.p_value)};
  }
  auto planted = [](int a, Rng& r) { return a == 0 ? (r.uniform() < 0.3 ? 0 : 1) : 1; };
  const ExogeneityResult bad = exogeneity_test(planted, 2, 2, 10000, rng);
  if (bad.skipped || bad.p_value >= 1e-6)
    return {false, fmt("planted dependence not flagged (p = %.3g)", bad.p_value)};
  return {true, fmt("3 environments pass at alpha = 0.001; mock flagged (p = %.3g)",
                    bad.p_value)};
}

Line c12_determinism() {
  if (g_c5_exavi.per_seed.empty()) return {false, "criterion 5 runs unavailable"};
  const Env env = build_named_env("taxi");
  const ExperimentResult again_exavi = run_experiment(taxi_config("exavi", 5000), env);
  const ExperimentResult again_ucbvi = run_experiment(taxi_config("ucbvi", 5000), env);
  emit_csv(again_exavi, (g_out_dir / "taxi_exavi_rerun.csv").string());
  emit_csv(again_ucbvi, (g_out_dir / "taxi_ucbvi_rerun.csv").string());
  const bool exavi_same =
      strip_wall_column((g_out_dir / "taxi_exavi.csv").string()) ==
      strip_wall_column((g_out_dir / "taxi_exavi_rerun.csv").string());
  const bool ucbvi_same =
      strip_wall_column((g_out_dir / "taxi_ucbvi.csv").string()) ==
      strip_wall_column((g_out_dir / "taxi_ucbvi_rerun.csv").string());
  return {exavi_same && ucbvi_same,
          fmt("rerun CSVs byte-identical without wall clock: exavi %s, ucbvi %s",
              exavi_same ? "yes" : "no", ucbvi_same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_out_dir = argv[1];
  std::filesystem::create_directories(g_out_dir);

  struct Entry {
    const char* name;
    Line (*run)();
    double budget_s;
  };
  const Entry entries[] = {
      {"planner matches brute-force enumeration", c1_planner_vs_brute_force, 10},
      {"counterfactual operator is unbiased", c2_counterfactual_unbiased, 30},
      {"learning-rate weight identities", c3_learning_rate_identities, 5},
      {"Bernstein envelope coverage", c4_concentration_coverage, 60},
      {"taxi: exavi fast, ucbvi slow", c5_taxi_model_based_ordering, 1800},
      {"taxi: exaq 10x earlier than ql", c6_taxi_model_free_ordering, 1200},
      {"lower bound: sqrt-K regret slope", c7_regret_slope, 600},
      {"lower bound: regret grows with branching", c8_branching_scaling, 900},
      {"desk trading: exaq beats ql", c9_desk_trading_ordering, 900},
      {"elevator: convergence orderings", c10_elevator_ordering, 1200},
      {"exogeneity test", c11_exogeneity, 120},
      {"determinism of repeated runs", c12_determinism, 3600},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& entry : entries) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    Line line;
    try {
      line = entry.run();
    } catch (const std::exception& ex) {
      line = {false, std::string("exception: ") + ex.what()};
    }
    const double elapsed = seconds_since(t0);
    const bool in_budget = elapsed < entry.budget_s;
    const bool ok = line.ok && in_budget;
    if (!ok) ++failures;
    std::printf("criterion %2d: %s  %s (%s; %.1fs%s)\n", idx, ok ? "PASS" : "FAIL",
                entry.name, line.detail.c_str(), elapsed,
                in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
