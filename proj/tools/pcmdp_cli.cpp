// Command-line front end: run experiments, aggregate CSVs, run the
// verification suite, and fit regret-scaling slopes.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "pcmdp/algorithms.hpp"
#include "pcmdp/environments.hpp"
#include "pcmdp/estimation.hpp"
#include "pcmdp/harness.hpp"
#include "pcmdp/oracle.hpp"

namespace {

using namespace pcmdp;

// "1..10" or "1,4,7"
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (hi < lo) throw CLI::ValidationError("range is empty: " + text);
    for (int i = lo; i <= hi; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw CLI::ValidationError("empty list: " + text);
  return out;
}

// "1000..16000" doubles from lo to hi; a comma list is taken verbatim
std::vector<int> parse_doubling_grid(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return parse_int_list(text);
  const int lo = std::stoi(text.substr(0, dots));
  const int hi = std::stoi(text.substr(dots + 2));
  std::vector<int> out;
  for (int k = lo; k <= hi; k *= 2) out.push_back(k);
  if (out.empty()) throw CLI::ValidationError("grid is empty: " + text);
  return out;
}

// Tables 7-8 hyperparameters, keyed by environment and algorithm.
void apply_reported_defaults(const std::string& env, const std::string& algo,
                             LearnerConfig& lc, int& episodes) {
  const bool taxi = env.rfind("taxi", 0) == 0;
  const bool elevator = env.rfind("elevator", 0) == 0;
  const bool trading = env.rfind("trading", 0) == 0;
  if (algo == "exavi" || algo == "ucbvi") {
    if (episodes == 0) episodes = 5000;
    return;
  }
  if (algo == "ql") {
    if (taxi) {
      lc.ql_alpha = 0.05;
      lc.eps_min = 0.0;
      lc.eps_decay = 0.99985;
      if (episodes == 0) episodes = 15000;
    } else if (elevator) {
      lc.ql_alpha = 0.01;
      lc.eps_min = 0.05;
      lc.eps_decay = 0.9995;
      if (episodes == 0) episodes = 7000;
    } else if (trading) {
      lc.ql_alpha = 1.0;
      lc.eps_min = 0.05;
      lc.eps_decay = 0.9998;
      lc.eps_decay_type = "mixed";
      if (episodes == 0) episodes = 20000;
    }
  }
  if (episodes == 0) episodes = taxi ? 15000 : elevator ? 7000 : trading ? 20000 : 5000;
}

int cmd_run(const std::string& env_name, const std::string& config_path,
            const std::string& algo, int episodes, const std::string& seeds,
            const std::string& out_path, int replan_every, bool desk,
            int eval_every, int eval_episodes, bool regret, std::uint64_t master_seed,
            double alpha, double eps_decay, bool aggregate_out) {
  ExperimentConfig config;
  config.env_name = desk && env_name == "trading" ? "trading_desk" : env_name;
  config.env_config_path = config_path;
  config.learner.algo = algo;
  config.seeds = parse_int_list(seeds);
  config.master_seed = master_seed;
  config.eval_every = eval_every;
  config.eval_episodes = eval_episodes;
  config.regret = regret;
  config.learner.replan_every = replan_every;
  apply_reported_defaults(config.env_name, algo, config.learner, episodes);
  if (alpha > 0.0) config.learner.ql_alpha = alpha;
  if (eps_decay > 0.0) config.learner.eps_decay = eps_decay;
  config.episodes = episodes;

  const ExperimentResult result = run_experiment(config);
  if (aggregate_out)
    emit_aggregate_csv(aggregate(result), out_path);
  else
    emit_csv(result, out_path);
  std::fprintf(stderr, "wrote %s (%zu seeds, %d episodes)\n", out_path.c_str(),
               result.per_seed.size(), config.episodes);
  return 0;
}

int cmd_scaling(const std::string& family, const std::string& n_list,
                const std::string& k_list, const std::string& algo,
                const std::string& seeds, const std::string& out_path) {
  if (family != "lower-bound" && family != "lower_bound")
    throw CLI::ValidationError("only the lower-bound family is supported");
  LearnerConfig lc;
  lc.algo = algo;
  if (algo == "ql") {
    lc.ql_alpha = 0.1;
    lc.eps_min = 0.05;
    lc.eps_decay = 0.999;
  }
  const auto results = scaling_experiment(parse_int_list(n_list),
                                          parse_doubling_grid(k_list), lc,
                                          parse_int_list(seeds));
  FILE* out = out_path.empty() ? stdout : std::fopen(out_path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  std::fprintf(out, "family,algo,N,slope,intercept,residual_norm,final_regret\n");
  for (const ScalingResult& r : results)
    std::fprintf(out, "lower-bound,%s,%d,%.17g,%.17g,%.17g,%.17g\n", algo.c_str(),
                 r.branching, r.fit.slope, r.fit.intercept, r.fit.residual_norm,
                 r.mean_regret.back());
  if (out != stdout) std::fclose(out);
  return 0;
}

bool check(const char* what, bool ok) {
  std::printf("%-55s %s\n", what, ok ? "ok" : "FAILED");
  return ok;
}

// Compact oracle/property sweep; the full-budget versions live in the test
// suite.
int cmd_verify() {
  bool all = true;
  Rng rng(derive_seed(2024, 0));

  {
    bool ok = true;
    for (int i = 0; i < 10 && ok; ++i) {
      FactoredModel m = random_model(rng, 3, 3, 2, 3, 3e5);
      const auto best = brute_force_optimal(m, 3e5);
      const ValueSolution vi = value_iteration(m);
      for (int s = 0; s < m.factorization.total(); ++s)
        ok = ok && std::abs(best[s] - vi.v[0][s]) <= 1e-9;
    }
    all &= check("planner matches brute-force enumeration", ok);
  }
  {
    FactoredModel m = random_model(rng, 3, 3, 2, 3, 3e5);
    while (m.horizon < 2) m = random_model(rng, 3, 3, 2, 3, 3e5);
    const int n_exo = m.factorization.n_exogenous;
    std::vector<double> f(m.factorization.total());
    for (double& x : f) x = rng.uniform();
    const int s = rng.uniform_int(m.factorization.total());
    const int a = rng.uniform_int(m.n_actions);
    const int e = m.factorization.exogenous(s);
    const int d = m.factorization.controllable(s);
    double exact = 0.0;
    const ExoMatrix& exo = m.exogenous.at(0);
    for (int ne = 0; ne < n_exo; ++ne)
      exact += exo.row(e)[ne] * counterfactual_target(m, 0, ne, f, d, e, a);
    double mc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const int ne = rng.sample_dense({exo.row(e), static_cast<std::size_t>(n_exo)});
      mc += counterfactual_target(m, 0, ne, f, d, e, a);
    }
    mc /= n;
    all &= check("counterfactual target is unbiased", std::abs(mc - exact) < 0.01);
  }
  {
    const LearningRateSchedule sched(5);
    const auto w = learning_rate_weights(sched, 1000);
    double sum = 0.0;
    for (double x : w) sum += x;
    all &= check("learning-rate weights sum to one", std::abs(sum - 1.0) < 1e-12);
  }
  {
    const std::vector<double> p = {0.3, 0.7};
    const double rate = concentration_coverage(p, 10000, 0.05, 200, rng);
    all &= check("estimator stays inside the Bernstein envelope", rate <= 0.06 + 0.05);
  }
  {
    const Env env = build_taxi();
    const int h = 0;
    const int s = env.model->initial.front().first;
    auto sampler = [&](int a, Rng& r) {
      return env.model->factorization.exogenous(env.step(h, s, a, r).first);
    };
    const ExogeneityResult res = exogeneity_test(
        sampler, env.n_actions(), env.model->factorization.n_exogenous, 2000, rng);
    all &= check("environment transitions ignore the action", res.skipped || res.p_value > 0.001);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCMDP benchmark harness"};
  app.require_subcommand(1);

  std::string env_name = "taxi", config_path, algo = "exavi", seeds = "1..10";
  std::string out_path = "out.csv";
  int episodes = 0, replan_every = 1, eval_every = 50, eval_episodes = 50;
  bool desk = false, regret = false, aggregate_out = false;
  std::uint64_t master_seed = 0;
  double alpha = 0.0, eps_decay = 0.0;

  CLI::App* run = app.add_subcommand("run", "train one algorithm and emit CSV records");
  run->add_option("--env", env_name, "taxi | trading | trading_desk | elevator | lower_bound");
  run->add_option("--config", config_path, "environment config file (overrides --env)");
  run->add_option("--algo", algo, "exavi | ucbvi | exaq | ql")->required();
  run->add_option("--episodes", episodes, "training episodes (default: reported settings)");
  run->add_option("--seeds", seeds, "e.g. 1..10 or 1,2,5");
  run->add_option("--out", out_path, "output CSV path");
  run->add_option("--replan-every", replan_every, "planning cadence in episodes");
  run->add_flag("--desk-scale", desk, "desk-scale trading shorthand");
  run->add_option("--eval-every", eval_every, "evaluation cadence in episodes");
  run->add_option("--eval-episodes", eval_episodes, "greedy episodes per cadence point");
  run->add_flag("--regret", regret, "record exact cumulative regret where available");
  run->add_option("--master-seed", master_seed, "stream-derivation master seed");
  run->add_option("--alpha", alpha, "constant learning rate override (ql)");
  run->add_option("--eps-decay", eps_decay, "epsilon decay override (ql)");
  run->add_flag("--aggregate", aggregate_out, "emit aggregated CSV instead of raw records");

  std::string agg_in, agg_out = "agg.csv";
  CLI::App* agg = app.add_subcommand("aggregate", "mean and 95% CI across seeds");
  agg->add_option("--in", agg_in, "raw CSV from `run`")->required();
  agg->add_option("--out", agg_out, "aggregated CSV path");

  CLI::App* verify = app.add_subcommand("verify", "quick oracle and property sweep");

  std::string family = "lower-bound", n_list = "2,4,8", k_list = "1000..16000";
  std::string sc_algo = "exaq", sc_seeds = "1..10", sc_out;
  CLI::App* scaling = app.add_subcommand("scaling", "regret-slope fit over the hard family");
  scaling->add_option("--family", family, "instance family (lower-bound)");
  scaling->add_option("--N", n_list, "branching factors, e.g. 2,4,8");
  scaling->add_option("--K", k_list, "episode grid: doubling range lo..hi or a list");
  scaling->add_option("--algo", sc_algo, "exaq | ql");
  scaling->add_option("--seeds", sc_seeds, "seed list");
  scaling->add_option("--out", sc_out, "slope table CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (run->parsed())
      return cmd_run(env_name, config_path, algo, episodes, seeds, out_path,
                     replan_every, desk, eval_every, eval_episodes, regret,
                     master_seed, alpha, eps_decay, aggregate_out);
    if (agg->parsed()) {
      emit_aggregate_csv(aggregate(parse_csv(agg_in)), agg_out);
      return 0;
    }
    if (verify->parsed()) return cmd_verify();
    if (scaling->parsed())
      return cmd_scaling(family, n_list, k_list, sc_algo, sc_seeds, sc_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
