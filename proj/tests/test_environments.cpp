#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "pcmdp/environments.hpp"
#include "pcmdp/oracle.hpp"

using namespace pcmdp;

namespace {

// raw per-step reward from a normalized env reward
double raw_reward(const Env& env, double normalized) {
  return env.reward_scale * normalized + env.reward_offset;
}

std::string write_temp_config(const std::string& body) {
  const std::string path = std::string(std::tmpnam(nullptr)) + ".cfg";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("preset sizes match the specs") {
  CHECK(build_taxi().n_states() == 500 * 8);
  CHECK(build_taxi().n_actions() == 6);
  CHECK(build_elevator().n_states() == 81 * 9);
  CHECK(build_elevator().n_actions() == 3);
  TradingSpec desk;
  desk.apply_desk_scale();
  const Env trading = build_trading(desk);
  CHECK(trading.n_states() == 21 * 100);
  CHECK(trading.n_actions() == 21);
  LowerBoundSpec lb;
  lb.branching = 2;
  lb.leaf_probs = {0.3, 0.7};
  CHECK(build_lower_bound(lb).model->factorization.n_exogenous == 7);
}

TEST_CASE("zero congestion reduces the taxi to the classic deterministic grid") {
  TaxiTrafficSpec spec;
  spec.traffic_prob = 0.0;
  const Env env = build_taxi(spec);
  const ExoMatrix& exo = env.model->exogenous.at(0);
  // all-clear exogenous vector (index 0) is absorbing
  for (int e = 0; e < exo.n; ++e) {
    CHECK(exo.row(e)[0] == doctest::Approx(1.0));
    for (int ne = 1; ne < exo.n; ++ne) CHECK(exo.row(e)[ne] == 0.0);
  }
}

TEST_CASE("taxi rewards: delivery, invalid actions, step cost") {
  const Env env = build_taxi();
  const FactoredModel& m = *env.model;
  CHECK(raw_reward(env, 1.0) == doctest::Approx(20.0));   // reward scale spans [-10, 20]
  CHECK(raw_reward(env, 0.0) == doctest::Approx(-10.0));

  // depot R is at (0,0); passenger at depot 0 with destination 1
  const auto encode_dia = [&](int row, int col, int psi, int dest) {
    return ((row * 5 + col) * 5 + psi) * 4 + dest;
  };
  const int all_clear = 0;
  const int s_pickup = m.factorization.encode(encode_dia(0, 0, 0, 1), all_clear);
  CHECK(raw_reward(env, m.reward(0, s_pickup, 4)) == doctest::Approx(-1.0));  // valid pickup
  const int s_wrong = m.factorization.encode(encode_dia(1, 1, 0, 1), all_clear);
  CHECK(raw_reward(env, m.reward(0, s_wrong, 4)) == doctest::Approx(-10.0));  // not at depot

  // riding (psi = 4) at destination depot G (0,4): dropoff pays +20
  const int s_deliver = m.factorization.encode(encode_dia(0, 4, 4, 1), all_clear);
  CHECK(raw_reward(env, m.reward(0, s_deliver, 5)) == doctest::Approx(20.0));
  CHECK(raw_reward(env, m.reward(0, s_deliver, 0)) == doctest::Approx(-1.0));  // plain move
}

TEST_CASE("moving into a congested cell is a no-op") {
  const Env env = build_taxi();
  const FactoredModel& m = *env.model;
  // traffic cells are (2,1), (2,2), (2,3); bit order matches that list.
  // stand at (1,1) heading south into (2,1) while its bit is set
  const int e_blocked = 1;  // first traffic cell congested
  const int d_from = ((1 * 5 + 1) * 5 + 0) * 4 + 1;
  const ControllableBlock& cb = m.controllable.block(0, e_blocked);
  REQUIRE(cb.row_end(d_from, 0) - cb.row_begin(d_from, 0) == 1);
  CHECK(cb.cols[cb.row_begin(d_from, 0)] == d_from);  // south action, unchanged
  CHECK(raw_reward(env, m.reward(0, m.factorization.encode(d_from, e_blocked), 0)) ==
        doctest::Approx(-1.0));
  // same move with the cell clear goes through
  const ControllableBlock& cb_clear = m.controllable.block(0, 0);
  const int d_to = ((2 * 5 + 1) * 5 + 0) * 4 + 1;
  CHECK(cb_clear.cols[cb_clear.row_begin(d_from, 0)] == d_to);
}

TEST_CASE("trading costs follow the execution model") {
  TradingSpec spec;  // full scale: eps = 0.0625, eta = 2e-5, lambda = 100, sigma = 0.3
  const Env env = build_trading(spec);
  const FactoredModel& m = *env.model;
  const int n_price = spec.n_price_levels();
  const int mid = (n_price - 1) / 2;  // price 100.0 with range [90, 110]
  CHECK(spec.price_at(mid) == doctest::Approx(100.0));

  // sell 10 of 100 at price 100: revenue 1000, c_ex = 0.625 + 0.002
  const int s = m.factorization.encode(100, mid);
  const int a_sell10 = 90;
  const double expected_sell =
      10 * 100.0 - (0.0625 * 10 + 2e-5 * 100) - 100.0 * 0.09 * 90.0 * 90.0;
  CHECK(raw_reward(env, m.reward(0, s, a_sell10)) == doctest::Approx(expected_sell));

  // hold 5 shares: pure holding cost 100 * 0.3^2 * 5^2 = 225
  const int s5 = m.factorization.encode(5, mid);
  CHECK(raw_reward(env, m.reward(0, s5, 5)) == doctest::Approx(-225.0));

  // legality: cannot buy, and the final step forces full liquidation
  CHECK(m.is_legal(0, s5, 5));
  CHECK_FALSE(m.is_legal(0, s5, 6));
  CHECK(m.is_legal(m.horizon - 1, s5, 0));
  CHECK_FALSE(m.is_legal(m.horizon - 1, s5, 1));
}

TEST_CASE("trading price increments have the configured volatility") {
  TradingSpec spec;
  spec.apply_desk_scale();
  spec.volatility = 0.6;  // desk tick is 0.2; keep several ticks of motion
  const Env env = build_trading(spec);
  const ExoMatrix& exo = env.model->exogenous.at(0);
  Rng rng(derive_seed(51, 0));
  const int n = 100000;
  int e = spec.n_price_levels() / 2;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const int ne = rng.sample_dense({exo.row(e), static_cast<std::size_t>(exo.n)});
    const double diff = spec.tick * (ne - e);
    sum += diff;
    sum_sq += diff * diff;
    // resample around the center to avoid boundary clamping
  }
  const double sd = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
  CHECK(sd == doctest::Approx(spec.volatility).epsilon(0.02));
}

TEST_CASE("trading episodes liquidate the whole inventory") {
  TradingSpec spec;
  spec.apply_desk_scale();
  const Env env = build_trading(spec);
  const FactoredModel& m = *env.model;
  const ValueSolution sol = value_iteration(m);
  Rng rng(derive_seed(52, 0));
  for (int episode = 0; episode < 20; ++episode) {
    const Trajectory t = sample_episode(m, sol.policy, rng);
    int sold = 0;
    double revenue = 0.0, reported = 0.0;
    for (int h = 0; h < m.horizon; ++h) {
      const int u = m.factorization.controllable(t.states[h]);
      const int target = t.actions[h];
      const int n_h = u - target;
      sold += n_h;
      const double price = spec.price_at(m.factorization.exogenous(t.states[h]));
      revenue += n_h * price;
      const double c_ex = spec.transaction_cost * std::abs(n_h) +
                          (spec.temp_impact / spec.interval) * n_h * n_h;
      const double c_hold = spec.risk_aversion * spec.interval *
                            spec.volatility * spec.volatility * target * target;
      reported += env.reward_scale * t.rewards[h] + env.reward_offset;
      revenue -= c_ex + c_hold;
    }
    CHECK(sold == spec.initial_inventory);      // forced liquidation
    CHECK(reported == doctest::Approx(revenue));  // mark-to-market re-tally
  }
}

TEST_CASE("elevator rewards: idle, waiting, discharge bonus") {
  const Env env = build_elevator();
  const FactoredModel& m = *env.model;
  // s_dia = (floor, onboard, w1, w2) mixed radix: ((nu * 3 + psi) * 3 + w1) * 3 + w2
  const auto encode_dia = [](int nu, int psi, int w1, int w2) {
    return ((nu * 3 + psi) * 3 + w1) * 3 + w2;
  };
  const int no_arrivals = 0;

  // empty building: reward 0 whatever the move
  const int s_idle = m.factorization.encode(encode_dia(1, 0, 0, 0), no_arrivals);
  CHECK(raw_reward(env, m.reward(0, s_idle, 0)) == doctest::Approx(0.0));

  // queues (1,2), one on board, elevator between floors, no discharge
  const int s_wait = m.factorization.encode(encode_dia(1, 1, 1, 2), no_arrivals);
  CHECK(raw_reward(env, m.reward(0, s_wait, 0)) == doctest::Approx(-4.0));

  // discharging 2 at the ground floor with empty queues: +10 each
  const int s_discharge = m.factorization.encode(encode_dia(0, 2, 0, 0), no_arrivals);
  CHECK(raw_reward(env, m.reward(0, s_discharge, 2)) == doctest::Approx(20.0));
}

TEST_CASE("elevator conserves passengers") {
  const Env env = build_elevator();
  const FactoredModel& m = *env.model;
  const ValueSolution sol = value_iteration(m);
  Rng rng(derive_seed(53, 0));
  // replay an episode and track boardings against discharges
  for (int episode = 0; episode < 10; ++episode) {
    int boarded = 0, discharged = 0;
    const Trajectory t = sample_episode(m, sol.policy, rng);
    for (int h = 0; h + 1 < m.horizon; ++h) {
      const int psi = (m.factorization.controllable(t.states[h]) / 9) % 3;
      const int psi_next = (m.factorization.controllable(t.states[h + 1]) / 9) % 3;
      if (psi_next > psi) boarded += psi_next - psi;
      if (psi_next < psi) discharged += psi - psi_next;
    }
    const int final_onboard = (m.factorization.controllable(t.states.back()) / 9) % 3;
    CHECK(boarded == discharged + final_onboard);
  }
}

TEST_CASE("lower-bound family layout and values") {
  LowerBoundSpec one;
  one.branching = 1;
  one.leaf_probs = {0.5};
  const Env env = build_lower_bound(one);
  CHECK(env.horizon() == 3);
  // p = 1/2 makes both actions worthless: every policy has value 0
  const ValueSolution sol = value_iteration(*env.model);
  const double v_raw = env.raw_return(sol.v[0][env.model->initial.front().first]);
  CHECK(v_raw == doctest::Approx(0.0).epsilon(1e-12));

  LowerBoundSpec sure;
  sure.branching = 3;
  sure.leaf_probs = {1.0, 1.0, 1.0};
  const Env env2 = build_lower_bound(sure);
  const ValueSolution sol2 = value_iteration(*env2.model);
  CHECK(env2.raw_return(sol2.v[0][env2.model->initial.front().first]) ==
        doctest::Approx(1.0));
}

TEST_CASE("environment transitions are action-independent") {
  Rng rng(derive_seed(54, 0));
  for (const char* name : {"taxi", "elevator", "trading_desk", "lower_bound"}) {
    const Env env = build_named_env(name);
    const int s = env.model->initial.front().first;
    const int h = 0;
    auto sampler = [&](int a, Rng& r) {
      if (!env.model->is_legal(h, s, a)) a = env.model->first_legal_action(h, s);
      return env.model->factorization.exogenous(env.step(h, s, a, r).first);
    };
    const ExogeneityResult res = exogeneity_test(
        sampler, env.n_actions(), env.model->factorization.n_exogenous, 2000, rng);
    CHECK((res.skipped || res.p_value > 0.001));
  }

  // planted violation: successor depends on the action
  auto bad = [](int a, Rng& r) { return a == 0 ? (r.uniform() < 0.3 ? 0 : 1) : 1; };
  const ExogeneityResult res = exogeneity_test(bad, 2, 2, 10000, rng);
  CHECK_FALSE(res.skipped);
  CHECK(res.p_value < 1e-6);
}

TEST_CASE("simulator frequencies match the exported model") {
  const Env env = build_named_env("lower_bound");
  const FactoredModel& m = *env.model;
  const int s = m.initial.front().first;
  const int S = m.factorization.total();
  const auto kernel = compose_full_kernel(m, 0);
  Rng rng(derive_seed(55, 0));
  const int n = 100000, a = 0;
  std::vector<int> counts(S, 0);
  for (int i = 0; i < n; ++i) ++counts[env.step(0, s, a, rng).first];
  double tv = 0.0;
  for (int ns = 0; ns < S; ++ns)
    tv += std::abs(static_cast<double>(counts[ns]) / n -
                   kernel[(static_cast<std::size_t>(s) * m.n_actions + a) * S + ns]);
  CHECK(tv / 2.0 <= 0.02);
}

TEST_CASE("config files build environments") {
  const std::string path = write_temp_config(
      "env = taxi\n"
      "grid_size = 5\n"
      "traffic_prob = 0.5\n"  // non-default
      "horizon = 50\n");
  const Env env = build_env_from_file(path);
  CHECK(env.name == "taxi");
  CHECK(env.horizon() == 50);
  const ExoMatrix& exo = env.model->exogenous.at(0);
  CHECK(exo.row(0)[0] == doctest::Approx(0.125));  // (1 - 0.5)^3
  std::remove(path.c_str());
}

TEST_CASE("unknown config keys are rejected") {
  const std::string path = write_temp_config(
      "env = taxi\n"
      "grid = 5\n");  // wrong field name
  CHECK_THROWS(build_env_from_file(path));
  std::remove(path.c_str());
}

TEST_CASE("malformed specs are rejected") {
  TaxiTrafficSpec taxi;
  taxi.traffic_cells = {{9, 9}};
  CHECK_THROWS(build_taxi(taxi));
  LowerBoundSpec lb;
  lb.branching = 2;
  lb.leaf_probs = {0.5};  // wrong length
  CHECK_THROWS(build_lower_bound(lb));
  ElevatorSpec elevator;
  elevator.arrival_rates = {0.1};  // needs floors - 1 entries
  CHECK_THROWS(build_elevator(elevator));
}
