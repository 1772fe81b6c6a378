#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pcmdp/env.hpp"

namespace pcmdp {

struct TaxiTrafficSpec {
  int grid = 5;
  std::vector<std::pair<int, int>> traffic_cells = {{2, 1}, {2, 2}, {2, 3}};
  double traffic_prob = 0.3;
  int horizon = 200;
};

struct TradingSpec {
  int initial_inventory = 100;
  double price_min = 90.0;
  double price_max = 110.0;
  double tick = 0.02;
  double initial_price = 100.0;
  double volatility = 0.3;
  double drift = 0.0;
  double transaction_cost = 0.0625;
  double temp_impact = 2e-5;
  double interval = 1.0;
  double risk_aversion = 100.0;
  int horizon = 200;
  bool desk_scale = false;

  /// Shrinks inventory, price grid and horizon so exact planning and
  /// per-episode regret stay cheap; market parameters are unchanged.
  void apply_desk_scale();
  int n_price_levels() const;
  double price_at(int index) const { return price_min + tick * index; }
};

struct ElevatorSpec {
  int floors = 3;
  int capacity = 2;
  int max_queue = 2;
  int max_batch = 2;
  std::vector<double> arrival_rates = {0.05, 0.2};  // floors 1..F-1
  double delivery_bonus = 10.0;
  double waiting_penalty = 1.0;
  int horizon = 300;
};

struct LowerBoundSpec {
  int branching = 1;
  std::vector<double> leaf_probs;  // size = branching
};

Env build_taxi(const TaxiTrafficSpec& spec = {});
Env build_trading(const TradingSpec& spec = {});
Env build_elevator(const ElevatorSpec& spec = {});
Env build_lower_bound(const LowerBoundSpec& spec);

/// key = value lines, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_config(const std::string& path);

/// Dispatches on the `env` key (taxi | trading | elevator | lower_bound);
/// remaining keys override spec defaults.
Env build_env_from_config(const std::map<std::string, std::string>& config);
Env build_env_from_file(const std::string& path);

/// Named presets used by the command-line tool: taxi, trading, trading_desk,
/// elevator, lower_bound (N = 4, p evenly spread).
Env build_named_env(const std::string& name);

}  // namespace pcmdp
