#include "pcmdp/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pcmdp {
namespace {

// Accumulates CSR rows in (s_dia, a) order.
struct CsrBuilder {
  ControllableBlock block;

  explicit CsrBuilder(int n_dia, int n_actions) {
    block.n_controllable = n_dia;
    block.n_actions = n_actions;
    block.offsets.reserve(static_cast<std::size_t>(n_dia) * n_actions + 1);
    block.offsets.push_back(0);
  }
  void add_row(const SparseDist& dist) {
    for (const auto& [col, p] : dist) {
      block.cols.push_back(col);
      block.probs.push_back(p);
    }
    block.offsets.push_back(static_cast<int>(block.cols.size()));
  }
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Reward bounds over legal pairs only; masked actions can carry arbitrary
// values.
void set_reward_bounds(FactoredModel& model) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const int total = model.factorization.total();
  for (std::size_t t = 0; t < model.rewards.size(); ++t) {
    const int h = model.rewards.size() == 1 ? 0 : static_cast<int>(t);
    for (int s = 0; s < total; ++s)
      for (int a = 0; a < model.n_actions; ++a) {
        if (!model.is_legal(h, s, a)) continue;
        const double r = model.rewards[t][static_cast<std::size_t>(s) * model.n_actions + a];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
  }
  model.reward_min = lo;
  model.reward_max = hi;
}

constexpr int kExportStateBudget = 10000;

Env finalize(std::string name, FactoredModel model, bool desk) {
  set_reward_bounds(model);
  model.validate(1e-9);
  NormalizedModel nm = normalize_rewards(model);
  Env env;
  env.name = std::move(name);
  env.desk_scale = desk;
  env.reward_scale = nm.scale;
  env.reward_offset = nm.offset;
  env.exportable = nm.model.factorization.total() <= kExportStateBudget;
  env.model = std::make_shared<FactoredModel>(std::move(nm.model));
  return env;
}

// --- Taxi ------------------------------------------------------------------

// Classic 5x5 layout: depots R(0,0) G(0,4) Y(4,0) B(4,3); vertical walls
// listed as "wall right of (row, col)".
constexpr std::pair<int, int> kDepots[4] = {{0, 0}, {0, 4}, {4, 0}, {4, 3}};
constexpr std::pair<int, int> kWalls[6] = {{0, 1}, {1, 1}, {3, 0}, {3, 2}, {4, 0}, {4, 2}};

struct TaxiLayout {
  const TaxiTrafficSpec& spec;
  int n_traffic;

  int n_dia() const { return spec.grid * spec.grid * 5 * 4; }
  int encode(int row, int col, int psi, int dest) const {
    return ((row * spec.grid + col) * 5 + psi) * 4 + dest;
  }
  bool wall_right(int row, int col) const {
    if (spec.grid != 5) return false;
    for (const auto& [r, c] : kWalls)
      if (r == row && c == col) return true;
    return false;
  }
  // index of (row, col) among traffic cells, or -1
  int traffic_index(int row, int col) const {
    for (int i = 0; i < n_traffic; ++i)
      if (spec.traffic_cells[i] == std::make_pair(row, col)) return i;
    return -1;
  }
  bool at_depot(int row, int col, int depot) const {
    return kDepots[depot] == std::make_pair(row, col);
  }
};

// successor controllable states and reward for (state, action) under
// traffic bitmask `mask`
void taxi_step(const TaxiLayout& lay, int row, int col, int psi, int dest, int a,
               int mask, SparseDist& out, double& reward) {
  out.clear();
  reward = -1.0;
  const int g = lay.spec.grid;
  if (a < 4) {  // south, north, east, west
    int nr = row, nc = col;
    bool blocked = false;
    switch (a) {
      case 0: if (row == g - 1) blocked = true; else nr = row + 1; break;
      case 1: if (row == 0) blocked = true; else nr = row - 1; break;
      case 2: if (col == g - 1 || lay.wall_right(row, col)) blocked = true; else nc = col + 1; break;
      case 3: if (col == 0 || lay.wall_right(row, col - 1)) blocked = true; else nc = col - 1; break;
    }
    if (!blocked) {
      const int t = lay.traffic_index(nr, nc);
      if (t >= 0 && (mask >> t) & 1) blocked = true;  // congested target cell
    }
    if (blocked) { nr = row; nc = col; }
    out.emplace_back(lay.encode(nr, nc, psi, dest), 1.0);
    return;
  }
  if (a == 4) {  // pickup
    if (psi < 4 && lay.at_depot(row, col, psi)) {
      out.emplace_back(lay.encode(row, col, 4, dest), 1.0);
    } else {
      reward = -10.0;
      out.emplace_back(lay.encode(row, col, psi, dest), 1.0);
    }
    return;
  }
  // drop-off: a delivery respawns a uniform (pickup, destination) pair
  if (psi == 4 && lay.at_depot(row, col, dest)) {
    reward = 20.0;
    for (int np = 0; np < 4; ++np)
      for (int nd = 0; nd < 4; ++nd) {
        if (nd == np) continue;
        out.emplace_back(lay.encode(row, col, np, nd), 1.0 / 12.0);
      }
  } else {
    reward = -10.0;
    out.emplace_back(lay.encode(row, col, psi, dest), 1.0);
  }
}

}  // namespace

Env build_taxi(const TaxiTrafficSpec& spec) {
  // depot coordinates need at least the classic 5x5 board
  if (spec.grid < 5 || spec.horizon < 1 || spec.traffic_prob < 0.0 ||
      spec.traffic_prob > 1.0)
    throw std::invalid_argument("bad taxi spec");
  for (const auto& [r, c] : spec.traffic_cells)
    if (r < 0 || r >= spec.grid || c < 0 || c >= spec.grid)
      throw std::invalid_argument("traffic cell outside grid");

  const TaxiLayout lay{spec, static_cast<int>(spec.traffic_cells.size())};
  const int n_exo = 1 << lay.n_traffic;
  const int n_dia = lay.n_dia();
  const int A = 6;

  FactoredModel m;
  m.factorization = {n_dia, n_exo};
  m.n_actions = A;
  m.horizon = spec.horizon;

  // i.i.d. congestion bits: all exogenous rows share one distribution
  ExoMatrix exo;
  exo.n = n_exo;
  exo.p.resize(static_cast<std::size_t>(n_exo) * n_exo);
  std::vector<double> mask_prob(n_exo);
  for (int mask = 0; mask < n_exo; ++mask) {
    double p = 1.0;
    for (int t = 0; t < lay.n_traffic; ++t)
      p *= ((mask >> t) & 1) ? spec.traffic_prob : 1.0 - spec.traffic_prob;
    mask_prob[mask] = p;
  }
  for (int i = 0; i < n_exo; ++i)
    std::copy(mask_prob.begin(), mask_prob.end(), exo.p.begin() + static_cast<std::size_t>(i) * n_exo);
  exo.compute_support();
  m.exogenous.steps.push_back(std::move(exo));

  m.controllable.n_exogenous = n_exo;
  m.controllable.steps.emplace_back();
  m.rewards.emplace_back(static_cast<std::size_t>(n_dia) * n_exo * A);
  SparseDist dist;
  double reward;
  for (int mask = 0; mask < n_exo; ++mask) {
    CsrBuilder csr(n_dia, A);
    for (int row = 0; row < spec.grid; ++row)
      for (int col = 0; col < spec.grid; ++col)
        for (int psi = 0; psi < 5; ++psi)
          for (int dest = 0; dest < 4; ++dest) {
            const int d = lay.encode(row, col, psi, dest);
            for (int a = 0; a < A; ++a) {
              taxi_step(lay, row, col, psi, dest, a, mask, dist, reward);
              csr.add_row(dist);
              m.rewards[0][(static_cast<std::size_t>(d) * n_exo + mask) * A + a] = reward;
            }
          }
    m.controllable.steps[0].push_back(std::move(csr.block));
  }

  // start anywhere; passenger waits at a depot distinct from the destination
  const double w = 1.0 / (spec.grid * spec.grid * 12);
  for (int row = 0; row < spec.grid; ++row)
    for (int col = 0; col < spec.grid; ++col)
      for (int psi = 0; psi < 4; ++psi)
        for (int dest = 0; dest < 4; ++dest) {
          if (dest == psi) continue;
          const int d = lay.encode(row, col, psi, dest);
          for (int mask = 0; mask < n_exo; ++mask)
            if (mask_prob[mask] > 0.0)
              m.initial.emplace_back(d * n_exo + mask, w * mask_prob[mask]);
        }

  return finalize("taxi", std::move(m), false);
}

// --- Trading ---------------------------------------------------------------

void TradingSpec::apply_desk_scale() {
  desk_scale = true;
  initial_inventory = 20;
  tick = 0.2;
  price_min = 90.0;
  price_max = 109.8;  // 100 levels
  horizon = 50;
}

int TradingSpec::n_price_levels() const {
  return static_cast<int>(std::lround((price_max - price_min) / tick)) + 1;
}

Env build_trading(const TradingSpec& spec) {
  const int n_price = spec.n_price_levels();
  if (n_price < 2 || spec.initial_inventory < 1 || spec.horizon < 2 ||
      spec.volatility <= 0.0)
    throw std::invalid_argument("bad trading spec");

  const int n_inv = spec.initial_inventory + 1;
  const int A = n_inv;  // action = target inventory
  FactoredModel m;
  m.factorization = {n_inv, n_price};
  m.n_actions = A;
  m.horizon = spec.horizon;

  // deterministic inventory transition, independent of price and step
  m.controllable.n_exogenous = n_price;
  m.controllable.steps.emplace_back();
  {
    CsrBuilder csr(n_inv, A);
    SparseDist dist;
    for (int u = 0; u < n_inv; ++u)
      for (int a = 0; a < A; ++a) {
        dist.assign(1, {a, 1.0});
        csr.add_row(dist);
      }
    m.controllable.steps[0].push_back(std::move(csr.block));
  }

  // tick-discretized Gaussian walk, tails absorbed at the grid boundary
  ExoMatrix exo;
  exo.n = n_price;
  exo.p.assign(static_cast<std::size_t>(n_price) * n_price, 0.0);
  for (int i = 0; i < n_price; ++i) {
    double* row = exo.p.data() + static_cast<std::size_t>(i) * n_price;
    const double mean = spec.price_at(i) + spec.drift;
    double sum = 0.0;
    for (int j = 0; j < n_price; ++j) {
      const double lo = j == 0 ? -std::numeric_limits<double>::infinity()
                               : spec.price_at(j) - 0.5 * spec.tick;
      const double hi = j == n_price - 1 ? std::numeric_limits<double>::infinity()
                                         : spec.price_at(j) + 0.5 * spec.tick;
      double mass = normal_cdf((hi - mean) / spec.volatility) -
                    normal_cdf((lo - mean) / spec.volatility);
      if (mass < 1e-16) mass = 0.0;  // keep rows banded
      row[j] = mass;
      sum += mass;
    }
    for (int j = 0; j < n_price; ++j) row[j] /= sum;
  }
  exo.compute_support();
  m.exogenous.steps.push_back(std::move(exo));

  m.rewards.emplace_back(static_cast<std::size_t>(n_inv) * n_price * A);
  m.legal.emplace_back(static_cast<std::size_t>(n_inv) * n_price * A);
  m.legal_final.resize(static_cast<std::size_t>(n_inv) * n_price * A);
  const double hold_coef =
      spec.risk_aversion * spec.interval * spec.volatility * spec.volatility;
  for (int u = 0; u < n_inv; ++u)
    for (int i = 0; i < n_price; ++i) {
      const int s = u * n_price + i;
      const double price = spec.price_at(i);
      for (int a = 0; a < A; ++a) {
        const int n = u - a;  // shares sold this step
        const double r = n * price - spec.transaction_cost * std::abs(n) -
                         (spec.temp_impact / spec.interval) * n * n -
                         hold_coef * static_cast<double>(a) * a;
        const std::size_t idx = static_cast<std::size_t>(s) * A + a;
        m.rewards[0][idx] = r;
        m.legal[0][idx] = a <= u ? 1 : 0;
        m.legal_final[idx] = a == 0 ? 1 : 0;  // forced full liquidation
      }
    }

  const int i0 = static_cast<int>(std::lround((spec.initial_price - spec.price_min) / spec.tick));
  if (i0 < 0 || i0 >= n_price) throw std::invalid_argument("initial price off grid");
  m.initial.emplace_back(spec.initial_inventory * n_price + i0, 1.0);

  return finalize(spec.desk_scale ? "trading_desk" : "trading", std::move(m),
                  spec.desk_scale);
}

// --- Elevator ----------------------------------------------------------------

namespace {

struct ElevatorLayout {
  const ElevatorSpec& spec;
  int n_queue_levels, n_batch_levels, n_upper;

  int n_dia() const {
    int n = spec.floors * (spec.capacity + 1);
    for (int f = 0; f < n_upper; ++f) n *= n_queue_levels;
    return n;
  }
  int n_exo() const {
    int n = 1;
    for (int f = 0; f < n_upper; ++f) n *= n_batch_levels;
    return n;
  }
  int encode(int nu, int psi, const std::vector<int>& w) const {
    int d = nu * (spec.capacity + 1) + psi;
    for (int f = 0; f < n_upper; ++f) d = d * n_queue_levels + w[f];
    return d;
  }
  void decode(int d, int& nu, int& psi, std::vector<int>& w) const {
    for (int f = n_upper - 1; f >= 0; --f) {
      w[f] = d % n_queue_levels;
      d /= n_queue_levels;
    }
    psi = d % (spec.capacity + 1);
    nu = d / (spec.capacity + 1);
  }
  void decode_exo(int e, std::vector<int>& kappa) const {
    for (int f = n_upper - 1; f >= 0; --f) {
      kappa[f] = e % n_batch_levels;
      e /= n_batch_levels;
    }
  }
};

}  // namespace

Env build_elevator(const ElevatorSpec& spec) {
  if (spec.floors < 2 || spec.capacity < 1 || spec.max_queue < 1 ||
      spec.max_batch < 1 || spec.horizon < 1 ||
      static_cast<int>(spec.arrival_rates.size()) != spec.floors - 1)
    throw std::invalid_argument("bad elevator spec");

  const ElevatorLayout lay{spec, spec.max_queue + 1, spec.max_batch + 1,
                           spec.floors - 1};
  const int n_dia = lay.n_dia();
  const int n_exo = lay.n_exo();
  const int A = 3;  // up, down, open

  FactoredModel m;
  m.factorization = {n_dia, n_exo};
  m.n_actions = A;
  m.horizon = spec.horizon;

  // i.i.d. per-floor arrivals; Poisson tail mass folded onto max_batch
  std::vector<std::vector<double>> batch_prob(lay.n_upper);
  for (int f = 0; f < lay.n_upper; ++f) {
    batch_prob[f].resize(lay.n_batch_levels);
    const double lambda = spec.arrival_rates[f];
    double cum = 0.0, term = std::exp(-lambda);
    for (int j = 0; j < spec.max_batch; ++j) {
      batch_prob[f][j] = term;
      cum += term;
      term *= lambda / (j + 1);
    }
    batch_prob[f][spec.max_batch] = 1.0 - cum;
  }
  std::vector<double> exo_row(n_exo);
  std::vector<int> kappa(lay.n_upper);
  for (int e = 0; e < n_exo; ++e) {
    lay.decode_exo(e, kappa);
    double p = 1.0;
    for (int f = 0; f < lay.n_upper; ++f) p *= batch_prob[f][kappa[f]];
    exo_row[e] = p;
  }
  ExoMatrix exo;
  exo.n = n_exo;
  exo.p.resize(static_cast<std::size_t>(n_exo) * n_exo);
  for (int i = 0; i < n_exo; ++i)
    std::copy(exo_row.begin(), exo_row.end(), exo.p.begin() + static_cast<std::size_t>(i) * n_exo);
  exo.compute_support();
  m.exogenous.steps.push_back(std::move(exo));

  m.controllable.n_exogenous = n_exo;
  m.controllable.steps.emplace_back();
  m.rewards.emplace_back(static_cast<std::size_t>(n_dia) * n_exo * A);
  std::vector<int> w(lay.n_upper), w2(lay.n_upper);
  for (int e = 0; e < n_exo; ++e) {
    lay.decode_exo(e, kappa);
    CsrBuilder csr(n_dia, A);
    SparseDist dist;
    for (int d = 0; d < n_dia; ++d) {
      int nu, psi;
      lay.decode(d, nu, psi, w);
      // arrivals join their queues before the elevator moves
      for (int f = 0; f < lay.n_upper; ++f)
        w2[f] = std::min(w[f] + kappa[f], spec.max_queue);
      for (int a = 0; a < A; ++a) {
        int nnu = nu, npsi = psi, discharged = 0;
        std::vector<int> nw = w2;
        if (a == 0) nnu = std::min(nu + 1, spec.floors - 1);
        else if (a == 1) nnu = std::max(nu - 1, 0);
        else if (nu == 0) {
          discharged = psi;
          npsi = 0;
        } else {
          const int board = std::min(nw[nu - 1], spec.capacity - psi);
          nw[nu - 1] -= board;
          npsi = psi + board;
        }
        dist.assign(1, {lay.encode(nnu, npsi, nw), 1.0});
        csr.add_row(dist);
        int waiting = npsi;
        for (int f = 0; f < lay.n_upper; ++f) waiting += nw[f];
        double r = -spec.waiting_penalty * waiting;
        if (npsi == 0) r += spec.delivery_bonus * discharged;
        m.rewards[0][(static_cast<std::size_t>(d) * n_exo + e) * A + a] = r;
      }
    }
    m.controllable.steps[0].push_back(std::move(csr.block));
  }

  // building starts empty with the elevator parked at ground level
  for (int e = 0; e < n_exo; ++e)
    if (exo_row[e] > 0.0) m.initial.emplace_back(e, exo_row[e]);

  return finalize("elevator", std::move(m), false);
}

// --- Lower-bound family ------------------------------------------------------

Env build_lower_bound(const LowerBoundSpec& spec) {
  const int N = spec.branching;
  if (N < 1 || static_cast<int>(spec.leaf_probs.size()) != N)
    throw std::invalid_argument("bad lower-bound spec");
  for (double p : spec.leaf_probs)
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("leaf probability outside [0,1]");

  // exogenous tree: 0 = root, 1..N = mid states, then leaf pairs
  // (N+2i-1, N+2i) under mid i; controllable coordinate 0/1/2 = 0/-1/+1
  const int n_exo = 3 * N + 1;
  const int n_dia = 3;
  const int A = 2;
  FactoredModel m;
  m.factorization = {n_dia, n_exo};
  m.n_actions = A;
  m.horizon = 3;

  auto self_loops = [&](ExoMatrix& e) {
    e.n = n_exo;
    e.p.assign(static_cast<std::size_t>(n_exo) * n_exo, 0.0);
    for (int i = 0; i < n_exo; ++i) e.p[static_cast<std::size_t>(i) * n_exo + i] = 1.0;
  };
  ExoMatrix e0, e1;
  self_loops(e0);
  for (int i = 1; i <= N; ++i) e0.p[static_cast<std::size_t>(0) * n_exo + i] = 1.0 / N;
  e0.p[0] = 0.0;
  self_loops(e1);
  for (int i = 1; i <= N; ++i) {
    double* row = e1.p.data() + static_cast<std::size_t>(i) * n_exo;
    row[i] = 0.0;
    row[N + 2 * i - 1] = spec.leaf_probs[i - 1];
    row[N + 2 * i] = 1.0 - spec.leaf_probs[i - 1];
  }
  e0.compute_support();
  e1.compute_support();
  m.exogenous.steps = {std::move(e0), std::move(e1)};

  // the sign state is committed by the action taken at the mid layer
  m.controllable.n_exogenous = n_exo;
  {
    CsrBuilder hold(n_dia, A), commit(n_dia, A);
    SparseDist dist;
    for (int d = 0; d < n_dia; ++d)
      for (int a = 0; a < A; ++a) {
        dist.assign(1, {0, 1.0});
        hold.add_row(dist);
        dist.assign(1, {a == 0 ? 1 : 2, 1.0});
        commit.add_row(dist);
      }
    m.controllable.steps.emplace_back();
    m.controllable.steps.back().push_back(std::move(hold.block));
    m.controllable.steps.emplace_back();
    m.controllable.steps.back().push_back(std::move(commit.block));
  }

  const std::size_t table = static_cast<std::size_t>(n_dia) * n_exo * A;
  m.rewards.assign(3, std::vector<double>(table, 0.0));
  const double z[3] = {0.0, -1.0, 1.0};
  for (int d = 0; d < n_dia; ++d)
    for (int i = 1; i <= N; ++i)
      for (int a = 0; a < A; ++a) {
        m.rewards[2][(static_cast<std::size_t>(d) * n_exo + N + 2 * i - 1) * A + a] = z[d];
        m.rewards[2][(static_cast<std::size_t>(d) * n_exo + N + 2 * i) * A + a] = -z[d];
      }

  m.initial.emplace_back(0, 1.0);
  return finalize("lower_bound", std::move(m), false);
}

// --- Configs ---------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
  return out;
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return kv_.count(key) > 0;
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? std::stod(kv_.at(key)) : fallback;
  }
  int integer(const std::string& key, int fallback) {
    return has(key) ? std::stoi(kv_.at(key)) : fallback;
  }
  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string& v = kv_.at(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("bad boolean for " + key);
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    return has(key) ? parse_doubles(kv_.at(key)) : std::move(fallback);
  }
  void check_exhausted() const {
    for (const auto& [k, v] : kv_)
      if (!seen_.count(k)) throw std::invalid_argument("unknown config key: " + k);
  }

 private:
  const std::map<std::string, std::string>& kv_;
  std::set<std::string> seen_;
};

}  // namespace

std::map<std::string, std::string> parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

Env build_env_from_config(const std::map<std::string, std::string>& config) {
  auto kv = config;
  const auto it = kv.find("env");
  if (it == kv.end()) throw std::invalid_argument("config is missing the env key");
  const std::string kind = it->second;
  kv.erase("env");
  ConfigReader r(kv);

  if (kind == "taxi") {
    TaxiTrafficSpec spec;
    spec.grid = r.integer("grid_size", spec.grid);
    spec.traffic_prob = r.number("traffic_prob", spec.traffic_prob);
    spec.horizon = r.integer("horizon", spec.horizon);
    if (r.has("traffic_locations")) {
      const auto flat = parse_doubles(kv.at("traffic_locations"));
      if (flat.size() % 2 != 0) throw std::invalid_argument("traffic_locations needs row,col pairs");
      spec.traffic_cells.clear();
      for (std::size_t i = 0; i < flat.size(); i += 2)
        spec.traffic_cells.emplace_back(static_cast<int>(flat[i]), static_cast<int>(flat[i + 1]));
    }
    r.check_exhausted();
    return build_taxi(spec);
  }
  if (kind == "trading") {
    TradingSpec spec;
    if (r.flag("desk_scale", false)) spec.apply_desk_scale();
    spec.horizon = r.integer("horizon", spec.horizon);
    spec.price_min = r.number("price_min", spec.price_min);
    spec.price_max = r.number("price_max", spec.price_max);
    spec.tick = r.number("price_granularity", spec.tick);
    spec.initial_price = r.number("initial_price", spec.initial_price);
    spec.volatility = r.number("volatility", spec.volatility);
    spec.drift = r.number("drift", spec.drift);
    spec.initial_inventory = r.integer("initial_inventory", spec.initial_inventory);
    spec.risk_aversion = r.number("risk_aversion", spec.risk_aversion);
    spec.transaction_cost = r.number("transaction_cost", spec.transaction_cost);
    spec.temp_impact = r.number("temp_impact", spec.temp_impact);
    spec.interval = r.number("interval", spec.interval);
    r.check_exhausted();
    return build_trading(spec);
  }
  if (kind == "elevator") {
    ElevatorSpec spec;
    spec.floors = r.integer("floors", spec.floors);
    spec.capacity = r.integer("capacity", spec.capacity);
    spec.max_queue = r.integer("max_queue", spec.max_queue);
    spec.max_batch = r.integer("max_batch", spec.max_batch);
    spec.arrival_rates = r.numbers("arrival_rates", spec.arrival_rates);
    spec.delivery_bonus = r.number("delivery_bonus", spec.delivery_bonus);
    spec.waiting_penalty = r.number("waiting_penalty", spec.waiting_penalty);
    spec.horizon = r.integer("horizon", spec.horizon);
    r.check_exhausted();
    return build_elevator(spec);
  }
  if (kind == "lower_bound") {
    LowerBoundSpec spec;
    spec.branching = r.integer("branching", 1);
    spec.leaf_probs = r.numbers("leaf_probs", {});
    r.check_exhausted();
    return build_lower_bound(spec);
  }
  throw std::invalid_argument("unknown env kind: " + kind);
}

Env build_env_from_file(const std::string& path) {
  return build_env_from_config(parse_config(path));
}

Env build_named_env(const std::string& name) {
  if (name == "taxi") return build_taxi();
  if (name == "trading") return build_trading();
  if (name == "trading_desk") {
    TradingSpec spec;
    spec.apply_desk_scale();
    return build_trading(spec);
  }
  if (name == "elevator") return build_elevator();
  if (name == "lower_bound") {
    LowerBoundSpec spec;
    spec.branching = 4;
    spec.leaf_probs = {0.3, 0.4333333333333333, 0.5666666666666667, 0.7};
    return build_lower_bound(spec);
  }
  throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace pcmdp
