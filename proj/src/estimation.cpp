#include "pcmdp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pcmdp {
namespace {

constexpr std::uint32_t kMagic = 0x504d4350;  // "PCMP"
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("truncated stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_i64(std::ostream& os, std::int64_t v) {
  auto u = static_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::int64_t read_i64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("truncated stream");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<std::int64_t>(u);
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  write_i64(os, static_cast<std::int64_t>(u));
}

double read_f64(std::istream& is) {
  auto u = static_cast<std::uint64_t>(read_i64(is));
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

void write_header(std::ostream& os, std::uint32_t kind) {
  write_u32(os, kMagic);
  write_u32(os, kVersion);
  write_u32(os, kind);
}

void check_header(std::istream& is, std::uint32_t kind) {
  if (read_u32(is) != kMagic) throw std::runtime_error("bad magic");
  if (read_u32(is) != kVersion) throw std::runtime_error("unsupported version");
  if (read_u32(is) != kind) throw std::runtime_error("wrong record kind");
}

}  // namespace

ExoStatistics::ExoStatistics(int horizon, int n_exogenous)
    : horizon_(horizon), n_exo_(n_exogenous) {
  if (horizon < 1 || n_exogenous < 1) throw std::invalid_argument("bad shape");
  n_.assign(static_cast<std::size_t>(horizon_) * n_exo_, 0);
  if (horizon_ > 1)
    m_.assign(static_cast<std::size_t>(horizon_ - 1) * n_exo_ * n_exo_, 0);
}

void ExoStatistics::record_transition(int h, int s_exo, int next_exo) {
  if (h < 0 || h >= horizon_ - 1) throw std::out_of_range("step has no successor");
  n_[static_cast<std::size_t>(h) * n_exo_ + s_exo] += 1;
  m_[(static_cast<std::size_t>(h) * n_exo_ + s_exo) * n_exo_ + next_exo] += 1;
}

void ExoStatistics::record_visit(int h, int s_exo) {
  if (h < 0 || h >= horizon_) throw std::out_of_range("bad step");
  n_[static_cast<std::size_t>(h) * n_exo_ + s_exo] += 1;
}

ExoStatistics::Row ExoStatistics::empirical_row(int h, int s_exo) const {
  if (h < 0 || h >= horizon_ - 1) throw std::out_of_range("step has no successor");
  Row row;
  row.p.resize(n_exo_);
  const std::int64_t n = visits(h, s_exo);
  if (n == 0) {
    row.unvisited = true;
    const double u = 1.0 / n_exo_;
    for (double& x : row.p) x = u;
    return row;
  }
  const std::int64_t* m = &m_[(static_cast<std::size_t>(h) * n_exo_ + s_exo) * n_exo_];
  for (int j = 0; j < n_exo_; ++j) row.p[j] = static_cast<double>(m[j]) / n;
  return row;
}

void ExoStatistics::dump(std::ostream& os) const {
  write_header(os, 1);
  write_u32(os, static_cast<std::uint32_t>(horizon_));
  write_u32(os, static_cast<std::uint32_t>(n_exo_));
  for (std::int64_t v : n_) write_i64(os, v);
  for (std::int64_t v : m_) write_i64(os, v);
}

ExoStatistics ExoStatistics::load(std::istream& is) {
  check_header(is, 1);
  const int h = static_cast<int>(read_u32(is));
  const int e = static_cast<int>(read_u32(is));
  ExoStatistics st(h, e);
  for (std::int64_t& v : st.n_) v = read_i64(is);
  for (std::int64_t& v : st.m_) v = read_i64(is);
  return st;
}

void FullStatistics::record(int h, int s, int a, int next_s) {
  if (h < 0 || h >= horizon_) throw std::out_of_range("bad step");
  StateEntry& entry = per_step_[h][s];
  if (entry.empty()) entry.resize(n_actions_);
  entry[a].count += 1;
  if (next_s < 0) return;  // last step: count only
  auto& succ = entry[a].successors;
  const auto it = std::lower_bound(succ.begin(), succ.end(), next_s,
                                   [](const auto& p, int key) { return p.first < key; });
  if (it != succ.end() && it->first == next_s)
    it->second += 1;
  else
    succ.insert(it, {next_s, 1});
}

std::int64_t FullStatistics::count(int h, int s, int a) const {
  auto it = per_step_[h].find(s);
  if (it == per_step_[h].end()) return 0;
  return it->second[a].count;
}

std::vector<std::pair<int, double>> FullStatistics::empirical_row(int h, int s,
                                                                  int a) const {
  std::vector<std::pair<int, double>> row;
  auto it = per_step_[h].find(s);
  if (it == per_step_[h].end()) return row;
  const ActionEntry& e = it->second[a];
  const double denom = static_cast<double>(std::max<std::int64_t>(1, e.count));
  row.reserve(e.successors.size());
  for (const auto& [next_s, c] : e.successors)
    row.emplace_back(next_s, static_cast<double>(c) / denom);
  return row;
}

void FullStatistics::dump(std::ostream& os) const {
  write_header(os, 2);
  write_u32(os, static_cast<std::uint32_t>(horizon_));
  write_u32(os, static_cast<std::uint32_t>(n_actions_));
  for (int h = 0; h < horizon_; ++h) {
    write_i64(os, static_cast<std::int64_t>(per_step_[h].size()));
    for (const auto& [s, entry] : per_step_[h]) {
      write_i64(os, s);
      for (int a = 0; a < n_actions_; ++a) {
        write_i64(os, entry[a].count);
        write_i64(os, static_cast<std::int64_t>(entry[a].successors.size()));
        for (const auto& [next_s, c] : entry[a].successors) {
          write_i64(os, next_s);
          write_i64(os, c);
        }
      }
    }
  }
}

FullStatistics FullStatistics::load(std::istream& is) {
  check_header(is, 2);
  const int h = static_cast<int>(read_u32(is));
  const int a_count = static_cast<int>(read_u32(is));
  FullStatistics st(h, a_count);
  for (int step = 0; step < h; ++step) {
    const std::int64_t n_states = read_i64(is);
    for (std::int64_t i = 0; i < n_states; ++i) {
      const int s = static_cast<int>(read_i64(is));
      StateEntry& entry = st.per_step_[step][s];
      entry.resize(a_count);
      for (int a = 0; a < a_count; ++a) {
        entry[a].count = read_i64(is);
        const std::int64_t n_succ = read_i64(is);
        entry[a].successors.reserve(static_cast<std::size_t>(n_succ));
        for (std::int64_t j = 0; j < n_succ; ++j) {
          const int next_s = static_cast<int>(read_i64(is));
          entry[a].successors.emplace_back(next_s, read_i64(is));
        }
      }
    }
  }
  return st;
}

double LearningRateSchedule::rate(std::int64_t t) const {
  if (t < 1) throw std::invalid_argument("t must be >= 1");
  return static_cast<double>(horizon_ + 1) / static_cast<double>(horizon_ + t);
}

std::vector<double> learning_rate_weights(const LearningRateSchedule& schedule, int t) {
  if (t < 0) throw std::invalid_argument("t must be >= 0");
  std::vector<double> w(static_cast<std::size_t>(t) + 1, 0.0);
  if (t == 0) {
    w[0] = 1.0;  // alpha_0^0 = 1 by convention
    return w;
  }
  // Build forward: after processing step j, w[i] holds alpha_j^i.
  w[1] = schedule.rate(1);
  for (int j = 2; j <= t; ++j) {
    const double a = schedule.rate(j);
    for (int i = 1; i < j; ++i) w[i] *= (1.0 - a);
    w[j] = a;
  }
  return w;
}

StepTables::StepTables(int horizon, int n_controllable, int n_exogenous, int n_actions)
    : horizon_(horizon), n_dia_(n_controllable), n_exo_(n_exogenous),
      n_actions_(n_actions) {
  if (horizon < 1 || n_controllable < 1 || n_exogenous < 1 || n_actions < 1)
    throw std::invalid_argument("bad shape");
  blocks_.resize(static_cast<std::size_t>(horizon_) * n_exo_);
}

double StepTables::q(int h, int s, int a) const {
  const int s_exo = s % n_exo_;
  const Block& b = blocks_[static_cast<std::size_t>(h) * n_exo_ + s_exo];
  if (b.q.empty()) return default_value(h);
  const int s_dia = s / n_exo_;
  return b.q[static_cast<std::size_t>(s_dia) * n_actions_ + a];
}

double StepTables::v(int h, int s) const {
  const int s_exo = s % n_exo_;
  const Block& b = blocks_[static_cast<std::size_t>(h) * n_exo_ + s_exo];
  if (b.v.empty()) return default_value(h);
  return b.v[s / n_exo_];
}

StepTables::Block& StepTables::block_for_update(int h, int s_exo) {
  Block& b = blocks_[static_cast<std::size_t>(h) * n_exo_ + s_exo];
  if (b.q.empty()) {
    b.q.assign(static_cast<std::size_t>(n_dia_) * n_actions_, default_value(h));
    b.v.assign(n_dia_, default_value(h));
  }
  return b;
}

void StepTables::dump(std::ostream& os) const {
  write_header(os, 3);
  write_u32(os, static_cast<std::uint32_t>(horizon_));
  write_u32(os, static_cast<std::uint32_t>(n_dia_));
  write_u32(os, static_cast<std::uint32_t>(n_exo_));
  write_u32(os, static_cast<std::uint32_t>(n_actions_));
  for (const Block& b : blocks_) {
    write_u32(os, b.q.empty() ? 0u : 1u);
    if (b.q.empty()) continue;
    for (double v : b.q) write_f64(os, v);
    for (double v : b.v) write_f64(os, v);
  }
}

StepTables StepTables::load(std::istream& is) {
  check_header(is, 3);
  const int h = static_cast<int>(read_u32(is));
  const int d = static_cast<int>(read_u32(is));
  const int e = static_cast<int>(read_u32(is));
  const int a = static_cast<int>(read_u32(is));
  StepTables t(h, d, e, a);
  for (std::size_t i = 0; i < t.blocks_.size(); ++i) {
    if (read_u32(is) == 0) continue;
    Block& b = t.blocks_[i];
    b.q.resize(static_cast<std::size_t>(d) * a);
    b.v.resize(d);
    for (double& v : b.q) v = read_f64(is);
    for (double& v : b.v) v = read_f64(is);
  }
  return t;
}

double counterfactual_target(const ControllableBlock& block, int horizon, int h,
                             int observed_next_exo, std::span<const double> f,
                             int n_exogenous, int s_dia, int a) {
  if (h >= horizon - 1) return 0.0;
  const int row = s_dia * block.n_actions + a;
  double sum = 0.0;
  for (int k = block.offsets[row]; k < block.offsets[row + 1]; ++k) {
    const int next_dia = block.cols[k];
    sum += block.probs[k] *
           f[static_cast<std::size_t>(next_dia) * n_exogenous + observed_next_exo];
  }
  return sum;
}

double counterfactual_target(const FactoredModel& model, int h, int observed_next_exo,
                             std::span<const double> f, int s_dia, int s_exo, int a) {
  if (h >= model.horizon - 1) return 0.0;
  return counterfactual_target(model.controllable.block(h, s_exo), model.horizon, h,
                               observed_next_exo, f, model.factorization.n_exogenous,
                               s_dia, a);
}

double bernstein_bound(double variance_sum, double bound_B, double delta) {
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("delta must lie in (0, 1)");
  const double L = std::log(2.0 / delta);
  return std::sqrt(2.0 * variance_sum * L) + (2.0 * bound_B / 3.0) * L;
}

double bernstein_mean_bound(double variance_sum, double bound_B, std::int64_t n,
                            double delta) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  return bernstein_bound(variance_sum, bound_B, delta) / static_cast<double>(n);
}

}  // namespace pcmdp
