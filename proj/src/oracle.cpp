#include "pcmdp/oracle.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pcmdp {

ScalingFit regret_slope(std::span<const double> episodes, std::span<const double> regrets) {
  if (episodes.size() != regrets.size()) throw std::invalid_argument("size mismatch");
  if (episodes.size() < 4) throw std::invalid_argument("need at least 4 points");
  ScalingFit fit;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    if (i > 0 && episodes[i] <= episodes[i - 1])
      throw std::invalid_argument("episode counts must be strictly increasing");
    if (regrets[i] <= 0.0) throw std::invalid_argument("regrets must be positive");
    fit.points.emplace_back(std::log(episodes[i]), std::log(regrets[i]));
  }
  const double n = static_cast<double>(fit.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : fit.points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::invalid_argument("degenerate abscissae");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double r = y - (fit.slope * x + fit.intercept);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

std::vector<double> brute_force_optimal(const FactoredModel& model, double max_policies) {
  const int S = model.factorization.total();
  const int A = model.n_actions;
  const int H = model.horizon;
  const double count = std::pow(static_cast<double>(A), static_cast<double>(S) * H);
  if (count > max_policies)
    throw std::runtime_error("policy space too large for enumeration");

  // composed kernels, dense: P[h][(s * A + a) * S + s']
  std::vector<std::vector<double>> full(std::max(0, H - 1));
  for (int h = 0; h + 1 < H; ++h) full[h] = compose_full_kernel(model, h);

  std::vector<int> digits(static_cast<std::size_t>(S) * H, 0);  // [h * S + s]
  std::vector<double> best(S, -std::numeric_limits<double>::infinity());
  std::vector<double> v(S), v_next(S);
  while (true) {
    std::fill(v_next.begin(), v_next.end(), 0.0);
    for (int h = H - 1; h >= 0; --h) {
      for (int s = 0; s < S; ++s) {
        const int a = digits[static_cast<std::size_t>(h) * S + s];
        double val = model.reward(h, s, a);
        if (h + 1 < H) {
          const double* row = full[h].data() + (static_cast<std::size_t>(s) * A + a) * S;
          for (int t = 0; t < S; ++t) val += row[t] * v_next[t];
        }
        v[s] = val;
      }
      std::swap(v, v_next);
    }
    for (int s = 0; s < S; ++s) best[s] = std::max(best[s], v_next[s]);

    std::size_t pos = 0;
    while (pos < digits.size() && ++digits[pos] == A) digits[pos++] = 0;
    if (pos == digits.size()) break;
  }
  return best;
}

FactoredModel random_model(Rng& rng, int max_controllable, int max_exogenous,
                           int max_actions, int max_horizon, double max_policies) {
  int n_dia, n_exo, A, H;
  while (true) {
    n_dia = 1 + rng.uniform_int(max_controllable);
    n_exo = 1 + rng.uniform_int(max_exogenous);
    A = 1 + rng.uniform_int(max_actions);
    H = 1 + rng.uniform_int(max_horizon);
    const double count =
        std::pow(static_cast<double>(A), static_cast<double>(n_dia) * n_exo * H);
    if (count <= max_policies) break;
  }

  FactoredModel m;
  m.factorization = {n_dia, n_exo};
  m.n_actions = A;
  m.horizon = H;

  auto random_row = [&](double* out, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      out[i] = (n > 1 && rng.uniform() < 0.3) ? 0.0 : 0.05 + rng.uniform();
      sum += out[i];
    }
    if (sum == 0.0) {
      out[rng.uniform_int(n)] = 1.0;
      sum = 1.0;
    }
    for (int i = 0; i < n; ++i) out[i] /= sum;
  };

  for (int h = 0; h + 1 < H; ++h) {
    ExoMatrix exo;
    exo.n = n_exo;
    exo.p.resize(static_cast<std::size_t>(n_exo) * n_exo);
    for (int i = 0; i < n_exo; ++i) random_row(exo.p.data() + static_cast<std::size_t>(i) * n_exo, n_exo);
    exo.compute_support();
    m.exogenous.steps.push_back(std::move(exo));
  }
  if (H == 1) {  // validate() still wants a well-formed kernel
    ExoMatrix exo;
    exo.n = n_exo;
    exo.p.assign(static_cast<std::size_t>(n_exo) * n_exo, 1.0 / n_exo);
    exo.compute_support();
    m.exogenous.steps.push_back(std::move(exo));
  }

  m.controllable.n_exogenous = n_exo;
  m.controllable.steps.emplace_back();
  std::vector<double> dense(n_dia);
  for (int e = 0; e < n_exo; ++e) {
    ControllableBlock block;
    block.n_controllable = n_dia;
    block.n_actions = A;
    block.offsets.push_back(0);
    for (int d = 0; d < n_dia; ++d)
      for (int a = 0; a < A; ++a) {
        random_row(dense.data(), n_dia);
        for (int t = 0; t < n_dia; ++t)
          if (dense[t] > 0.0) {
            block.cols.push_back(t);
            block.probs.push_back(dense[t]);
          }
        block.offsets.push_back(static_cast<int>(block.cols.size()));
      }
    m.controllable.steps[0].push_back(std::move(block));
  }

  m.rewards.resize(H);
  for (int h = 0; h < H; ++h) {
    m.rewards[h].resize(static_cast<std::size_t>(n_dia) * n_exo * A);
    for (double& r : m.rewards[h]) r = rng.uniform();
  }
  m.reward_min = 0.0;
  m.reward_max = 1.0;

  const int s0 = rng.uniform_int(n_dia * n_exo);
  if (rng.uniform() < 0.5) {
    m.initial.emplace_back(s0, 1.0);
  } else {
    std::vector<double> init(n_dia * n_exo);
    random_row(init.data(), n_dia * n_exo);
    for (int s = 0; s < n_dia * n_exo; ++s)
      if (init[s] > 0.0) m.initial.emplace_back(s, init[s]);
  }
  m.validate();
  return m;
}

ExogeneityResult exogeneity_test(const std::function<int(int, Rng&)>& sampler,
                                 int n_actions, int n_outcomes,
                                 int samples_per_action, Rng& rng) {
  if (samples_per_action < 1000)
    throw std::invalid_argument("need at least 1000 samples per action");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_actions) * n_outcomes, 0);
  for (int a = 0; a < n_actions; ++a)
    for (int i = 0; i < samples_per_action; ++i) {
      const int o = sampler(a, rng);
      if (o < 0 || o >= n_outcomes) throw std::out_of_range("sampler outcome");
      counts[static_cast<std::size_t>(a) * n_outcomes + o] += 1;
    }

  std::vector<int> live;  // outcomes observed at least once
  for (int o = 0; o < n_outcomes; ++o) {
    std::int64_t col = 0;
    for (int a = 0; a < n_actions; ++a) col += counts[static_cast<std::size_t>(a) * n_outcomes + o];
    if (col > 0) live.push_back(o);
  }
  ExogeneityResult res;
  if (live.size() < 2 || n_actions < 2) {
    res.skipped = true;
    return res;
  }
  const double total = static_cast<double>(n_actions) * samples_per_action;
  for (const int o : live) {
    std::int64_t col = 0;
    for (int a = 0; a < n_actions; ++a) col += counts[static_cast<std::size_t>(a) * n_outcomes + o];
    const double expected = static_cast<double>(samples_per_action) * col / total;
    for (int a = 0; a < n_actions; ++a) {
      const double diff = counts[static_cast<std::size_t>(a) * n_outcomes + o] - expected;
      res.statistic += diff * diff / expected;
    }
  }
  res.dof = (n_actions - 1) * (static_cast<int>(live.size()) - 1);
  res.p_value = boost::math::gamma_q(res.dof / 2.0, res.statistic / 2.0);
  return res;
}

double concentration_coverage(std::span<const double> p, int n, double delta,
                              int trials, Rng& rng) {
  if (trials < 100) throw std::invalid_argument("need at least 100 trials");
  if (n < 1 || delta <= 0.0 || delta > 1.0) throw std::invalid_argument("bad parameters");
  const double L = std::log(2.0 * static_cast<double>(p.size()) / delta);
  std::vector<double> envelope(p.size());
  for (std::size_t j = 0; j < p.size(); ++j)
    envelope[j] = std::sqrt(2.0 * p[j] * (1.0 - p[j]) * L / n) + 4.0 * L / (3.0 * n);

  std::vector<std::int64_t> counts(p.size());
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) counts[rng.sample_dense(p)] += 1;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double hat = static_cast<double>(counts[j]) / n;
      if (std::abs(hat - p[j]) > envelope[j]) {
        ++violations;
        break;
      }
    }
  }
  return static_cast<double>(violations) / trials;
}

}  // namespace pcmdp
