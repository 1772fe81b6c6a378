#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pcmdp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and up to three
/// tags. Adding new tags never perturbs streams derived from other tags.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(master ^ 0x517cc1b727220a95ULL);
  s = splitmix64(s ^ splitmix64(a));
  s = splitmix64(s ^ splitmix64(b + 0x2545f4914f6cdd1dULL));
  s = splitmix64(s ^ splitmix64(c + 0x9e3779b97f4a7c15ULL));
  return s;
}

/// Self-contained xoshiro256++ generator. All sampling helpers are
/// implemented here so that output is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x = splitmix64(x);
      w = x;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Standard normal via Box-Muller (one value per call, no caching, so the
  /// stream position is a pure function of the call count).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Samples an index from a dense probability vector.
  int sample_dense(std::span<const double> p) {
    double u = uniform();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      u -= p[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;
  }

  /// Samples from a sparse (index, probability) support list.
  int sample_sparse(std::span<const std::pair<int, double>> support) {
    double u = uniform();
    for (std::size_t i = 0; i + 1 < support.size(); ++i) {
      u -= support[i].second;
      if (u < 0.0) return support[i].first;
    }
    return support.back().first;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace pcmdp
