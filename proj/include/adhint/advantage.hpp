#ifndef ADHINT_ADVANTAGE_HPP_
#define ADHINT_ADVANTAGE_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adhint/errors.hpp"

namespace adhint {

enum class AdvantageMode { kAeRdp, kPooled };

inline std::string_view to_string(AdvantageMode m) { return m == AdvantageMode::kAeRdp ? "ae_rdp" : "pooled"; }

inline AdvantageMode parse_advantage_mode(std::string_view s) {
  if (s == "ae_rdp") return AdvantageMode::kAeRdp;
  if (s == "pooled") return AdvantageMode::kPooled;
  throw ConfigError("unknown advantage mode '" + std::string(s) + "'");
}

inline constexpr double kDegenerateStd = 1e-12;
inline constexpr double kGroupMeanFloor = 1e-4;

struct PooledAdvantages {
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<double> a_hat;
  bool degenerate = false;
};

inline PooledAdvantages pooled_advantages(std::span<const double> rewards) {
  require(rewards.size() >= 2, "pooled_advantages: need at least 2 rollouts");
  const auto g = static_cast<double>(rewards.size());
  PooledAdvantages out;
  out.mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / g;
  double ss = 0.0;
  for (double r : rewards) ss += (r - out.mean) * (r - out.mean);
  out.std = std::sqrt(ss / g);
  out.a_hat.assign(rewards.size(), 0.0);
  if (out.std < kDegenerateStd) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) out.a_hat[i] = (rewards[i] - out.mean) / out.std;
  return out;
}

/// +1 iff a_hat > 0; zero counts as negative.
inline int sign_indicator(double a_hat) { return a_hat > 0.0 ? 1 : -1; }

/// Rescales pooled advantages by (M / group_mean)^s. The first `n_naive`
/// entries belong to the naive group (mean 1 - diff_n), the rest to the hint
/// group (mean 1 - diff_h).
inline std::vector<double> ae_rdp(std::span<const double> a_hat, double pooled_mean, double diff_n,
                                  double diff_h, std::size_t n_naive) {
  require(n_naive <= a_hat.size(), "ae_rdp: n_naive exceeds group size");
  std::vector<double> out(a_hat.size(), 0.0);
  for (std::size_t i = 0; i < a_hat.size(); ++i) {
    if (a_hat[i] == 0.0) continue;
    const double group_mean = 1.0 - (i < n_naive ? diff_n : diff_h);
    const double factor = sign_indicator(a_hat[i]) > 0
                              ? pooled_mean / std::max(group_mean, kGroupMeanFloor)
                              : group_mean / std::max(pooled_mean, kGroupMeanFloor);
    out[i] = factor * a_hat[i];
  }
  return out;
}

inline std::vector<double> pooled_only(std::span<const double> a_hat) { return {a_hat.begin(), a_hat.end()}; }

/// Everything the estimator derived for one query's group.
struct AdvantageReport {
  std::vector<double> rewards;
  std::size_t n_naive = 0;
  double pooled_mean = 0.0;
  double pooled_std = 0.0;
  double diff_n = 0.0;
  double diff_h = 0.0;
  std::vector<double> a_hat;
  std::vector<int> signs;
  std::vector<double> a_tilde;
  bool degenerate = false;
};

/// Rewards are ordered naive first; with no hint rollouts diff_h mirrors
/// diff_n so every factor is 1.
inline AdvantageReport estimate_advantages(std::span<const double> rewards, std::size_t n_naive,
                                           AdvantageMode mode) {
  require(n_naive >= 1 && n_naive <= rewards.size(), "estimate_advantages: bad naive count");
  AdvantageReport rep;
  rep.rewards.assign(rewards.begin(), rewards.end());
  rep.n_naive = n_naive;
  const auto mean_of = [](std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };
  rep.diff_n = 1.0 - mean_of(rewards.first(n_naive));
  rep.diff_h = n_naive < rewards.size() ? 1.0 - mean_of(rewards.subspan(n_naive)) : rep.diff_n;
  PooledAdvantages pooled = pooled_advantages(rewards);
  rep.pooled_mean = pooled.mean;
  rep.pooled_std = pooled.std;
  rep.degenerate = pooled.degenerate;
  rep.a_hat = std::move(pooled.a_hat);
  rep.signs.reserve(rep.a_hat.size());
  for (double a : rep.a_hat) rep.signs.push_back(sign_indicator(a));
  rep.a_tilde = mode == AdvantageMode::kAeRdp ? ae_rdp(rep.a_hat, rep.pooled_mean, rep.diff_n, rep.diff_h, n_naive)
                                              : pooled_only(rep.a_hat);
  return rep;
}

}  // namespace adhint

#endif  // ADHINT_ADVANTAGE_HPP_
