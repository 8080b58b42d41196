#ifndef ADHINT_ADAPTIVE_HINT_HPP_
#define ADHINT_ADAPTIVE_HINT_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>

#include "adhint/errors.hpp"
#include "adhint/rng.hpp"

namespace adhint {

enum class ScheduleMode { kAdaptive, kAnnealing, kFixed };

inline std::string_view to_string(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::kAdaptive: return "adaptive";
    case ScheduleMode::kAnnealing: return "annealing";
    case ScheduleMode::kFixed: return "fixed";
  }
  return "?";
}

inline ScheduleMode parse_schedule_mode(std::string_view s) {
  if (s == "adaptive") return ScheduleMode::kAdaptive;
  if (s == "annealing") return ScheduleMode::kAnnealing;
  if (s == "fixed") return ScheduleMode::kFixed;
  throw ConfigError("unknown schedule mode '" + std::string(s) + "'");
}

struct HintSchedule {
  double w_max = 0.2;
  double w_min = 0.0;
  double noise_radius = 0.01;

  void validate() const {
    if (!(0.0 <= w_min && w_min <= w_max && w_max <= 1.0))
      throw ConfigError("hint schedule requires 0 <= w_min <= w_max <= 1");
    if (!(noise_radius >= 0.0 && noise_radius <= w_min + 1.0))
      throw ConfigError("hint schedule requires 0 <= noise_radius <= w_min + 1");
  }
};

struct DifficultyPrior {
  double diff_n = 0.0;
  double mean_naive_reward = 0.0;
};

inline DifficultyPrior difficulty_prior(std::span<const double> naive_rewards) {
  require(!naive_rewards.empty(), "difficulty_prior: empty reward list");
  const double mean =
      std::accumulate(naive_rewards.begin(), naive_rewards.end(), 0.0) / static_cast<double>(naive_rewards.size());
  return {1.0 - mean, mean};
}

/// Linear map of Diff_N onto [w_min, w_max] plus a given noise offset,
/// clamped to [0, 1].
inline double hint_ratio_with_noise(const DifficultyPrior& prior, const HintSchedule& s, double sigma) {
  const double w = (s.w_max - s.w_min) * prior.diff_n + s.w_min + sigma;
  return std::clamp(w, 0.0, 1.0);
}

/// Draws sigma ~ U(-R, R) from `rng`; exactly one draw per call.
inline double hint_ratio(const DifficultyPrior& prior, const HintSchedule& s, Rng& rng) {
  const double sigma = rng.uniform(-s.noise_radius, s.noise_radius);
  return hint_ratio_with_noise(prior, s, sigma);
}

/// h = min(floor(w * teacher_len), max_len - 1). The 1e-9 nudge keeps exact
/// products such as 0.2 * 10 from flooring down through rounding error.
inline int hint_length(double w, int teacher_len, int max_len) {
  require(w >= 0.0 && w <= 1.0, "hint_length: w must be in [0, 1]");
  require(teacher_len >= 1, "hint_length: teacher_len must be >= 1");
  const int h = static_cast<int>(std::floor(w * teacher_len + 1e-9));
  return std::max(0, std::min(h, max_len - 1));
}

/// Time-varying baseline: linear decay from w_max at step 0 to 0 at the end.
inline double annealing_ratio(int step, int total_steps, const HintSchedule& s) {
  require(step >= 0 && step <= total_steps, "annealing_ratio: step out of range");
  if (total_steps == 0) return s.w_max;
  return s.w_max * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

}  // namespace adhint

#endif  // ADHINT_ADAPTIVE_HINT_HPP_
