#ifndef ADHINT_GRADIENT_MODULATION_HPP_
#define ADHINT_GRADIENT_MODULATION_HPP_

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adhint/errors.hpp"
#include "adhint/rollout.hpp"

namespace adhint {

enum class FactorMode { kFull, kNoCgm, kNoMasking, kNone };

inline std::string_view to_string(FactorMode m) {
  switch (m) {
    case FactorMode::kFull: return "full";
    case FactorMode::kNoCgm: return "no_cgm";
    case FactorMode::kNoMasking: return "no_masking";
    case FactorMode::kNone: return "none";
  }
  return "?";
}

inline FactorMode parse_factor_mode(std::string_view s) {
  if (s == "full") return FactorMode::kFull;
  if (s == "no_cgm") return FactorMode::kNoCgm;
  if (s == "no_masking") return FactorMode::kNoMasking;
  if (s == "none") return FactorMode::kNone;
  throw ConfigError("unknown factor mode '" + std::string(s) + "'");
}

/// Thrown for a hint rollout with no policy-generated continuation.
class EmptyContinuation : public std::runtime_error {
 public:
  EmptyContinuation() : std::runtime_error("hint rollout has no continuation tokens") {}
};

inline double continuation_entropy(const Rollout& r) {
  const auto h = static_cast<std::size_t>(r.hint_length);
  if (r.size() <= h) throw EmptyContinuation();
  double sum = 0.0;
  for (std::size_t t = h; t < r.size(); ++t) sum += r.entropy[t];
  return sum / static_cast<double>(r.size() - h);
}

/// Cosine bump on [alpha, 1/alpha] peaking at g(1) = 1.
inline double g_schedule(double x, double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "g_schedule: alpha must be in (0, 1]");
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (alpha == 1.0) return x == 1.0 ? 1.0 : 0.0;
  if (x >= alpha && x <= 1.0) return std::sin(half_pi * (x - alpha) / (1.0 - alpha));
  if (x > 1.0 && x <= 1.0 / alpha) return std::cos(half_pi * (x - 1.0) / (1.0 / alpha - 1.0));
  return 0.0;
}

inline constexpr double kZeroEntropy = 1e-9;

/// H_t / h_bar, with 0/0 read as perfect consistency and x/0 as none.
inline double entropy_ratio(double h_t, double h_bar) {
  if (h_bar < kZeroEntropy) return h_t < kZeroEntropy ? 1.0 : std::numeric_limits<double>::infinity();
  return h_t / h_bar;
}

struct TokenFactorPlan {
  std::vector<double> k;
  int hint_length = 0;
  double alpha = 0.5;
  std::optional<double> h_bar;  // absent for naive rollouts and empty continuations
  bool empty_continuation = false;
};

/// Per-token gradient coefficients. `a_hat` is the pooled advantage; its sign
/// drives masking.
inline TokenFactorPlan token_factors(const Rollout& r, double a_hat, double alpha,
                                     FactorMode mode = FactorMode::kFull) {
  TokenFactorPlan plan;
  plan.k.assign(r.size(), 1.0);
  plan.hint_length = r.hint_length;
  plan.alpha = alpha;
  if (r.kind == RolloutKind::kNaive || r.hint_length == 0) return plan;

  const auto h = static_cast<std::size_t>(r.hint_length);
  const bool masking = mode == FactorMode::kFull || mode == FactorMode::kNoCgm;
  const bool cgm = mode == FactorMode::kFull || mode == FactorMode::kNoMasking;

  if (r.size() > h) plan.h_bar = continuation_entropy(r);
  else plan.empty_continuation = true;

  for (std::size_t t = 0; t < h; ++t) {
    if (masking && a_hat <= 0.0) plan.k[t] = 0.0;
    else if (!cgm) plan.k[t] = 1.0;
    else if (!plan.h_bar) plan.k[t] = 0.0;  // no on-policy anchor to compare against
    else plan.k[t] = g_schedule(entropy_ratio(r.entropy[t], *plan.h_bar), alpha);
  }
  return plan;
}

}  // namespace adhint

#endif  // ADHINT_GRADIENT_MODULATION_HPP_
