#ifndef ADHINT_ROLLOUT_HPP_
#define ADHINT_ROLLOUT_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adhint/errors.hpp"
#include "adhint/features.hpp"
#include "adhint/policy.hpp"
#include "adhint/rng.hpp"
#include "adhint/task_world.hpp"

namespace adhint {

enum class RolloutKind { kNaive, kHint };

inline const char* to_string(RolloutKind k) { return k == RolloutKind::kNaive ? "naive" : "hint"; }

struct Rollout {
  std::size_t task_index = 0;
  RolloutKind kind = RolloutKind::kNaive;
  TokenSeq tokens;
  int hint_length = 0;
  std::vector<double> logprob_new;
  std::vector<double> logprob_old;  // 0 for forced hint tokens
  std::vector<double> entropy;      // nats, of the distribution at each step
  std::vector<StepContext> contexts;
  bool truncated = false;
  RewardBreakdown reward;

  std::size_t size() const { return tokens.size(); }
  std::size_t continuation_size() const { return tokens.size() - static_cast<std::size_t>(hint_length); }

  bool operator==(const Rollout&) const = default;
};

/// Identifies the RNG stream of one rollout: (seed, stream, step, task, index).
struct RolloutKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t task = 0;

  Rng rng(Stream stream, std::uint64_t index) const { return stream_rng(seed, stream, step, task, index); }
};

namespace detail {

inline Rollout generate(const PolicyParams& params, const TaskInstance& task,
                        std::span<const Token> forced, Decoding decoding, int max_len, Rng& rng) {
  require(max_len >= 1, "max_len must be >= 1");
  Rollout r;
  r.kind = forced.empty() ? RolloutKind::kNaive : RolloutKind::kHint;
  ContextBuilder builder(params.spec(), task);
  const auto cap = static_cast<std::size_t>(max_len);
  r.tokens.reserve(cap);
  bool ended = false;
  while (r.tokens.size() < cap && !ended) {
    const StepContext ctx = builder.current();
    const StepDistribution d = next_distribution(params, ctx);
    const std::size_t t = r.tokens.size();
    const bool is_forced = t < forced.size();
    const Token y = is_forced ? forced[t] : sample_token(d, decoding, rng);
    const double lp = d.logprobs[static_cast<std::size_t>(y)];
    r.tokens.push_back(y);
    r.logprob_new.push_back(lp);
    r.logprob_old.push_back(is_forced ? 0.0 : lp);
    r.entropy.push_back(d.entropy);
    r.contexts.push_back(ctx);
    builder.push(y);
    ended = (y == Vocab::kEos);
  }
  r.hint_length = static_cast<int>(std::min(forced.size(), r.tokens.size()));
  r.truncated = !ended;
  r.reward = verify(task, r.tokens);
  return r;
}

}  // namespace detail

/// Samples from BOS until EOS or max_len.
inline std::vector<Rollout> roll_naive(const PolicyParams& params, const TaskInstance& task, int n,
                                       Decoding decoding, int max_len, const RolloutKey& key) {
  require(n >= 1, "roll_naive: n must be >= 1");
  std::vector<Rollout> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng = key.rng(Stream::kNaive, static_cast<std::uint64_t>(i));
    out.push_back(detail::generate(params, task, {}, decoding, max_len, rng));
    out.back().task_index = key.task;
  }
  return out;
}

/// Forces the first h teacher tokens (old log-prob 0, i.e. pi_old = 1), then
/// samples the continuation. With h = 0 the rollouts are naive-distributed
/// but still tagged as hint rollouts and drawn from the hint stream.
inline std::vector<Rollout> roll_hint(const PolicyParams& params, const HintCorpusEntry& entry, int m,
                                      int h, Decoding decoding, int max_len, const RolloutKey& key) {
  require(m >= 1, "roll_hint: m must be >= 1");
  require(h >= 0 && h <= entry.teacher_len, "roll_hint: h must be within [0, teacher_len]");
  const std::span<const Token> prefix(entry.teacher_trajectory.data(), static_cast<std::size_t>(h));
  std::vector<Rollout> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Rng rng = key.rng(Stream::kHint, static_cast<std::uint64_t>(i));
    Rollout r = detail::generate(params, entry.task, prefix, decoding, max_len, rng);
    r.kind = RolloutKind::kHint;
    r.task_index = key.task;
    out.push_back(std::move(r));
  }
  return out;
}

/// pi_theta / pi_old at token t from the recorded log-probs; optionally
/// clamped to [1 - eps, 1 + eps].
inline double importance_ratio(const Rollout& r, std::size_t t, std::optional<double> clip_eps = std::nullopt) {
  require(t < r.size(), "importance_ratio: t out of range");
  const double ratio = std::exp(r.logprob_new[t] - r.logprob_old[t]);
  if (clip_eps) return std::clamp(ratio, 1.0 - *clip_eps, 1.0 + *clip_eps);
  return ratio;
}

}  // namespace adhint

#endif  // ADHINT_ROLLOUT_HPP_
