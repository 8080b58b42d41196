#ifndef ADHINT_TRAINER_HPP_
#define ADHINT_TRAINER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adhint/adaptive_hint.hpp"
#include "adhint/advantage.hpp"
#include "adhint/errors.hpp"
#include "adhint/features.hpp"
#include "adhint/gradient_modulation.hpp"
#include "adhint/policy.hpp"
#include "adhint/rng.hpp"
#include "adhint/rollout.hpp"
#include "adhint/task_world.hpp"

namespace adhint {

enum class HintOnSolved { kRollout, kSkip };

struct TrainConfig {
  FeatureSpec features;
  int steps = 300;
  int batch_size = 16;
  int naive_rollouts = 8;
  int hint_rollouts = 8;
  double temperature = 1.0;
  int max_response_length = 40;
  int warmup_steps = 5;
  bool hints = true;  // false: GRPO on naive rollouts only
  ScheduleMode schedule = ScheduleMode::kAdaptive;
  HintSchedule hint;
  AdvantageMode advantage = AdvantageMode::kAeRdp;
  FactorMode factors = FactorMode::kFull;
  double alpha = 0.5;
  double learning_rate = 0.5;
  bool clip = false;
  double clip_epsilon = 0.2;
  double kl_beta = 0.0;
  HintOnSolved hint_on_solved = HintOnSolved::kRollout;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;
  int workers = 1;

  void validate() const {
    features.validate();
    hint.validate();
    if (steps < 0) throw ConfigError("steps must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    // warmup and skipped groups are naive-only, and a group needs 2 rollouts
    if (naive_rollouts < 2) throw ConfigError("naive_rollouts must be >= 2");
    if (hint_rollouts < 1) throw ConfigError("hint_rollouts must be >= 1");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (max_response_length < 2) throw ConfigError("max_response_length must be >= 2");
    if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("clip_epsilon must be in (0, 1)");
    if (!(kl_beta >= 0.0)) throw ConfigError("kl_beta must be >= 0");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

/// One query's rollouts (naive first, then hint) and everything derived
/// from them.
struct GroupResult {
  std::size_t task_index = 0;
  std::vector<Rollout> rollouts;
  std::size_t n_naive = 0;
  DifficultyPrior prior;
  bool hinted = false;
  double hint_ratio = 0.0;
  int hint_length = 0;
  AdvantageReport advantages;
  std::vector<TokenFactorPlan> factors;
};

inline bool hints_active(const TrainConfig& cfg, int step) { return cfg.hints && step > cfg.warmup_steps; }

inline double scheduled_ratio(const TrainConfig& cfg, const DifficultyPrior& prior, int step,
                              std::size_t task_index) {
  switch (cfg.schedule) {
    case ScheduleMode::kAdaptive: {
      Rng rng = stream_rng(cfg.seed, Stream::kHintNoise, static_cast<std::uint64_t>(step), task_index);
      return hint_ratio(prior, cfg.hint, rng);
    }
    case ScheduleMode::kAnnealing:
      return annealing_ratio(std::min(step, cfg.steps), cfg.steps, cfg.hint);
    case ScheduleMode::kFixed:
      return cfg.hint.w_max;
  }
  return 0.0;
}

/// Rollouts, difficulty prior, hint schedule, advantages and token factors
/// for one query at one step. `task_index` is the query's slot in the batch
/// and keys its RNG streams.
inline GroupResult process_group(const PolicyParams& params, const HintCorpusEntry& entry,
                                 const TrainConfig& cfg, int step, std::size_t task_index) {
  const Decoding decoding = Decoding::Sampled(cfg.temperature);
  const RolloutKey key{cfg.seed, static_cast<std::uint64_t>(step), task_index};
  GroupResult g;
  g.task_index = task_index;
  g.rollouts = roll_naive(params, entry.task, cfg.naive_rollouts, decoding, cfg.max_response_length, key);
  g.n_naive = g.rollouts.size();

  std::vector<double> rewards;
  for (const auto& r : g.rollouts) rewards.push_back(r.reward.total);
  g.prior = difficulty_prior(rewards);

  g.hinted = hints_active(cfg, step) &&
             !(cfg.hint_on_solved == HintOnSolved::kSkip && g.prior.diff_n == 0.0);
  if (g.hinted) {
    g.hint_ratio = scheduled_ratio(cfg, g.prior, step, task_index);
    g.hint_length = hint_length(g.hint_ratio, entry.teacher_len, cfg.max_response_length);
    auto hint = roll_hint(params, entry, cfg.hint_rollouts, g.hint_length, decoding, cfg.max_response_length, key);
    for (auto& r : hint) {
      rewards.push_back(r.reward.total);
      g.rollouts.push_back(std::move(r));
    }
  }

  g.advantages = estimate_advantages(rewards, g.n_naive, g.hinted ? cfg.advantage : AdvantageMode::kPooled);
  const FactorMode mode = g.hinted ? cfg.factors : FactorMode::kNone;
  g.factors.reserve(g.rollouts.size());
  for (std::size_t i = 0; i < g.rollouts.size(); ++i)
    g.factors.push_back(token_factors(g.rollouts[i], g.advantages.a_hat[i], cfg.alpha, mode));
  return g;
}

/// Per-token coefficient of grad log pi in the objective's gradient:
/// k * ratio * A / (G * |o|). With clipping, tokens whose ratio sits on the
/// flat side of the clipped surrogate contribute nothing.
inline double token_coefficient(double k, double ratio, double advantage, std::size_t group_size,
                                std::size_t rollout_len, const TrainConfig& cfg) {
  if (k == 0.0 || advantage == 0.0) return 0.0;
  if (cfg.clip) {
    if (advantage > 0.0 && ratio > 1.0 + cfg.clip_epsilon) return 0.0;
    if (advantage < 0.0 && ratio < 1.0 - cfg.clip_epsilon) return 0.0;
  }
  return k * ratio * advantage / (static_cast<double>(group_size) * static_cast<double>(rollout_len));
}

/// Accumulates the batch gradient in (task, rollout, token) order under the
/// current parameters. `reference` is the KL anchor (only read if beta > 0).
inline GradBuffer assemble_gradient(const PolicyParams& params, std::span<const GroupResult> groups,
                                    const TrainConfig& cfg, const PolicyParams* reference = nullptr) {
  GradBuffer grad(params.spec());
  std::vector<double> residual(static_cast<std::size_t>(params.vocab_size()));
  for (const auto& g : groups) {
    const std::size_t group_size = g.rollouts.size();
    for (std::size_t i = 0; i < group_size; ++i) {
      const Rollout& r = g.rollouts[i];
      const double advantage = g.advantages.a_tilde[i];
      const auto& k = g.factors[i].k;
      if (advantage == 0.0 && cfg.kl_beta == 0.0) continue;
      for (std::size_t t = 0; t < r.size(); ++t) {
        if (k[t] == 0.0 && cfg.kl_beta == 0.0) continue;
        const StepDistribution d = next_distribution(params, r.contexts[t]);
        const auto y = static_cast<std::size_t>(r.tokens[t]);
        const double ratio = std::exp(d.logprobs[y] - r.logprob_old[t]);
        const double coef = token_coefficient(k[t], ratio, advantage, group_size, r.size(), cfg);
        if (coef != 0.0) {
          for (std::size_t v = 0; v < residual.size(); ++v) residual[v] = -d.probs[v];
          residual[y] += 1.0;
          grad.add_outer(r.contexts[t], residual, coef);
        }
        if (cfg.kl_beta > 0.0) {
          // -beta * grad KL(pi || ref) at this context; dKL/dz_j = p_j (log p_j - log r_j - KL).
          require(reference != nullptr, "kl_beta > 0 needs a reference policy");
          const StepDistribution ref = next_distribution(*reference, r.contexts[t]);
          double kl = 0.0;
          for (std::size_t v = 0; v < residual.size(); ++v) kl += d.probs[v] * (d.logprobs[v] - ref.logprobs[v]);
          for (std::size_t v = 0; v < residual.size(); ++v)
            residual[v] = d.probs[v] * (d.logprobs[v] - ref.logprobs[v] - kl);
          grad.add_outer(r.contexts[t], residual,
                         -cfg.kl_beta / (static_cast<double>(group_size) * static_cast<double>(r.size())));
        }
      }
    }
  }
  return grad;
}

struct StepMetrics {
  int step = 0;
  int hinted_groups = 0;
  double reward_mean = 0.0;
  double reward_naive = 0.0;
  std::optional<double> reward_hint;
  double accuracy_naive = 0.0;
  std::optional<double> accuracy_hint;
  double entropy_mean = 0.0;
  double entropy_naive = 0.0;
  std::optional<double> entropy_hint;
  double length_mean = 0.0;
  double length_naive = 0.0;
  std::optional<double> length_hint;
  double grad_norm = 0.0;
  double hint_ratio_mean = 0.0;
  double hint_length_mean = 0.0;
  double clipped_fraction = 0.0;
  double format_reward = 0.0;
  int degenerate_groups = 0;
  bool all_degenerate = false;
  int empty_continuations = 0;
  double wall_time_s = 0.0;  // not part of the deterministic log
};

namespace detail {

struct Tally {
  double reward = 0, correct = 0, format = 0, entropy = 0, length = 0;
  std::size_t rollouts = 0, tokens = 0, truncated = 0;

  void add(const Rollout& r) {
    reward += r.reward.total;
    correct += r.reward.answer_correct;
    format += r.reward.format_ok;
    for (double e : r.entropy) entropy += e;
    length += static_cast<double>(r.size());
    tokens += r.size();
    truncated += r.truncated ? 1 : 0;
    ++rollouts;
  }
  double per_rollout(double x) const { return rollouts ? x / static_cast<double>(rollouts) : 0.0; }
  double per_token(double x) const { return tokens ? x / static_cast<double>(tokens) : 0.0; }
};

}  // namespace detail

inline StepMetrics summarize(int step, std::span<const GroupResult> groups, const GradBuffer& grad) {
  StepMetrics m;
  m.step = step;
  detail::Tally all, naive, hint;
  double ratio_sum = 0.0, length_sum = 0.0;
  for (const auto& g : groups) {
    for (const auto& r : g.rollouts) {
      all.add(r);
      (r.kind == RolloutKind::kNaive ? naive : hint).add(r);
    }
    for (const auto& f : g.factors) m.empty_continuations += f.empty_continuation ? 1 : 0;
    m.degenerate_groups += g.advantages.degenerate ? 1 : 0;
    m.hinted_groups += g.hinted ? 1 : 0;
    ratio_sum += g.hint_ratio;
    length_sum += g.hint_length;
  }
  m.reward_mean = all.per_rollout(all.reward);
  m.reward_naive = naive.per_rollout(naive.reward);
  m.accuracy_naive = naive.per_rollout(naive.correct);
  m.entropy_mean = all.per_token(all.entropy);
  m.entropy_naive = naive.per_token(naive.entropy);
  m.length_mean = all.per_rollout(all.length);
  m.length_naive = naive.per_rollout(naive.length);
  if (hint.rollouts > 0) {
    m.reward_hint = hint.per_rollout(hint.reward);
    m.accuracy_hint = hint.per_rollout(hint.correct);
    m.entropy_hint = hint.per_token(hint.entropy);
    m.length_hint = hint.per_rollout(hint.length);
  }
  m.grad_norm = grad.norm();
  const auto n_groups = static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  m.hint_ratio_mean = ratio_sum / n_groups;
  m.hint_length_mean = length_sum / n_groups;
  m.clipped_fraction = all.per_rollout(static_cast<double>(all.truncated));
  m.format_reward = all.per_rollout(all.format);
  m.all_degenerate = !groups.empty() && m.degenerate_groups == static_cast<int>(groups.size());
  return m;
}

/// Rollout phase for a batch; groups come back in batch order regardless of
/// how many workers generated them.
inline std::vector<GroupResult> rollout_batch(const PolicyParams& params, std::span<const HintCorpusEntry> batch,
                                              const TrainConfig& cfg, int step) {
  std::vector<GroupResult> groups(batch.size());
  const auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < batch.size(); i += stride) groups[i] = process_group(params, batch[i], cfg, step, i);
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), batch.size());
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, work, w, workers));
    for (auto& j : jobs) j.get();
  }
  return groups;
}

struct StepResult {
  StepMetrics metrics;
  std::vector<GroupResult> groups;
};

/// One iteration: rollouts, advantage estimation, token factors, gradient
/// assembly and a single ascent step on `params`.
inline StepResult train_step(PolicyParams& params, std::span<const HintCorpusEntry> batch, const TrainConfig& cfg,
                             int step, const PolicyParams* reference = nullptr) {
  require(!batch.empty(), "train_step: empty batch");
  require(step >= 1, "train_step: step must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  StepResult out;
  out.groups = rollout_batch(params, batch, cfg, step);
  const GradBuffer grad = assemble_gradient(params, out.groups, cfg, reference);
  out.metrics = summarize(step, out.groups, grad);
  apply_ascent(params, grad, cfg.learning_rate);
  out.metrics.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Epoch-shuffled batch indices keyed by absolute step, so a resumed run
/// draws the same batches as an uninterrupted one.
class EpochSampler {
 public:
  EpochSampler(std::size_t corpus_size, std::uint64_t seed) : n_(corpus_size), seed_(seed) {
    require(n_ > 0, "EpochSampler: empty corpus");
  }

  std::vector<std::size_t> batch(int step, int batch_size) {
    std::vector<std::size_t> out;
    const auto first = static_cast<std::uint64_t>(step - 1) * static_cast<std::uint64_t>(batch_size);
    for (std::uint64_t p = first; p < first + static_cast<std::uint64_t>(batch_size); ++p) {
      const std::uint64_t epoch = p / n_;
      if (epoch != epoch_ || perm_.empty()) shuffle(epoch);
      out.push_back(perm_[p % n_]);
    }
    return out;
  }

 private:
  void shuffle(std::uint64_t epoch) {
    epoch_ = epoch;
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    Rng rng = stream_rng(seed_, Stream::kShuffle, epoch);
    for (std::size_t i = n_; i > 1; --i) std::swap(perm_[i - 1], perm_[rng.below(i)]);
  }

  std::size_t n_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> perm_;
};

// ---------------------------------------------------------------------------
// Evaluation

enum class EvalMetric { kPass1, kAvgK };

/// Produces a response for a task; the policy-backed responder decodes
/// without hints.
using Responder = std::function<TokenSeq(const TaskInstance&, Decoding, Rng&)>;

inline Responder policy_responder(const PolicyParams& params, int max_len) {
  return [&params, max_len](const TaskInstance& task, Decoding decoding, Rng& rng) {
    return detail::generate(params, task, {}, decoding, max_len, rng).tokens;
  };
}

/// pass1: fraction of tasks answered correctly by greedy decoding.
/// avg_k: mean over tasks of the correct fraction among k samples at T = 1.
inline double evaluate_with(const Responder& respond, std::span<const TaskInstance> tasks, EvalMetric metric,
                            int k, std::uint64_t seed) {
  require(!tasks.empty(), "evaluate: no tasks");
  require(metric == EvalMetric::kPass1 || k >= 1, "evaluate: k must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (metric == EvalMetric::kPass1) {
      Rng rng = stream_rng(seed, Stream::kEval, i);
      total += verify(tasks[i], respond(tasks[i], Decoding::Greedy(), rng)).answer_correct;
    } else {
      int correct = 0;
      for (int s = 0; s < k; ++s) {
        Rng rng = stream_rng(seed, Stream::kEval, i, static_cast<std::uint64_t>(s));
        correct += verify(tasks[i], respond(tasks[i], Decoding::Sampled(1.0), rng)).answer_correct;
      }
      total += static_cast<double>(correct) / k;
    }
  }
  return total / static_cast<double>(tasks.size());
}

inline double evaluate(const PolicyParams& params, std::span<const TaskInstance> tasks, EvalMetric metric, int k,
                       int max_len, std::uint64_t seed) {
  return evaluate_with(policy_responder(params, max_len), tasks, metric, k, seed);
}

}  // namespace adhint

#endif  // ADHINT_TRAINER_HPP_
