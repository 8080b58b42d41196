#ifndef ADHINT_FEATURES_HPP_
#define ADHINT_FEATURES_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "adhint/errors.hpp"
#include "adhint/task_world.hpp"

namespace adhint {

/// Shape of the binary feature map phi(query, prefix).
///
/// Layout of the F = K*V + B + R columns:
///   [0, K*V)        one-hot of each of the last K tokens (slot 0 = most recent),
///                   left-padded with PAD and seeded with BOS
///   [K*V, K*V+B)    one-hot query bucket = family x coarse length bucket
///   [K*V+B, F)      query read-out: phase {work, answer, closed}, cue symbol
///                   one-hot over the payload alphabet, cue-exhausted flag
///
/// The cue is the symbol a correct response writes at the current slot:
/// before ANS_OPEN it is the answer symbol for the next work slot; after
/// ANS_OPEN it is the symbol the response itself wrote at the same slot of
/// its work section. An answer can therefore only be read back from work the
/// response has already written.
struct FeatureSpec {
  Vocab vocab;
  int context_order = 3;
  int length_buckets = 4;
  int max_length = 8;

  int window_dim() const { return context_order * vocab.size; }
  int buckets() const { return kNumFamilies * length_buckets; }
  int readout_dim() const { return 3 + vocab.alphabet + 1; }
  int dim() const { return window_dim() + buckets() + readout_dim(); }

  int window_feature(int slot, Token t) const { return slot * vocab.size + t; }
  int bucket_feature(int bucket) const { return window_dim() + bucket; }
  int readout_base() const { return window_dim() + buckets(); }
  int phase_feature(int phase) const { return readout_base() + phase; }
  int cue_feature(int symbol_index) const { return readout_base() + 3 + symbol_index; }
  int cue_exhausted_feature() const { return readout_base() + 3 + vocab.alphabet; }

  int bucket_of(const TaskInstance& task) const {
    const int span = std::max(1, max_length - 1);
    const int lb = std::clamp((task.length - 2) * length_buckets / span, 0, length_buckets - 1);
    return static_cast<int>(task.family) * length_buckets + lb;
  }

  void validate() const {
    vocab.validate();
    if (context_order < 1 || context_order > kMaxOrder)
      throw ConfigError("context_order must be in [1, " + std::to_string(kMaxOrder) + "]");
    if (length_buckets < 1) throw ConfigError("length_buckets must be >= 1");
    if (max_length < 2) throw ConfigError("max_length must be >= 2");
  }

  static constexpr int kMaxOrder = 8;

  bool operator==(const FeatureSpec&) const = default;
};

enum class Phase : int { kWork = 0, kAnswer = 1, kClosed = 2 };

/// Active feature indices of one decoding step (all values are 1).
struct StepContext {
  static constexpr std::size_t kCapacity = FeatureSpec::kMaxOrder + 3;
  std::array<int, kCapacity> active{};
  std::size_t count = 0;

  void add(int feature) {
    require(count < kCapacity, "StepContext overflow");
    active[count++] = feature;
  }
  std::span<const int> features() const { return {active.data(), count}; }

  bool operator==(const StepContext& o) const {
    return std::equal(features().begin(), features().end(), o.features().begin(), o.features().end());
  }
};

/// Tracks the decoding state for one response and emits the StepContext for
/// the next token.
class ContextBuilder {
 public:
  ContextBuilder(const FeatureSpec& spec, const TaskInstance& task)
      : spec_(&spec), task_(&task), bucket_(spec.bucket_of(task)) {
    require(bucket_ >= 0 && bucket_ < spec.buckets(), "query bucket out of range");
    window_.fill(Vocab::kPad);
    window_[0] = Vocab::kBos;
  }

  StepContext current() const {
    StepContext ctx;
    for (int k = 0; k < spec_->context_order; ++k) ctx.add(spec_->window_feature(k, window_[k]));
    ctx.add(spec_->bucket_feature(bucket_));
    ctx.add(spec_->phase_feature(static_cast<int>(phase_)));
    if (phase_ == Phase::kWork) {
      const auto j = scratch_.size();
      if (j < task_->answer.size())
        ctx.add(spec_->cue_feature(spec_->vocab.symbol_index(task_->answer[j])));
      else
        ctx.add(spec_->cue_exhausted_feature());
    } else if (phase_ == Phase::kAnswer) {
      if (answer_slot_ < scratch_.size())
        ctx.add(spec_->cue_feature(spec_->vocab.symbol_index(scratch_[answer_slot_])));
      else
        ctx.add(spec_->cue_exhausted_feature());
    }
    return ctx;
  }

  void push(Token t) {
    require(spec_->vocab.contains(t), "token id " + std::to_string(t) + " out of range");
    for (int k = spec_->context_order - 1; k > 0; --k) window_[k] = window_[k - 1];
    window_[0] = t;
    const bool sym = spec_->vocab.is_symbol(t);
    switch (phase_) {
      case Phase::kWork:
        if (sym) scratch_.push_back(t);
        if (t == Vocab::kAnsOpen) {
          phase_ = Phase::kAnswer;
          answer_slot_ = 0;
        }
        break;
      case Phase::kAnswer:
        if (sym) ++answer_slot_;
        if (t == Vocab::kAnsOpen) answer_slot_ = 0;
        if (t == Vocab::kAnsClose) phase_ = Phase::kClosed;
        break;
      case Phase::kClosed:
        break;
    }
  }

  int bucket() const { return bucket_; }
  Phase phase() const { return phase_; }

 private:
  const FeatureSpec* spec_;
  const TaskInstance* task_;
  int bucket_;
  std::array<Token, FeatureSpec::kMaxOrder> window_{};
  TokenSeq scratch_;
  std::size_t answer_slot_ = 0;
  Phase phase_ = Phase::kWork;
};

/// Contexts seen while emitting `tokens` (one per token).
inline std::vector<StepContext> replay_contexts(const FeatureSpec& spec, const TaskInstance& task,
                                                std::span<const Token> tokens) {
  ContextBuilder builder(spec, task);
  std::vector<StepContext> out;
  out.reserve(tokens.size());
  for (Token t : tokens) {
    out.push_back(builder.current());
    builder.push(t);
  }
  return out;
}

}  // namespace adhint

#endif  // ADHINT_FEATURES_HPP_
