#ifndef ADHINT_TASK_WORLD_HPP_
#define ADHINT_TASK_WORLD_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adhint/errors.hpp"
#include "adhint/rng.hpp"

namespace adhint {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;

/// Token layout: six reserved ids, then the payload alphabet, then noise ids
/// that no task uses (they only make an untrained policy bad at formatting).
struct Vocab {
  static constexpr Token kPad = 0;
  static constexpr Token kBos = 1;
  static constexpr Token kEos = 2;
  static constexpr Token kAnsOpen = 3;
  static constexpr Token kAnsClose = 4;
  static constexpr Token kFiller = 5;
  static constexpr Token kFirstSymbol = 6;

  int size = 32;
  int alphabet = 8;

  Token symbol(int index) const { return kFirstSymbol + index; }
  bool is_symbol(Token t) const { return t >= kFirstSymbol && t < kFirstSymbol + alphabet; }
  int symbol_index(Token t) const { return t - kFirstSymbol; }
  bool contains(Token t) const { return t >= 0 && t < size; }

  void validate() const {
    if (alphabet < 2) throw ConfigError("vocab: alphabet must be >= 2");
    if (size < kFirstSymbol + alphabet)
      throw ConfigError("vocab: size " + std::to_string(size) + " too small for alphabet " +
                        std::to_string(alphabet));
  }

  bool operator==(const Vocab&) const = default;
};

enum class Family { kReverse, kCyclicShift, kModSum };
enum class Split { kTrain, kHeldout };

inline constexpr int kNumFamilies = 3;

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::kReverse: return "reverse";
    case Family::kCyclicShift: return "cyclic_shift";
    case Family::kModSum: return "mod_sum";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "reverse") return Family::kReverse;
  if (s == "cyclic_shift") return Family::kCyclicShift;
  if (s == "mod_sum") return Family::kModSum;
  throw ConfigError("unknown task family '" + std::string(s) + "'");
}

inline std::string_view to_string(Split s) { return s == Split::kTrain ? "train" : "heldout"; }

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "heldout") return Split::kHeldout;
  throw ConfigError("unknown split '" + std::string(s) + "'");
}

struct TaskInstance {
  Family family = Family::kReverse;
  TokenSeq query;   // payload symbols
  TokenSeq answer;
  int length = 0;   // payload symbol count
  Split split = Split::kTrain;

  bool operator==(const TaskInstance&) const = default;
};

struct HintCorpusEntry {
  TaskInstance task;
  TokenSeq teacher_trajectory;
  int teacher_len = 0;

  bool operator==(const HintCorpusEntry&) const = default;
};

struct RewardBreakdown {
  int answer_correct = 0;
  int format_ok = 0;
  double total = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

inline constexpr double kAnswerWeight = 0.9;
inline constexpr double kFormatWeight = 0.1;

struct LengthRange {
  int lo = 2;
  int hi = 8;
};

/// Answer for a payload. MOD_SUM emits running sums of symbol indices
/// modulo the alphabet size.
inline TokenSeq derive_answer(Family family, std::span<const Token> query, const Vocab& vocab) {
  TokenSeq answer(query.begin(), query.end());
  switch (family) {
    case Family::kReverse:
      std::reverse(answer.begin(), answer.end());
      break;
    case Family::kCyclicShift:
      if (!answer.empty()) std::rotate(answer.begin(), answer.begin() + 1, answer.end());
      break;
    case Family::kModSum: {
      int sum = 0;
      for (std::size_t i = 0; i < query.size(); ++i) {
        sum = (sum + vocab.symbol_index(query[i])) % vocab.alphabet;
        answer[i] = vocab.symbol(sum);
      }
      break;
    }
  }
  return answer;
}

/// Queries are assigned to a split by a fixed hash of (family, payload), so
/// train and heldout never share a query no matter which seeds generate them.
inline Split split_of(Family family, std::span<const Token> query) {
  std::uint64_t state = 0x5EEDULL + static_cast<std::uint64_t>(family);
  std::uint64_t h = splitmix64(state);
  for (Token t : query) {
    state = h ^ static_cast<std::uint64_t>(t);
    h = splitmix64(state);
  }
  return (h % 5 == 0) ? Split::kHeldout : Split::kTrain;
}

inline void validate_length_range(LengthRange range, int max_length) {
  if (range.lo < 2 || range.hi < range.lo || range.hi > max_length)
    throw ConfigError("invalid length_range [" + std::to_string(range.lo) + ", " +
                      std::to_string(range.hi) + "] (allowed within [2, " +
                      std::to_string(max_length) + "])");
}

inline std::vector<TaskInstance> generate_tasks(Family family, int count, LengthRange range,
                                                std::uint64_t seed, Split split,
                                                const Vocab& vocab, int max_length) {
  vocab.validate();
  validate_length_range(range, max_length);
  if (count < 0) throw ConfigError("task count must be >= 0");
  Rng rng = stream_rng(seed, Stream::kTasks, static_cast<std::uint64_t>(family),
                       static_cast<std::uint64_t>(split));
  std::vector<TaskInstance> tasks;
  tasks.reserve(static_cast<std::size_t>(count));
  const auto span = static_cast<std::uint64_t>(range.hi - range.lo + 1);
  // Each split owns a share of every length's query space (4/5 vs 1/5), so
  // rejection terminates; the cap only guards degenerate configurations.
  std::uint64_t attempts = 0;
  const std::uint64_t max_attempts = 1000ULL * static_cast<std::uint64_t>(count) + 1000;
  while (static_cast<int>(tasks.size()) < count) {
    if (++attempts > max_attempts)
      throw ConfigError("could not draw enough tasks for split " + std::string(to_string(split)));
    const int length = range.lo + static_cast<int>(rng.below(span));
    TokenSeq query(static_cast<std::size_t>(length));
    for (auto& t : query) t = vocab.symbol(static_cast<int>(rng.below(vocab.alphabet)));
    if (split_of(family, query) != split) continue;
    TaskInstance task;
    task.family = family;
    task.answer = derive_answer(family, query, vocab);
    task.query = std::move(query);
    task.length = length;
    task.split = split;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

/// Scores a response up to (not including) its first EOS. Malformed input
/// earns zeros, never an error.
inline RewardBreakdown verify(const TaskInstance& task, std::span<const Token> response) {
  const auto end = std::find(response.begin(), response.end(), Vocab::kEos);
  const auto body = std::span<const Token>(response.begin(), end);
  const auto opens = std::count(body.begin(), body.end(), Vocab::kAnsOpen);
  const auto closes = std::count(body.begin(), body.end(), Vocab::kAnsClose);
  RewardBreakdown r;
  if (opens == 1 && closes == 1) {
    const auto open = std::find(body.begin(), body.end(), Vocab::kAnsOpen);
    const auto close = std::find(body.begin(), body.end(), Vocab::kAnsClose);
    if (open < close) {
      r.format_ok = 1;
      r.answer_correct = std::equal(open + 1, close, task.answer.begin(), task.answer.end()) ? 1 : 0;
    }
  }
  r.total = kAnswerWeight * r.answer_correct + kFormatWeight * r.format_ok;
  return r;
}

/// Teacher style: FILLER + answer symbol per payload position (verbose work),
/// then the bracketed answer and EOS. Length is 3*length + 3.
inline HintCorpusEntry teacher_trajectory(const TaskInstance& task) {
  HintCorpusEntry entry;
  entry.task = task;
  auto& traj = entry.teacher_trajectory;
  traj.reserve(3 * task.answer.size() + 3);
  for (Token s : task.answer) {
    traj.push_back(Vocab::kFiller);
    traj.push_back(s);
  }
  traj.push_back(Vocab::kAnsOpen);
  traj.insert(traj.end(), task.answer.begin(), task.answer.end());
  traj.push_back(Vocab::kAnsClose);
  traj.push_back(Vocab::kEos);
  entry.teacher_len = static_cast<int>(traj.size());
  return entry;
}

}  // namespace adhint

#endif  // ADHINT_TASK_WORLD_HPP_
