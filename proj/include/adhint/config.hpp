#ifndef ADHINT_CONFIG_HPP_
#define ADHINT_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adhint/errors.hpp"
#include "adhint/task_world.hpp"
#include "adhint/trainer.hpp"

namespace adhint {

struct TaskConfig {
  std::vector<Family> families = {Family::kReverse, Family::kCyclicShift, Family::kModSum};
  LengthRange lengths{2, 8};
  int train_count = 2000;
  int heldout_count = 500;
  std::uint64_t seed = 0;
};

struct EvalConfig {
  EvalMetric metric = EvalMetric::kPass1;
  int k = 8;
  std::uint64_t seed = 0;
};

/// Everything a config file can set. Keys are "section.name".
struct LabConfig {
  TaskConfig task;
  TrainConfig train;
  EvalConfig eval;

  void validate() const {
    train.validate();
    if (task.families.empty()) throw ConfigError("task.families must not be empty");
    validate_length_range(task.lengths, train.features.max_length);
    if (task.train_count < 0 || task.heldout_count < 0) throw ConfigError("task counts must be >= 0");
    if (eval.k < 1) throw ConfigError("eval.k must be >= 1");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

struct KeySpec {
  const char* key;
  const char* help;
  std::function<void(LabConfig&, const std::string&)> set;
  std::function<std::string(const LabConfig&)> get;
};

/// Shortest text that parses back to the same value.
template <typename T>
std::string show(T v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// clang-format off
inline const std::vector<KeySpec>& key_table() {
  using L = LabConfig;
  using S = const std::string&;
  static const std::vector<KeySpec> table = {
    {"task.vocab_size", "vocabulary size V (6 reserved ids + alphabet + noise ids)",
      [](L& c, S v) { c.train.features.vocab.size = parse_number<int>("task.vocab_size", v); },
      [](const L& c) { return show(c.train.features.vocab.size); }},
    {"task.alphabet", "payload alphabet size",
      [](L& c, S v) { c.train.features.vocab.alphabet = parse_number<int>("task.alphabet", v); },
      [](const L& c) { return show(c.train.features.vocab.alphabet); }},
    {"task.families", "comma-separated subset of reverse,cyclic_shift,mod_sum",
      [](L& c, S v) {
        c.task.families.clear();
        std::stringstream ss(v);
        for (std::string f; std::getline(ss, f, ',');) c.task.families.push_back(parse_family(trim(f)));
      },
      [](const L& c) {
        std::string out;
        for (Family f : c.task.families) out += (out.empty() ? "" : ",") + std::string(to_string(f));
        return out;
      }},
    {"task.min_length", "shortest payload",
      [](L& c, S v) { c.task.lengths.lo = parse_number<int>("task.min_length", v); },
      [](const L& c) { return show(c.task.lengths.lo); }},
    {"task.max_length", "longest payload (also the policy's length-bucket range)",
      [](L& c, S v) { c.task.lengths.hi = c.train.features.max_length = parse_number<int>("task.max_length", v); },
      [](const L& c) { return show(c.task.lengths.hi); }},
    {"task.train_count", "train entries written by gen-data",
      [](L& c, S v) { c.task.train_count = parse_number<int>("task.train_count", v); },
      [](const L& c) { return show(c.task.train_count); }},
    {"task.heldout_count", "heldout entries written by gen-data",
      [](L& c, S v) { c.task.heldout_count = parse_number<int>("task.heldout_count", v); },
      [](const L& c) { return show(c.task.heldout_count); }},
    {"task.seed", "task generation seed",
      [](L& c, S v) { c.task.seed = parse_number<std::uint64_t>("task.seed", v); },
      [](const L& c) { return show(c.task.seed); }},
    {"policy.context_order", "K, number of trailing tokens in the feature window",
      [](L& c, S v) { c.train.features.context_order = parse_number<int>("policy.context_order", v); },
      [](const L& c) { return show(c.train.features.context_order); }},
    {"policy.length_buckets", "coarse length buckets per family in the query bucket",
      [](L& c, S v) { c.train.features.length_buckets = parse_number<int>("policy.length_buckets", v); },
      [](const L& c) { return show(c.train.features.length_buckets); }},
    {"trainer.steps", "optimizer steps",
      [](L& c, S v) { c.train.steps = parse_number<int>("trainer.steps", v); },
      [](const L& c) { return show(c.train.steps); }},
    {"trainer.batch_size", "queries per step",
      [](L& c, S v) { c.train.batch_size = parse_number<int>("trainer.batch_size", v); },
      [](const L& c) { return show(c.train.batch_size); }},
    {"trainer.naive_rollouts", "n, naive rollouts per query",
      [](L& c, S v) { c.train.naive_rollouts = parse_number<int>("trainer.naive_rollouts", v); },
      [](const L& c) { return show(c.train.naive_rollouts); }},
    {"trainer.hint_rollouts", "m, hint rollouts per query",
      [](L& c, S v) { c.train.hint_rollouts = parse_number<int>("trainer.hint_rollouts", v); },
      [](const L& c) { return show(c.train.hint_rollouts); }},
    {"trainer.temperature", "rollout sampling temperature",
      [](L& c, S v) { c.train.temperature = parse_number<double>("trainer.temperature", v); },
      [](const L& c) { return show(c.train.temperature); }},
    {"trainer.max_response_length", "token cap per rollout",
      [](L& c, S v) { c.train.max_response_length = parse_number<int>("trainer.max_response_length", v); },
      [](const L& c) { return show(c.train.max_response_length); }},
    {"trainer.warmup_steps", "leading steps trained as plain GRPO without hints",
      [](L& c, S v) { c.train.warmup_steps = parse_number<int>("trainer.warmup_steps", v); },
      [](const L& c) { return show(c.train.warmup_steps); }},
    {"trainer.hints", "on: hint-guided training; off: GRPO on naive rollouts only",
      [](L& c, S v) { c.train.hints = parse_bool("trainer.hints", v); },
      [](const L& c) { return std::string(c.train.hints ? "on" : "off"); }},
    {"trainer.hint_on_solved", "rollout: issue h=0 hint rollouts when Diff_N = 0; skip: omit them",
      [](L& c, S v) {
        if (v == "rollout") c.train.hint_on_solved = HintOnSolved::kRollout;
        else if (v == "skip") c.train.hint_on_solved = HintOnSolved::kSkip;
        else throw ConfigError("bad value for trainer.hint_on_solved: '" + v + "'");
      },
      [](const L& c) { return std::string(c.train.hint_on_solved == HintOnSolved::kRollout ? "rollout" : "skip"); }},
    {"trainer.learning_rate", "gradient-ascent step size",
      [](L& c, S v) { c.train.learning_rate = parse_number<double>("trainer.learning_rate", v); },
      [](const L& c) { return show(c.train.learning_rate); }},
    {"trainer.clip", "apply the clipped surrogate to importance ratios",
      [](L& c, S v) { c.train.clip = parse_bool("trainer.clip", v); },
      [](const L& c) { return std::string(c.train.clip ? "true" : "false"); }},
    {"trainer.clip_epsilon", "clip range epsilon",
      [](L& c, S v) { c.train.clip_epsilon = parse_number<double>("trainer.clip_epsilon", v); },
      [](const L& c) { return show(c.train.clip_epsilon); }},
    {"trainer.kl_beta", "KL(pi || pi_ref) coefficient; pi_ref is the zero-weight policy",
      [](L& c, S v) { c.train.kl_beta = parse_number<double>("trainer.kl_beta", v); },
      [](const L& c) { return show(c.train.kl_beta); }},
    {"trainer.seed", "rollout / shuffle / noise seed",
      [](L& c, S v) { c.train.seed = parse_number<std::uint64_t>("trainer.seed", v); },
      [](const L& c) { return show(c.train.seed); }},
    {"trainer.checkpoint_every", "write ckpt_step_N.bin every N steps (0 = final only)",
      [](L& c, S v) { c.train.checkpoint_every = parse_number<int>("trainer.checkpoint_every", v); },
      [](const L& c) { return show(c.train.checkpoint_every); }},
    {"trainer.workers", "rollout worker threads (results are order-independent)",
      [](L& c, S v) { c.train.workers = parse_number<int>("trainer.workers", v); },
      [](const L& c) { return show(c.train.workers); }},
    {"hint.schedule", "adaptive | annealing | fixed",
      [](L& c, S v) { c.train.schedule = parse_schedule_mode(v); },
      [](const L& c) { return std::string(to_string(c.train.schedule)); }},
    {"hint.w_max", "largest hint ratio",
      [](L& c, S v) { c.train.hint.w_max = parse_number<double>("hint.w_max", v); },
      [](const L& c) { return show(c.train.hint.w_max); }},
    {"hint.w_min", "smallest hint ratio",
      [](L& c, S v) { c.train.hint.w_min = parse_number<double>("hint.w_min", v); },
      [](const L& c) { return show(c.train.hint.w_min); }},
    {"hint.noise_radius", "R, half-width of the uniform noise added to the ratio",
      [](L& c, S v) { c.train.hint.noise_radius = parse_number<double>("hint.noise_radius", v); },
      [](const L& c) { return show(c.train.hint.noise_radius); }},
    {"advantage.mode", "ae_rdp | pooled",
      [](L& c, S v) { c.train.advantage = parse_advantage_mode(v); },
      [](const L& c) { return std::string(to_string(c.train.advantage)); }},
    {"modulation.mode", "full | no_cgm | no_masking | none",
      [](L& c, S v) { c.train.factors = parse_factor_mode(v); },
      [](const L& c) { return std::string(to_string(c.train.factors)); }},
    {"modulation.alpha", "CGM support threshold alpha in (0, 1]",
      [](L& c, S v) { c.train.alpha = parse_number<double>("modulation.alpha", v); },
      [](const L& c) { return show(c.train.alpha); }},
    {"eval.metric", "pass1 | avg@k",
      [](L& c, S v) {
        if (v == "pass1") { c.eval.metric = EvalMetric::kPass1; return; }
        if (v.rfind("avg@", 0) == 0) {
          c.eval.metric = EvalMetric::kAvgK;
          c.eval.k = parse_number<int>("eval.metric", v.substr(4));
          return;
        }
        throw ConfigError("bad value for eval.metric: '" + v + "'");
      },
      [](const L& c) { return c.eval.metric == EvalMetric::kPass1 ? std::string("pass1") : "avg@" + show(c.eval.k); }},
    {"eval.seed", "sampling seed for avg@k",
      [](L& c, S v) { c.eval.seed = parse_number<std::uint64_t>("eval.seed", v); },
      [](const L& c) { return show(c.eval.seed); }},
  };
  return table;
}
// clang-format on

}  // namespace detail

inline void set_key(LabConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : detail::key_table()) {
    if (key == k.key) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

/// Applies "section.key=value".
inline void apply_override(LabConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value: '" + assignment + "'");
  set_key(cfg, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

/// INI-style text: [section] headers, key = value lines, '#' or ';' comments.
inline void apply_config_text(LabConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    try {
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated section header");
        section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value");
      if (section.empty()) throw ConfigError("key outside of a section");
      set_key(cfg, section + "." + detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  LabConfig cfg;
  apply_config_text(cfg, buf.str());
  return cfg;
}

/// Full config as INI text with one comment line per key.
inline std::string render_config(const LabConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : detail::key_table()) {
    const std::string_view key = k.key;
    const auto dot = key.find('.');
    const std::string sec(key.substr(0, dot));
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << "# " << k.help << '\n' << key.substr(dot + 1) << " = " << k.get(cfg) << '\n';
  }
  return out.str();
}

/// The train or heldout corpus described by `cfg.task`: the count is split
/// evenly across families (remainder to the first ones), grouped by family.
inline std::vector<HintCorpusEntry> build_corpus(const LabConfig& cfg, Split split) {
  const int count = split == Split::kTrain ? cfg.task.train_count : cfg.task.heldout_count;
  const int nf = static_cast<int>(cfg.task.families.size());
  std::vector<HintCorpusEntry> entries;
  for (int i = 0; i < nf; ++i) {
    const int share = count / nf + (i < count % nf ? 1 : 0);
    for (const auto& t : generate_tasks(cfg.task.families[static_cast<std::size_t>(i)], share, cfg.task.lengths,
                                        cfg.task.seed, split, cfg.train.features.vocab,
                                        cfg.train.features.max_length))
      entries.push_back(teacher_trajectory(t));
  }
  return entries;
}

}  // namespace adhint

#endif  // ADHINT_CONFIG_HPP_
