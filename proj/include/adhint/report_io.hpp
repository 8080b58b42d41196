#ifndef ADHINT_REPORT_IO_HPP_
#define ADHINT_REPORT_IO_HPP_

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adhint/errors.hpp"
#include "adhint/trainer.hpp"

namespace adhint {

inline constexpr const char* kMetricsSchema = "metrics_v1";

namespace detail {

inline nlohmann::ordered_json opt(const std::optional<double>& x) {
  return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace detail

/// The deterministic part of StepMetrics; wall time only when asked for.
inline nlohmann::ordered_json to_json(const StepMetrics& m, bool with_wall_time = false) {
  nlohmann::ordered_json j;
  j["schema"] = kMetricsSchema;
  j["step"] = m.step;
  j["hinted_groups"] = m.hinted_groups;
  j["reward_mean"] = m.reward_mean;
  j["reward_naive"] = m.reward_naive;
  j["reward_hint"] = detail::opt(m.reward_hint);
  j["accuracy_naive"] = m.accuracy_naive;
  j["accuracy_hint"] = detail::opt(m.accuracy_hint);
  j["entropy_mean"] = m.entropy_mean;
  j["entropy_naive"] = m.entropy_naive;
  j["entropy_hint"] = detail::opt(m.entropy_hint);
  j["length_mean"] = m.length_mean;
  j["length_naive"] = m.length_naive;
  j["length_hint"] = detail::opt(m.length_hint);
  j["grad_norm"] = m.grad_norm;
  j["hint_ratio_mean"] = m.hint_ratio_mean;
  j["hint_length_mean"] = m.hint_length_mean;
  j["clipped_fraction"] = m.clipped_fraction;
  j["format_reward"] = m.format_reward;
  j["degenerate_groups"] = m.degenerate_groups;
  j["all_degenerate"] = m.all_degenerate;
  j["empty_continuations"] = m.empty_continuations;
  if (with_wall_time) j["wall_time_s"] = m.wall_time_s;
  return j;
}

inline std::string metrics_line(const StepMetrics& m, bool with_wall_time = false) {
  return to_json(m, with_wall_time).dump();
}

inline StepMetrics metrics_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != kMetricsSchema) throw std::runtime_error("unsupported metrics schema");
  StepMetrics m;
  m.step = j.at("step").get<int>();
  m.hinted_groups = j.at("hinted_groups").get<int>();
  m.reward_mean = j.at("reward_mean").get<double>();
  m.reward_naive = j.at("reward_naive").get<double>();
  m.reward_hint = detail::opt_from(j, "reward_hint");
  m.accuracy_naive = j.at("accuracy_naive").get<double>();
  m.accuracy_hint = detail::opt_from(j, "accuracy_hint");
  m.entropy_mean = j.at("entropy_mean").get<double>();
  m.entropy_naive = j.at("entropy_naive").get<double>();
  m.entropy_hint = detail::opt_from(j, "entropy_hint");
  m.length_mean = j.at("length_mean").get<double>();
  m.length_naive = j.at("length_naive").get<double>();
  m.length_hint = detail::opt_from(j, "length_hint");
  m.grad_norm = j.at("grad_norm").get<double>();
  m.hint_ratio_mean = j.at("hint_ratio_mean").get<double>();
  m.hint_length_mean = j.at("hint_length_mean").get<double>();
  m.clipped_fraction = j.at("clipped_fraction").get<double>();
  m.format_reward = j.at("format_reward").get<double>();
  m.degenerate_groups = j.at("degenerate_groups").get<int>();
  m.all_degenerate = j.at("all_degenerate").get<bool>();
  m.empty_continuations = j.at("empty_continuations").get<int>();
  if (j.contains("wall_time_s")) m.wall_time_s = j.at("wall_time_s").get<double>();
  return m;
}

inline std::vector<StepMetrics> read_metrics_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics log: " + path.string());
  std::vector<StepMetrics> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(metrics_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

/// One CSV per training-dynamics panel; hint columns are empty on steps
/// without hint rollouts.
inline void export_csv(const std::vector<StepMetrics>& log, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const auto cell = [](const std::optional<double>& x) {
    if (!x) return std::string();
    std::ostringstream s;
    s.precision(17);
    s << *x;
    return s.str();
  };
  const auto num = [&](double x) { return cell(x); };
  struct Panel {
    const char* file;
    const char* header;
    std::function<std::string(const StepMetrics&)> row;
  };
  const std::vector<Panel> panels = {
      {"reward.csv", "step,overall,naive,hint",
       [&](const StepMetrics& m) { return num(m.reward_mean) + "," + num(m.reward_naive) + "," + cell(m.reward_hint); }},
      {"entropy.csv", "step,overall,naive,hint",
       [&](const StepMetrics& m) { return num(m.entropy_mean) + "," + num(m.entropy_naive) + "," + cell(m.entropy_hint); }},
      {"length.csv", "step,overall,naive,hint",
       [&](const StepMetrics& m) { return num(m.length_mean) + "," + num(m.length_naive) + "," + cell(m.length_hint); }},
      {"gradnorm.csv", "step,grad_norm", [&](const StepMetrics& m) { return num(m.grad_norm); }},
      {"clipping.csv", "step,clipped_fraction", [&](const StepMetrics& m) { return num(m.clipped_fraction); }},
      {"format.csv", "step,format_reward", [&](const StepMetrics& m) { return num(m.format_reward); }},
  };
  for (const auto& p : panels) {
    std::ofstream out(out_dir / p.file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (out_dir / p.file).string());
    out << p.header << '\n';
    for (const auto& m : log) out << m.step << ',' << p.row(m) << '\n';
  }
}

/// Inspect dump of one group: a header record followed by one record per
/// rollout, all line-delimited JSON.
inline std::string inspect_dump(const GroupResult& g, const HintCorpusEntry& entry, int step) {
  std::ostringstream out;
  const auto& a = g.advantages;
  nlohmann::ordered_json head;
  head["record"] = "group";
  head["step"] = step;
  head["family"] = std::string(to_string(entry.task.family));
  head["query"] = entry.task.query;
  head["answer"] = entry.task.answer;
  head["teacher_len"] = entry.teacher_len;
  head["n"] = g.n_naive;
  head["m"] = g.rollouts.size() - g.n_naive;
  head["hinted"] = g.hinted;
  head["diff_n"] = g.prior.diff_n;
  head["hint_ratio"] = g.hint_ratio;
  head["hint_length"] = g.hint_length;
  head["diff_h"] = a.diff_h;
  head["pooled_mean"] = a.pooled_mean;
  head["pooled_std"] = a.pooled_std;
  head["degenerate"] = a.degenerate;
  out << head.dump() << '\n';
  for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
    const Rollout& r = g.rollouts[i];
    nlohmann::ordered_json j;
    j["record"] = "rollout";
    j["index"] = i;
    j["kind"] = to_string(r.kind);
    j["h"] = r.hint_length;
    j["tokens"] = r.tokens;
    j["logprob_new"] = r.logprob_new;
    j["logprob_old"] = r.logprob_old;
    j["entropy"] = r.entropy;
    j["truncated"] = r.truncated;
    j["answer_correct"] = r.reward.answer_correct;
    j["format_ok"] = r.reward.format_ok;
    j["reward"] = r.reward.total;
    j["a_hat"] = a.a_hat[i];
    j["sign"] = a.signs[i];
    j["a_tilde"] = a.a_tilde[i];
    j["h_bar"] = g.factors[i].h_bar ? nlohmann::ordered_json(*g.factors[i].h_bar) : nlohmann::ordered_json(nullptr);
    j["empty_continuation"] = g.factors[i].empty_continuation;
    j["k"] = g.factors[i].k;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace adhint

#endif  // ADHINT_REPORT_IO_HPP_
