// adhint: data generation, training, evaluation, group inspection and CSV
// export for the hint-guided policy-gradient lab.
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 contract violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adhint/adhint.hpp"

namespace fs = std::filesystem;
using namespace adhint;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "INI config file");
    cmd->add_option("--set", overrides, "override, section.key=value (repeatable)");
    cmd->add_option("--seed", seed, "seed for every stream (task, trainer, eval)");
  }

  LabConfig resolve(const std::vector<std::string>& extra = {}) const {
    LabConfig cfg = config_path.empty() ? LabConfig{} : load_config(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    for (const auto& o : extra) apply_override(cfg, o);
    if (seed) {
      cfg.task.seed = cfg.train.seed = cfg.eval.seed = *seed;
    }
    cfg.validate();
    return cfg;
  }
};

fs::path output_dir(const std::string& given, const char* leaf) {
  if (!given.empty()) return given;
  if (const char* root = std::getenv("ADHINT_OUTPUT_ROOT")) return fs::path(root) / leaf;
  throw ConfigError("no --out given and ADHINT_OUTPUT_ROOT is unset");
}

fs::path corpus_file(const std::string& corpus, Split split) {
  const fs::path p(corpus);
  if (fs::is_directory(p)) return p / (std::string(to_string(split)) + ".jsonl");
  return p;
}

int cmd_gen_data(const Common& common, const std::string& out_arg, bool force) {
  const LabConfig cfg = common.resolve();
  const fs::path out = output_dir(out_arg, "data");
  const fs::path train_path = out / "train.jsonl", heldout_path = out / "heldout.jsonl";
  if (!force && (fs::exists(train_path) || fs::exists(heldout_path)))
    throw IoError("refusing to overwrite corpus in " + out.string() + " (use --force)");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["v"] = kCorpusSchema;
  manifest["seed"] = cfg.task.seed;
  manifest["vocab_size"] = cfg.train.features.vocab.size;
  manifest["alphabet"] = cfg.train.features.vocab.alphabet;
  manifest["min_length"] = cfg.task.lengths.lo;
  manifest["max_length"] = cfg.task.lengths.hi;
  for (Split split : {Split::kTrain, Split::kHeldout}) {
    const auto entries = build_corpus(cfg, split);
    nlohmann::ordered_json mix;
    for (Family f : cfg.task.families) mix[std::string(to_string(f))] = 0;
    for (const auto& e : entries) {
      auto& n = mix[std::string(to_string(e.task.family))];
      n = n.get<int>() + 1;
    }
    write_corpus(split == Split::kTrain ? train_path : heldout_path, entries);
    manifest[std::string(to_string(split))] = {{"count", entries.size()}, {"family_mix", mix}};
  }
  std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
  std::cout << "wrote " << cfg.task.train_count << " train / " << cfg.task.heldout_count << " heldout entries to "
            << out.string() << '\n';
  return 0;
}

int cmd_train(const Common& common, const std::vector<std::string>& extra, const std::string& corpus,
              const std::string& out_arg, const std::string& resume, bool wall_time, int progress) {
  const LabConfig cfg = common.resolve(extra);
  const fs::path out = output_dir(out_arg, "run");
  const auto entries = read_corpus(corpus_file(corpus, Split::kTrain), cfg.train.features.vocab);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  std::ofstream(out / "config.ini") << render_config(cfg);
  RunOptions opts;
  if (!resume.empty()) opts.resume_from = resume;
  opts.log_wall_time = wall_time;
  opts.on_step = [progress](const StepMetrics& m) {
    if (progress > 0 && m.step % progress == 0)
      std::cerr << "step " << m.step << " reward " << m.reward_mean << " naive " << m.reward_naive << " hint "
                << (m.reward_hint ? std::to_string(*m.reward_hint) : "-") << " entropy " << m.entropy_mean << '\n';
  };
  const RunOutcome r = run_training(cfg.train, entries, out, opts);
  std::cout << "trained " << r.metrics.size() << " steps; final checkpoint " << (out / "final.bin").string() << '\n';
  return 0;
}

int cmd_eval(const Common& common, const std::string& checkpoint, const std::string& corpus,
             const std::string& split_name, const std::string& metric, std::optional<int> k) {
  std::vector<std::string> extra;
  if (!metric.empty()) extra.push_back("eval.metric=" + metric);
  LabConfig cfg = common.resolve(extra);
  if (k) cfg.eval.k = *k;
  if (!fs::exists(checkpoint)) throw IoError("checkpoint not found: " + checkpoint);
  const Checkpoint ck = load_checkpoint(checkpoint);
  const Split split = parse_split(split_name);
  std::vector<TaskInstance> tasks;
  for (auto& e : read_corpus(corpus_file(corpus, split), ck.params.spec().vocab)) tasks.push_back(std::move(e.task));
  if (tasks.empty()) throw ConfigError("no tasks to evaluate");
  const double acc =
      evaluate(ck.params, tasks, cfg.eval.metric, cfg.eval.k, cfg.train.max_response_length, cfg.eval.seed);
  const std::string name = cfg.eval.metric == EvalMetric::kPass1 ? "pass1" : "avg@" + std::to_string(cfg.eval.k);
  std::cout << name << " = " << acc << " on " << tasks.size() << " " << split_name << " tasks\n";
  nlohmann::ordered_json rec{{"metric", name},    {"accuracy", acc},          {"tasks", tasks.size()},
                             {"split", split_name}, {"checkpoint", checkpoint}, {"step", ck.step}};
  std::cout << rec.dump() << '\n';
  return 0;
}

int cmd_inspect(const Common& common, const std::string& checkpoint, const std::string& corpus,
                const std::string& split_name, std::size_t index, std::optional<int> step, const std::string& out) {
  const LabConfig cfg = common.resolve();
  if (!fs::exists(checkpoint)) throw IoError("checkpoint not found: " + checkpoint);
  const Checkpoint ck = load_checkpoint(checkpoint, &cfg.train.features);
  const auto entries = read_corpus(corpus_file(corpus, parse_split(split_name)), cfg.train.features.vocab);
  require(index < entries.size(), "corpus index out of range");
  const int at = step.value_or(cfg.train.warmup_steps + 1);
  const GroupResult g = process_group(ck.params, entries[index], cfg.train, at, 0);
  const std::string dump = inspect_dump(g, entries[index], at);
  if (out.empty()) {
    std::cout << dump;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!(f << dump)) throw IoError("cannot write " + out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hint-guided policy-gradient lab"};
  app.require_subcommand(1);

  Common gen_c, train_c, eval_c, inspect_c, print_c;

  auto* gen = app.add_subcommand("gen-data", "generate train/heldout hint corpora");
  gen_c.attach(gen);
  std::string gen_out;
  bool force = false;
  gen->add_option("-o,--out", gen_out, "output directory");
  gen->add_flag("--force", force, "overwrite an existing corpus");

  auto* train = app.add_subcommand("train", "run training");
  train_c.attach(train);
  std::string corpus, train_out, resume, advantage, schedule, factors, hints;
  std::optional<int> steps;
  bool wall_time = false;
  int progress = 0;
  train->add_option("--corpus", corpus, "corpus directory or train .jsonl")->required();
  train->add_option("-o,--out", train_out, "run directory");
  train->add_option("--resume", resume, "checkpoint to resume from");
  train->add_option("--advantage", advantage, "ae_rdp | pooled");
  train->add_option("--schedule", schedule, "adaptive | annealing | fixed");
  train->add_option("--factors", factors, "full | no_cgm | no_masking | none");
  train->add_option("--hints", hints, "on | off (off = GRPO only)");
  train->add_option("--steps", steps, "number of steps");
  train->add_flag("--log-wall-time", wall_time, "add wall_time_s to metrics records");
  train->add_option("--progress", progress, "print a progress line every N steps");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_c.attach(eval);
  std::string eval_ckpt, eval_corpus, eval_split = "heldout", metric;
  std::optional<int> eval_k;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--corpus", eval_corpus, "corpus directory or .jsonl")->required();
  eval->add_option("--split", eval_split, "train | heldout");
  eval->add_option("--metric", metric, "pass1 | avg@k");
  eval->add_option("--k", eval_k, "samples per task for avg@k");

  auto* inspect = app.add_subcommand("inspect", "dump one training group");
  inspect_c.attach(inspect);
  std::string ins_ckpt, ins_corpus, ins_split = "train", ins_out;
  std::size_t ins_index = 0;
  std::optional<int> ins_step;
  inspect->add_option("--checkpoint", ins_ckpt, "checkpoint file")->required();
  inspect->add_option("--corpus", ins_corpus, "corpus directory or .jsonl")->required();
  inspect->add_option("--split", ins_split, "train | heldout");
  inspect->add_option("--index", ins_index, "corpus entry index");
  inspect->add_option("--step", ins_step, "step number used for schedules and RNG keys");
  inspect->add_option("-o,--out", ins_out, "write the dump here instead of stdout");

  auto* csv = app.add_subcommand("export-csv", "per-panel CSVs from a metrics log");
  std::string metrics_path, csv_out;
  csv->add_option("--metrics", metrics_path, "metrics.jsonl")->required();
  csv->add_option("-o,--out", csv_out, "output directory")->required();

  auto* print = app.add_subcommand("print-config", "print the resolved config as INI");
  print_c.attach(print);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen_data(gen_c, gen_out, force);
    if (*train) {
      std::vector<std::string> extra;
      if (!advantage.empty()) extra.push_back("advantage.mode=" + advantage);
      if (!schedule.empty()) extra.push_back("hint.schedule=" + schedule);
      if (!factors.empty()) extra.push_back("modulation.mode=" + factors);
      if (!hints.empty()) extra.push_back("trainer.hints=" + hints);
      if (steps) extra.push_back("trainer.steps=" + std::to_string(*steps));
      return cmd_train(train_c, extra, corpus, train_out, resume, wall_time, progress);
    }
    if (*eval) return cmd_eval(eval_c, eval_ckpt, eval_corpus, eval_split, metric, eval_k);
    if (*inspect) return cmd_inspect(inspect_c, ins_ckpt, ins_corpus, ins_split, ins_index, ins_step, ins_out);
    if (*csv) {
      export_csv(read_metrics_log(metrics_path), csv_out);
      return 0;
    }
    if (*print) {
      std::cout << render_config(print_c.resolve());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
