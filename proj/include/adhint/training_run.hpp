#ifndef ADHINT_TRAINING_RUN_HPP_
#define ADHINT_TRAINING_RUN_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adhint/errors.hpp"
#include "adhint/policy.hpp"
#include "adhint/report_io.hpp"
#include "adhint/trainer.hpp"

namespace adhint {

struct RunOptions {
  std::optional<std::filesystem::path> resume_from;
  bool log_wall_time = false;
  std::function<void(const StepMetrics&)> on_step;  // progress hook
};

struct RunOutcome {
  PolicyParams params;
  std::vector<StepMetrics> metrics;  // steps executed by this call
};

inline std::filesystem::path step_checkpoint_path(const std::filesystem::path& dir, int step) {
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt_step_%06d.bin", step);
  return dir / name;
}

/// Loops train_step over epoch-shuffled batches. Writes metrics.jsonl (one
/// record per step), periodic checkpoints and final.bin into `out_dir`.
/// Resuming appends to the existing metrics log.
inline RunOutcome run_training(const TrainConfig& cfg, const std::vector<HintCorpusEntry>& corpus,
                               const std::filesystem::path& out_dir, const RunOptions& opts = {}) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto metrics_path = out_dir / "metrics.jsonl";
  std::ofstream log(metrics_path, std::ios::binary | (opts.resume_from ? std::ios::app : std::ios::trunc));
  if (ec || !log) throw IoError("output directory not writable: " + out_dir.string());

  RunOutcome out{PolicyParams(cfg.features), {}};
  int first_step = 1;
  if (opts.resume_from) {
    Checkpoint ck = load_checkpoint(*opts.resume_from, &cfg.features);
    out.params = std::move(ck.params);
    first_step = static_cast<int>(ck.step) + 1;
  }
  if (cfg.steps > 0 && corpus.empty()) throw ConfigError("training corpus is empty");

  std::optional<PolicyParams> reference;
  if (cfg.kl_beta > 0.0) reference.emplace(cfg.features);

  std::optional<EpochSampler> sampler;
  if (!corpus.empty()) sampler.emplace(corpus.size(), cfg.seed);
  std::vector<HintCorpusEntry> batch;
  for (int step = first_step; step <= cfg.steps; ++step) {
    batch.clear();
    for (std::size_t i : sampler->batch(step, cfg.batch_size)) batch.push_back(corpus[i]);
    StepResult r = train_step(out.params, batch, cfg, step, reference ? &*reference : nullptr);
    log << metrics_line(r.metrics, opts.log_wall_time) << '\n';
    log.flush();
    if (opts.on_step) opts.on_step(r.metrics);
    out.metrics.push_back(r.metrics);
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)
      save_checkpoint(out.params, step_checkpoint_path(out_dir, step), static_cast<std::uint64_t>(step));
  }
  if (!log) throw IoError("failed writing " + metrics_path.string());
  const int last = std::max(cfg.steps, first_step - 1);
  save_checkpoint(out.params, out_dir / "final.bin", static_cast<std::uint64_t>(last));
  return out;
}

}  // namespace adhint

#endif  // ADHINT_TRAINING_RUN_HPP_
