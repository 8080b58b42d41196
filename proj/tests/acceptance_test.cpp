// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 7 to 9 train real runs; about a minute on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "adhint/adhint.hpp"
#include "test_support.hpp"

using namespace adhint;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Direct log-softmax over the dense weight view.
double oracle_logprob(const PolicyParams& p, const StepContext& ctx, Token y) {
  std::vector<double> logits(static_cast<std::size_t>(p.vocab_size()), 0.0);
  for (Token v = 0; v < p.vocab_size(); ++v)
    for (int f : ctx.features()) logits[static_cast<std::size_t>(v)] += p.weight(v, f);
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  return logits[static_cast<std::size_t>(y)] - std::log(z);
}

Verdict gradient_correctness() {
  FeatureSpec spec;
  PolicyParams p(spec);
  Rng rng = stream_rng(7, Stream::kTest);
  const double step = 1e-5;
  double worst = 0.0;
  int cases = 0;
  for (int c = 0; c < 120; ++c) {
    testing::randomize(p, 1000 + c);
    TaskInstance task;
    task.family = static_cast<Family>(rng.below(3));
    task.length = 2 + static_cast<int>(rng.below(7));
    for (int i = 0; i < task.length; ++i) task.query.push_back(spec.vocab.symbol(static_cast<int>(rng.below(8))));
    task.answer = derive_answer(task.family, task.query, spec.vocab);
    ContextBuilder b(spec, task);
    for (std::uint64_t i = rng.below(12); i > 0; --i) b.push(static_cast<Token>(rng.below(32)));
    const StepContext ctx = b.current();
    const Token y = static_cast<Token>(rng.below(32));
    GradBuffer dense(spec);
    dense.add(logprob_grad(p, ctx, y), 1.0);
    for (int f : ctx.features())
      for (Token v = 0; v < p.vocab_size(); ++v) {
        double& w = p.weight(v, f);
        const double saved = w;
        w = saved + step;
        const double up = oracle_logprob(p, ctx, y);
        w = saved - step;
        const double down = oracle_logprob(p, ctx, y);
        w = saved;
        const double numeric = (up - down) / (2 * step), analytic = dense.get(v, f);
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
      }
    ++cases;
  }
  return {cases >= 100 && worst < 1e-4, fmt("%d cases, worst relative error %.2e (< 1e-4)", cases, worst)};
}

Verdict g_suite() {
  bool ok = true;
  for (double a : {0.2, 0.5, 0.8}) {
    ok = ok && g_schedule(1.0, a) == 1.0;
    ok = ok && std::abs(g_schedule(a, a)) < 1e-15 && std::abs(g_schedule(1 / a, a)) < 1e-15;
    for (double x : {0.0, a * 0.999, 1 / a * 1.001, 50.0}) ok = ok && g_schedule(x, a) == 0.0;
    for (double at : {a, 1.0, 1 / a})
      ok = ok && std::abs(g_schedule(at - 1e-12, a) - g_schedule(at, a)) < 1e-9 &&
           std::abs(g_schedule(at + 1e-12, a) - g_schedule(at, a)) < 1e-9;
  }
  // sin(pi/4) and cos(pi/4): the quoted 0.70711 is this value rounded
  const double lo = g_schedule(0.75, 0.5), hi = g_schedule(1.5, 0.5);
  ok = ok && std::abs(lo - std::sqrt(0.5)) < 1e-6 && std::abs(hi - std::sqrt(0.5)) < 1e-6;
  return {ok, fmt("g(0.75)=%.8f g(1.5)=%.8f, zeros, support and continuity", lo, hi)};
}

Verdict pooled_suite() {
  Rng rng = stream_rng(8, Stream::kTest);
  double worst_mean = 0.0, worst_sd = 0.0;
  int groups = 0;
  bool zeros = true;
  for (int c = 0; c < 1000; ++c) {
    std::vector<double> r(2 + rng.below(15));
    for (double& x : r) x = rng.below(3) == 0 ? rng.uniform(0, 1) : static_cast<double>(rng.below(2));
    const auto p = pooled_advantages(r);
    if (p.degenerate) {
      for (double a : p.a_hat) zeros = zeros && a == 0.0;
      continue;
    }
    double m = 0.0, s = 0.0;
    for (double a : p.a_hat) m += a / static_cast<double>(p.a_hat.size());
    for (double a : p.a_hat) s += (a - m) * (a - m) / static_cast<double>(p.a_hat.size());
    worst_mean = std::max(worst_mean, std::abs(m));
    worst_sd = std::max(worst_sd, std::abs(std::sqrt(s) - 1));
    ++groups;
  }
  for (double level : {0.0, 0.1, 1.0})
    for (double a : pooled_advantages(std::vector<double>(8, level)).a_hat) zeros = zeros && a == 0.0;
  return {worst_mean < 1e-9 && worst_sd < 1e-9 && zeros,
          fmt("%d groups, |mean| <= %.1e, |sd-1| <= %.1e, degenerate groups all zero", groups, worst_mean, worst_sd)};
}

Verdict ae_rdp_suite() {
  const auto rep = estimate_advantages(std::vector<double>{1, 0, 1, 1}, 2, AdvantageMode::kAeRdp);
  const double want[] = {0.86603, -1.15470, 0.43301, 0.43301};
  double worked = 0.0;
  for (int i = 0; i < 4; ++i) worked = std::max(worked, std::abs(rep.a_tilde[i] - want[i]));
  Rng rng = stream_rng(9, Stream::kTest);
  double worst = 0.0;
  bool signs = true;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.below(8), m = 1 + rng.below(8);
    std::vector<double> r(n + m);
    for (double& x : r) x = rng.below(4) == 0 ? rng.uniform(0, 1) : static_cast<double>(rng.below(2));
    const auto got = estimate_advantages(r, n, AdvantageMode::kAeRdp);
    double mean = 0.0, nm = 0.0, hm = 0.0, var = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      mean += r[i] / static_cast<double>(r.size());
      (i < n ? nm : hm) += r[i] / static_cast<double>(i < n ? n : m);
    }
    for (double x : r) var += (x - mean) * (x - mean) / static_cast<double>(r.size());
    const double sd = std::sqrt(var);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double a = sd < 1e-12 ? 0.0 : (r[i] - mean) / sd;
      const double gm = i < n ? nm : hm;
      const double direct = a > 0 ? a * mean / std::max(gm, 1e-4) : a * gm / std::max(mean, 1e-4);
      worst = std::max(worst, std::abs(got.a_tilde[i] - direct));
      if (got.a_hat[i] > 0) signs = signs && got.a_tilde[i] > 0;
      if (got.a_hat[i] < 0) signs = signs && got.a_tilde[i] <= 0;
    }
  }
  return {worked < 1e-5 && worst < 1e-12 && signs,
          fmt("worked example off by %.1e (< 1e-5), 1000 groups off by %.1e (< 1e-12), signs %s", worked, worst,
              signs ? "preserved" : "broken")};
}

Verdict scheduling_suite() {
  const HintSchedule defaults{};
  bool ok = hint_ratio_with_noise({0.0, 1.0}, defaults, 0.0) == 0.0 && hint_ratio_with_noise({0.5, 0.5}, defaults, 0.0) == 0.1 &&
            hint_ratio_with_noise({1.0, 0.0}, defaults, 0.0) == 0.2;
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double w = hint_ratio_with_noise({i / 1000.0, 1 - i / 1000.0}, defaults, 0.0);
    ok = ok && w >= prev;
    prev = w;
  }
  Rng rng = stream_rng(10, Stream::kHintNoise);
  for (const HintSchedule& s : {defaults, HintSchedule{1.0, 0.0, 0.01}})
    for (double d : {0.0, 0.5, 1.0})
      for (int i = 0; i < 5000; ++i) {
        const double w = hint_ratio({d, 1 - d}, s, rng);
        ok = ok && w >= 0.0 && w <= 1.0;
      }
  return {ok, "{0,0.5,1} -> {0,0.1,0.2} exactly, monotone, clamped to [0,1] under R=0.01"};
}

Verdict masking_independence() {
  TrainConfig cfg;
  cfg.max_response_length = 20;
  cfg.hint.w_max = 0.9;
  std::vector<HintCorpusEntry> corpus;
  for (const auto& t : generate_tasks(Family::kReverse, 16, {5, 8}, 3, Split::kTrain, Vocab{}, 8))
    corpus.push_back(teacher_trajectory(t));
  PolicyParams p(cfg.features);
  testing::randomize(p, 21, 0.2);
  std::vector<GroupResult> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    groups.push_back(process_group(p, corpus[i], cfg, cfg.warmup_steps + 1, i));
  const auto probe = testing::rewire_masked_token(groups, cfg.features);
  if (probe.feature < 0) return {false, "no negative-advantage hint rollout found"};
  const double k = groups[probe.group].factors[probe.rollout].k[probe.token];
  const auto before = assemble_gradient(p, groups, cfg);
  PolicyParams q = p;
  auto col = q.column(probe.feature);
  for (std::size_t v = 0; v < col.size(); ++v) col[v] += 0.1 * static_cast<double>(v % 7) - 0.3;
  const auto after = assemble_gradient(q, groups, cfg);
  return {k == 0.0 && after == before,
          fmt("masked token k=%g, gradient %s after perturbing its column", k,
              after == before ? "bitwise unchanged" : "CHANGED")};
}

Verdict determinism(const std::filesystem::path& root) {
  const LabConfig cfg;
  const auto corpus = build_corpus(cfg, Split::kTrain);
  double worst = 0.0;
  for (const char* run : {"a", "b"}) {
    const auto t0 = std::chrono::steady_clock::now();
    run_training(cfg.train, corpus, root / run);
    worst = std::max(worst, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  const bool logs = slurp(root / "a" / "metrics.jsonl") == slurp(root / "b" / "metrics.jsonl");
  const bool ckpt = slurp(root / "a" / "final.bin") == slurp(root / "b" / "final.bin");
  return {logs && ckpt && worst < 600.0,
          fmt("%d-step default runs: metrics %s, checkpoints %s, slowest run %.1f s (< 600 s)", cfg.train.steps,
              logs ? "identical" : "DIFFER", ckpt ? "identical" : "DIFFER", worst)};
}

struct DynamicsRun {
  double band = 0.0;  // post-warmup steps with hint reward in [0.3, 0.9]
  double pass1 = 0.0;
  double gap = 0.0;  // mean hint minus naive reward over the final quarter
};

DynamicsRun dynamics_run(const LabConfig& cfg, const std::filesystem::path& dir) {
  const auto out = run_training(cfg.train, build_corpus(cfg, Split::kTrain), dir);
  std::vector<TaskInstance> tasks;
  for (auto& e : build_corpus(cfg, Split::kHeldout)) tasks.push_back(std::move(e.task));
  DynamicsRun r;
  r.pass1 = evaluate(out.params, tasks, EvalMetric::kPass1, 1, cfg.train.max_response_length, cfg.eval.seed);
  const int steps = cfg.train.steps;
  int post = 0, in_band = 0, tail = 0;
  for (const auto& m : out.metrics) {
    if (m.step > cfg.train.warmup_steps) {
      ++post;
      if (m.reward_hint && *m.reward_hint >= 0.3 && *m.reward_hint <= 0.9) ++in_band;
    }
    if (m.step > steps - steps / 4) {
      ++tail;
      r.gap += m.reward_hint.value_or(m.reward_naive) - m.reward_naive;
    }
  }
  r.band = post ? static_cast<double>(in_band) / post : 0.0;
  r.gap = tail ? r.gap / tail : 0.0;
  return r;
}

Verdict dynamics(const std::filesystem::path& root, const std::filesystem::path& hard_config) {
  const LabConfig base = load_config(hard_config);
  // seeds disjoint from the ones used to choose the hard-curriculum values
  const std::uint64_t seeds[] = {100, 101, 102};
  double band = 0, adh_pass = 0, grpo_pass = 0, adh_gap = 0, pool_gap = 0, start_naive = 0;
  std::string per_seed;
  for (std::uint64_t s : seeds) {
    LabConfig cfg = base;
    cfg.task.seed = cfg.train.seed = cfg.eval.seed = s;
    LabConfig pooled = cfg, grpo = cfg;
    pooled.train.advantage = AdvantageMode::kPooled;
    grpo.train.hints = false;
    const auto a = dynamics_run(cfg, root / ("adhint" + std::to_string(s)));
    const auto p = dynamics_run(pooled, root / ("pooled" + std::to_string(s)));
    const auto g = dynamics_run(grpo, root / ("grpo" + std::to_string(s)));
    start_naive += read_metrics_log(root / ("grpo" + std::to_string(s)) / "metrics.jsonl").front().reward_naive / 3;
    band += a.band / 3;
    adh_pass += a.pass1 / 3;
    grpo_pass += g.pass1 / 3;
    adh_gap += a.gap / 3;
    pool_gap += p.gap / 3;
    per_seed += fmt("\n    seed %llu: band %.2f, pass1 adhint %.3f grpo %.3f, gap adhint %+.3f pooled %+.3f",
                    static_cast<unsigned long long>(s), a.band, a.pass1, g.pass1, a.gap, p.gap);
  }
  const bool hard = start_naive < 0.1 + 1e-9;
  const bool a_ok = band >= 0.7, b_ok = adh_pass - grpo_pass >= 0.05, c_ok = pool_gap >= 0.2 && adh_gap < 0.2;
  return {hard && a_ok && b_ok && c_ok,
          fmt("initial naive reward %.3f; (a) band %.2f >= 0.70 %s; (b) pass1 %.3f vs %.3f %s; "
              "(c) gap pooled %+.3f >= 0.2, adhint %+.3f < 0.2 %s",
              start_naive, band, a_ok ? "PASS" : "FAIL", adh_pass, grpo_pass, b_ok ? "PASS" : "FAIL", pool_gap,
              adh_gap, c_ok ? "PASS" : "FAIL") +
              per_seed};
}

Verdict warmup_equivalence(const std::filesystem::path& root) {
  LabConfig cfg;
  cfg.train.steps = cfg.train.warmup_steps;
  cfg.train.checkpoint_every = 1;
  LabConfig grpo = cfg;
  grpo.train.hints = false;
  const auto corpus = build_corpus(cfg, Split::kTrain);
  run_training(cfg.train, corpus, root / "adhint");
  run_training(grpo.train, corpus, root / "grpo");
  bool same = slurp(root / "adhint" / "metrics.jsonl") == slurp(root / "grpo" / "metrics.jsonl");
  for (int s = 1; s <= cfg.train.warmup_steps; ++s)
    same = same && slurp(step_checkpoint_path(root / "adhint", s)) == slurp(step_checkpoint_path(root / "grpo", s));
  // the step after warmup must actually use hints, or the check is vacuous
  LabConfig longer = cfg;
  longer.train.steps = cfg.train.warmup_steps + 1;
  const auto next = run_training(longer.train, corpus, root / "adhint_next");
  const int hinted = next.metrics.back().hinted_groups;
  return {same && hinted > 0, fmt("steps 1-%d metrics and checkpoints %s (n=%d); step %d has %d hinted groups",
                                  cfg.train.warmup_steps, same ? "byte-identical" : "DIFFER", cfg.train.naive_rollouts,
                                  cfg.train.warmup_steps + 1, hinted)};
}

}  // namespace

int main() {
  const testing::TempDir dir("acceptance");
  const std::filesystem::path hard = std::filesystem::path(ADHINT_SOURCE_DIR) / "configs" / "hard.ini";
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"g(x; alpha) suite", g_suite},
      {"pooled advantages", pooled_suite},
      {"AE-RDP oracle equivalence", ae_rdp_suite},
      {"hint scheduling", scheduling_suite},
      {"masking independence", masking_independence},
      {"determinism and runtime", [&] { return determinism(dir.path() / "determinism"); }},
      {"training dynamics", [&] { return dynamics(dir.path() / "dynamics", hard); }},
      {"warmup equivalence", [&] { return warmup_equivalence(dir.path() / "warmup"); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
