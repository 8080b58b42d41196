#ifndef ADHINT_POLICY_HPP_
#define ADHINT_POLICY_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "adhint/errors.hpp"
#include "adhint/features.hpp"
#include "adhint/rng.hpp"

namespace adhint {

/// Linear-softmax policy: logits = W phi. Stored feature-major (F x V) so a
/// sparse phi touches contiguous columns; the checkpoint format is the
/// V x F row-major view.
class PolicyParams {
 public:
  PolicyParams() = default;
  explicit PolicyParams(const FeatureSpec& spec)
      : spec_(spec), weights_(static_cast<std::size_t>(spec.dim()) * spec.vocab.size, 0.0) {
    spec_.validate();
  }

  const FeatureSpec& spec() const { return spec_; }
  int vocab_size() const { return spec_.vocab.size; }
  int feature_dim() const { return spec_.dim(); }

  std::span<const double> column(int feature) const {
    return {weights_.data() + static_cast<std::size_t>(feature) * vocab_size(),
            static_cast<std::size_t>(vocab_size())};
  }
  std::span<double> column(int feature) {
    return {weights_.data() + static_cast<std::size_t>(feature) * vocab_size(),
            static_cast<std::size_t>(vocab_size())};
  }

  /// W[token][feature] in the V x F convention.
  double weight(Token token, int feature) const { return column(feature)[token]; }
  double& weight(Token token, int feature) { return column(feature)[token]; }

  std::span<const double> raw() const { return weights_; }
  std::span<double> raw() { return weights_; }

  bool all_finite() const {
    return std::all_of(weights_.begin(), weights_.end(), [](double w) { return std::isfinite(w); });
  }

  bool operator==(const PolicyParams&) const = default;

 private:
  FeatureSpec spec_;
  std::vector<double> weights_;
};

struct StepDistribution {
  std::vector<double> probs;
  std::vector<double> logprobs;
  double entropy = 0.0;  // nats
};

inline void check_context(const PolicyParams& params, const StepContext& ctx) {
  for (int f : ctx.features())
    require(f >= 0 && f < params.feature_dim(), "feature index " + std::to_string(f) + " out of range");
}

inline StepDistribution next_distribution(const PolicyParams& params, const StepContext& ctx) {
  check_context(params, ctx);
  const auto v = static_cast<std::size_t>(params.vocab_size());
  StepDistribution d;
  d.logprobs.assign(v, 0.0);
  for (int f : ctx.features()) {
    const auto col = params.column(f);
    for (std::size_t y = 0; y < v; ++y) d.logprobs[y] += col[y];
  }
  const double max_logit = *std::max_element(d.logprobs.begin(), d.logprobs.end());
  double z = 0.0;
  for (double l : d.logprobs) z += std::exp(l - max_logit);
  const double log_z = max_logit + std::log(z);
  d.probs.resize(v);
  for (std::size_t y = 0; y < v; ++y) {
    d.logprobs[y] -= log_z;
    d.probs[y] = std::exp(d.logprobs[y]);
    if (d.probs[y] > 0.0) d.entropy -= d.probs[y] * d.logprobs[y];
  }
  d.entropy = std::max(0.0, d.entropy);
  return d;
}

struct Decoding {
  bool greedy = false;
  double temperature = 1.0;

  static Decoding Greedy() { return {true, 1.0}; }
  static Decoding Sampled(double t) { return {false, t}; }
};

inline Token argmax_token(std::span<const double> probs) {
  return static_cast<Token>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

/// Greedy returns the argmax (lowest id on ties); otherwise inverse-CDF
/// sampling from softmax(logprobs / temperature).
inline Token sample_token(const StepDistribution& dist, Decoding decoding, Rng& rng) {
  if (decoding.greedy) return argmax_token(dist.probs);
  require(decoding.temperature > 0.0, "temperature must be > 0");
  const std::size_t v = dist.probs.size();
  const double u = rng.uniform();
  if (decoding.temperature == 1.0) {
    double acc = 0.0;
    for (std::size_t y = 0; y < v; ++y) {
      acc += dist.probs[y];
      if (u < acc) return static_cast<Token>(y);
    }
  } else {
    std::vector<double> scaled(v);
    const double inv_t = 1.0 / decoding.temperature;
    const double m = *std::max_element(dist.logprobs.begin(), dist.logprobs.end());
    double z = 0.0;
    for (std::size_t y = 0; y < v; ++y) z += scaled[y] = std::exp((dist.logprobs[y] - m) * inv_t);
    double acc = 0.0;
    for (std::size_t y = 0; y < v; ++y) {
      acc += scaled[y] / z;
      if (u < acc) return static_cast<Token>(y);
    }
  }
  // u landed in the rounding gap above the last cumulative sum.
  for (std::size_t y = v; y-- > 0;)
    if (dist.probs[y] > 0.0) return static_cast<Token>(y);
  return 0;
}

/// Gradient of log pi(y | ctx) w.r.t. W, kept as the outer product
/// (onehot(y) - p) phi^T.
struct SparseGrad {
  StepContext features;
  std::vector<double> residual;  // onehot(y) - p, length V
};

inline SparseGrad logprob_grad(const PolicyParams& params, const StepContext& ctx, Token y) {
  require(y >= 0 && y < params.vocab_size(), "observed token out of range");
  StepDistribution d = next_distribution(params, ctx);
  SparseGrad g{ctx, std::move(d.probs)};
  for (double& r : g.residual) r = -r;
  g.residual[static_cast<std::size_t>(y)] += 1.0;
  return g;
}

/// Dense accumulator with the same F x V layout as PolicyParams.
class GradBuffer {
 public:
  explicit GradBuffer(const FeatureSpec& spec)
      : v_(spec.vocab.size), data_(static_cast<std::size_t>(spec.dim()) * spec.vocab.size, 0.0) {}

  void add_outer(const StepContext& ctx, std::span<const double> residual, double coef) {
    if (coef == 0.0) return;
    for (int f : ctx.features()) {
      double* col = data_.data() + static_cast<std::size_t>(f) * v_;
      for (std::size_t y = 0; y < residual.size(); ++y) col[y] += coef * residual[y];
    }
  }
  void add(const SparseGrad& g, double coef) { add_outer(g.features, g.residual, coef); }

  double get(Token token, int feature) const {
    return data_[static_cast<std::size_t>(feature) * v_ + static_cast<std::size_t>(token)];
  }
  std::span<const double> raw() const { return data_; }

  double norm() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }

  bool operator==(const GradBuffer&) const = default;

 private:
  std::size_t v_;
  std::vector<double> data_;
};

inline void apply_ascent(PolicyParams& params, const GradBuffer& grad, double step_size) {
  auto w = params.raw();
  const auto g = grad.raw();
  require(w.size() == g.size(), "gradient shape mismatch");
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += step_size * g[i];
}

// ---------------------------------------------------------------------------
// Checkpoints: little-endian binary.
//   8 bytes  magic "ADHCKPT\0"
//   u32      version (1)
//   u32 x 6  V, K, B, alphabet, length_buckets, max_length
//   u64      training step
//   f64 x V*F weights, row-major over (token, feature)

inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'H', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

struct Checkpoint {
  PolicyParams params;
  std::uint64_t step = 0;
};

namespace detail {
template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}
template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("checkpoint truncated");
  return value;
}
}  // namespace detail

inline void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path,
                            std::uint64_t step = 0) {
  require(params.all_finite(), "refusing to checkpoint non-finite weights");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  const auto& s = params.spec();
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_pod<std::uint32_t>(out, kCheckpointVersion);
  for (int x : {s.vocab.size, s.context_order, s.buckets(), s.vocab.alphabet, s.length_buckets, s.max_length})
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(x));
  detail::write_pod<std::uint64_t>(out, step);
  for (Token y = 0; y < params.vocab_size(); ++y)
    for (int f = 0; f < params.feature_dim(); ++f) detail::write_pod<double>(out, params.weight(y, f));
  if (!out) throw IoError("write failed: " + path.string());
}

/// Reads a checkpoint; if `expected` is given the stored shape must match it.
inline Checkpoint load_checkpoint(const std::filesystem::path& path,
                                  const FeatureSpec* expected = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw IoError("not a checkpoint file: " + path.string());
  if (detail::read_pod<std::uint32_t>(in) != kCheckpointVersion)
    throw IoError("unsupported checkpoint version: " + path.string());
  FeatureSpec spec;
  spec.vocab.size = static_cast<int>(detail::read_pod<std::uint32_t>(in));
  spec.context_order = static_cast<int>(detail::read_pod<std::uint32_t>(in));
  const auto buckets = static_cast<int>(detail::read_pod<std::uint32_t>(in));
  spec.vocab.alphabet = static_cast<int>(detail::read_pod<std::uint32_t>(in));
  spec.length_buckets = static_cast<int>(detail::read_pod<std::uint32_t>(in));
  spec.max_length = static_cast<int>(detail::read_pod<std::uint32_t>(in));
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw IoError("corrupt checkpoint header (" + std::string(e.what()) + "): " + path.string());
  }
  if (buckets != spec.buckets()) throw IoError("corrupt checkpoint header: " + path.string());
  if (expected && !(*expected == spec))
    throw IoError("checkpoint shape mismatch: file has V=" + std::to_string(spec.vocab.size) +
                  " K=" + std::to_string(spec.context_order) + " B=" + std::to_string(spec.buckets()) +
                  ", expected V=" + std::to_string(expected->vocab.size) +
                  " K=" + std::to_string(expected->context_order) +
                  " B=" + std::to_string(expected->buckets()));
  Checkpoint ck{PolicyParams(spec), detail::read_pod<std::uint64_t>(in)};
  for (Token y = 0; y < spec.vocab.size; ++y)
    for (int f = 0; f < spec.dim(); ++f) ck.params.weight(y, f) = detail::read_pod<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in checkpoint: " + path.string());
  return ck;
}

}  // namespace adhint

#endif  // ADHINT_POLICY_HPP_
