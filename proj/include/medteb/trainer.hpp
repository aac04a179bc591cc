#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medteb/matrix.hpp"
#include "medteb/providers.hpp"
#include "medteb/rng.hpp"

namespace medteb {

struct PositivePair {
  std::string anchor;
  std::string positive;
  std::string source;

  friend bool operator==(const PositivePair&, const PositivePair&) = default;
};

using PositivePairCorpus = std::vector<PositivePair>;

// JSONL, one {"anchor": str, "positive": str, "source": str} per line.
PositivePairCorpus load_pairs_corpus(const std::filesystem::path& jsonl);
void save_pairs_corpus(const PositivePairCorpus& corpus, const std::filesystem::path& jsonl);

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t total_steps = 2000;
  std::size_t warmup_steps = 250;
  double peak_lr = 2e-3;
  double weight_decay = 0.01;
  double tau_init = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t d_in = 0;   // 0: taken from the base provider
  std::size_t d_out = 0;  // 0: same as d_in
  double heldout_fraction = 0.02;
  std::size_t heldout_every = 100;
};

TrainConfig load_train_config(const std::filesystem::path& toml_path);
void validate(const TrainConfig& config);

// Trainable projection head y = W x + b, with temperature tau = exp(log_tau)
// and AdamW moments for every parameter.
struct TrainState {
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::vector<double> weights;  // d_out x d_in, row-major
  std::vector<double> bias;     // d_out
  double log_tau = 0.0;
  std::uint64_t step = 0;

  std::vector<double> m_weights, v_weights, m_bias, v_bias;
  double m_log_tau = 0.0;
  double v_log_tau = 0.0;

  double tau() const;
  Vector project(std::span<const double> x) const;
  EmbeddingMatrix project(const EmbeddingMatrix& X) const;
};

// Rectangular identity projection, zero bias, tau = tau_init, zero moments.
TrainState init_state(std::size_t d_in, std::size_t d_out, double tau_init);

struct Gradients {
  std::vector<double> weights;
  std::vector<double> bias;
  double log_tau = 0.0;
};

// Arithmetic mean of the rows whose mask bit is set.
Vector mean_pool(const EmbeddingMatrix& token_vectors, std::span<const int> mask);

struct InfoNceResult {
  double loss = 0.0;
  EmbeddingMatrix grad_anchors;    // dL/dZ
  EmbeddingMatrix grad_positives;  // dL/dZ+
  double grad_tau = 0.0;           // dL/dtau
  double grad_log_tau = 0.0;       // dL/dlog(tau) = tau * dL/dtau
};

// L = -(1/N) sum_i log softmax_j(cos(z_i, z_j+) / tau)[i]; every other positive
// in the batch acts as a negative for row i.
InfoNceResult info_nce(const EmbeddingMatrix& anchors, const EmbeddingMatrix& positives, double tau);

// Linear warmup to peak_lr over warmup_steps, then cosine decay to 0 at total_steps.
double lr_schedule(std::size_t step, const TrainConfig& config);

// Bias-corrected Adam with decoupled weight decay on the projection weights
// only; increments state.step.
void adamw_step(TrainState& state, const Gradients& grads, double lr, const TrainConfig& config);

struct Batch {
  std::string source;
  std::vector<std::size_t> indices;  // into the corpus
};

// Emits batches drawn from one source at a time. The source is chosen with
// probability proportional to its pair count; within a source pairs are
// visited in a seeded random order, reshuffled after each pass.
class SourceBatcher {
 public:
  SourceBatcher(const PositivePairCorpus& corpus, std::size_t batch_size, std::uint64_t seed);
  Batch next();
  const std::vector<std::string>& sources() const { return sources_; }

 private:
  struct Stream {
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
  };
  std::vector<std::string> sources_;
  std::vector<Stream> streams_;
  std::vector<double> cumulative_;  // normalized cumulative source weights
  std::size_t batch_size_;
  Rng rng_;
};

struct LossLogRow {
  std::size_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> heldout_loss;
};

struct TrainResult {
  TrainState state;
  std::vector<LossLogRow> log;
  std::size_t train_pairs = 0;
  std::size_t heldout_pairs = 0;
};

// Embeds every text once with the frozen base provider, then runs
// info_nce -> adamw_step for config.total_steps steps. A seeded
// heldout_fraction of the corpus is set aside and its loss logged every
// heldout_every steps. Throws TaskError on a non-finite loss.
TrainResult train_head(EmbeddingProvider& base, const PositivePairCorpus& corpus, const TrainConfig& config);

// Mean InfoNCE loss of `state` over `pairs`, batched per source in order.
double mean_info_nce(const TrainState& state, const EmbeddingMatrix& anchors, const EmbeddingMatrix& positives,
                     std::span<const std::string> sources, std::size_t batch_size);

void write_loss_csv(const std::vector<LossLogRow>& log, const std::filesystem::path& csv);

struct Checkpoint {
  TrainState state;
  TrainConfig config;
};

// Binary layout, all little-endian: magic "MEDTEHD1", u32 version (1), u32
// d_in, u32 d_out, u64 step, f64 log_tau, config echo (u64 batch_size,
// u64 total_steps, u64 warmup_steps, f64 peak_lr, f64 weight_decay,
// f64 tau_init, u64 seed), f64[d_out*d_in] weights row-major, f64[d_out] bias.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Base provider followed by the trained projection; rows are L2-normalized.
class ProjectedProvider final : public EmbeddingProvider {
 public:
  ProjectedProvider(std::shared_ptr<EmbeddingProvider> base, TrainState state);

  std::string name() const override;
  std::size_t dim() override { return state_.d_out; }
  bool supports_concurrency() const override { return base_->supports_concurrency(); }

 protected:
  EmbeddingMatrix embed_texts(std::span<const std::string> texts) override;
  bool normalize_locally() const override { return true; }

 private:
  std::shared_ptr<EmbeddingProvider> base_;
  TrainState state_;
};

}  // namespace medteb
