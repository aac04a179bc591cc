#include "medteb/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "medteb/error.hpp"
#include "medteb/metrics.hpp"
#include "medteb/rng.hpp"
#include "toml_util.hpp"

namespace medteb {

using nlohmann::json;
namespace fs = std::filesystem;

PositivePairCorpus load_pairs_corpus(const fs::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw ValidationError("cannot open " + jsonl.string());
  PositivePairCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json obj = json::parse(line, nullptr, false);
    const auto is_str = [&](const char* k) { return obj.contains(k) && obj[k].is_string(); };
    if (obj.is_discarded() || !obj.is_object() || !is_str("anchor") || !is_str("positive") || !is_str("source")) {
      throw ValidationError(jsonl.string() + ":" + std::to_string(lineno) +
                            ": expected {\"anchor\": str, \"positive\": str, \"source\": str}");
    }
    corpus.push_back({obj["anchor"].get<std::string>(), obj["positive"].get<std::string>(),
                      obj["source"].get<std::string>()});
  }
  return corpus;
}

void save_pairs_corpus(const PositivePairCorpus& corpus, const fs::path& jsonl) {
  if (jsonl.has_parent_path()) fs::create_directories(jsonl.parent_path());
  std::ofstream out(jsonl, std::ios::binary);
  if (!out) throw Error("cannot write " + jsonl.string());
  for (const auto& p : corpus) {
    out << json{{"anchor", p.anchor}, {"positive", p.positive}, {"source", p.source}}.dump() << '\n';
  }
}

TrainConfig load_train_config(const fs::path& toml_path) {
  const toml::table t = parse_toml_file(toml_path);
  TrainConfig c;
  c.batch_size = static_cast<std::size_t>(toml_u64(t, "batch_size", c.batch_size));
  c.total_steps = static_cast<std::size_t>(toml_u64(t, "total_steps", c.total_steps));
  c.warmup_steps = static_cast<std::size_t>(toml_u64(t, "warmup_steps", c.warmup_steps));
  c.peak_lr = t["peak_lr"].value_or(c.peak_lr);
  c.weight_decay = t["weight_decay"].value_or(c.weight_decay);
  c.tau_init = t["tau_init"].value_or(c.tau_init);
  c.beta1 = t["beta1"].value_or(c.beta1);
  c.beta2 = t["beta2"].value_or(c.beta2);
  c.eps = t["eps"].value_or(c.eps);
  c.seed = toml_u64(t, "seed", c.seed);
  c.d_in = static_cast<std::size_t>(toml_u64(t, "d_in", c.d_in));
  c.d_out = static_cast<std::size_t>(toml_u64(t, "d_out", c.d_out));
  c.heldout_fraction = t["heldout_fraction"].value_or(c.heldout_fraction);
  c.heldout_every = static_cast<std::size_t>(toml_u64(t, "heldout_every", c.heldout_every));
  validate(c);
  return c;
}

void validate(const TrainConfig& c) {
  if (c.batch_size == 0) throw ValidationError("train config: batch_size must be positive");
  if (c.total_steps == 0) throw ValidationError("train config: total_steps must be positive");
  if (c.warmup_steps == 0 || c.warmup_steps > c.total_steps) {
    throw ValidationError("train config: warmup_steps must be in [1, total_steps]");
  }
  if (!(c.peak_lr > 0.0)) throw ValidationError("train config: peak_lr must be positive");
  if (c.weight_decay < 0.0) throw ValidationError("train config: weight_decay must be nonnegative");
  if (!(c.tau_init > 0.0)) throw ValidationError("train config: tau_init must be positive");
  if (c.heldout_fraction < 0.0 || c.heldout_fraction >= 1.0) {
    throw ValidationError("train config: heldout_fraction must be in [0, 1)");
  }
}

// ---------------------------------------------------------------------------

double TrainState::tau() const { return std::exp(log_tau); }

Vector TrainState::project(std::span<const double> x) const {
  Vector y(bias);
  for (std::size_t r = 0; r < d_out; ++r) {
    const double* w = weights.data() + r * d_in;
    double s = 0.0;
    for (std::size_t c = 0; c < d_in; ++c) s += w[c] * x[c];
    y[r] += s;
  }
  return y;
}

EmbeddingMatrix TrainState::project(const EmbeddingMatrix& X) const {
  if (X.dim() != d_in) {
    throw ValidationError("projection expects dimension " + std::to_string(d_in) + ", got " + std::to_string(X.dim()));
  }
  EmbeddingMatrix Y(X.rows(), d_out);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const Vector y = project(X.row(i));
    std::copy(y.begin(), y.end(), Y.row(i).begin());
  }
  return Y;
}

TrainState init_state(std::size_t d_in, std::size_t d_out, double tau_init) {
  if (d_in == 0 || d_out == 0) throw ValidationError("projection dimensions must be positive");
  if (!(tau_init > 0.0)) throw ValidationError("initial temperature must be positive");
  TrainState s;
  s.d_in = d_in;
  s.d_out = d_out;
  s.weights.assign(d_out * d_in, 0.0);
  for (std::size_t i = 0; i < std::min(d_in, d_out); ++i) s.weights[i * d_in + i] = 1.0;
  s.bias.assign(d_out, 0.0);
  s.log_tau = std::log(tau_init);
  s.m_weights.assign(s.weights.size(), 0.0);
  s.v_weights.assign(s.weights.size(), 0.0);
  s.m_bias.assign(d_out, 0.0);
  s.v_bias.assign(d_out, 0.0);
  return s;
}

Vector mean_pool(const EmbeddingMatrix& token_vectors, std::span<const int> mask) {
  if (token_vectors.rows() != mask.size()) throw ValidationError("mean_pool: mask length does not match token count");
  Vector out(token_vectors.dim(), 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    ++count;
    const auto r = token_vectors.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += r[j];
  }
  if (count == 0) throw ValidationError("mean_pool: mask selects no tokens");
  for (double& x : out) x /= static_cast<double>(count);
  return out;
}

InfoNceResult info_nce(const EmbeddingMatrix& anchors, const EmbeddingMatrix& positives, double tau) {
  if (anchors.rows() != positives.rows() || anchors.dim() != positives.dim()) {
    throw ValidationError("info_nce: anchor and positive batches differ in shape");
  }
  if (anchors.rows() == 0) throw ValidationError("info_nce: empty batch");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("info_nce: temperature must be positive and finite");
  if (!anchors.all_finite() || !positives.all_finite()) throw ValidationError("info_nce: non-finite inputs");

  const std::size_t n = anchors.rows();
  const std::size_t d = anchors.dim();
  std::vector<double> anorm(n), pnorm(n);
  for (std::size_t i = 0; i < n; ++i) {
    anorm[i] = l2_norm(anchors.row(i));
    pnorm[i] = l2_norm(positives.row(i));
    if (anorm[i] == 0.0 || pnorm[i] == 0.0) throw ValidationError("info_nce: zero vector (cosine undefined)");
  }

  // sim[i][j] = cos(z_i, z_j+)
  std::vector<double> sim(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sim[i * n + j] = dot(anchors.row(i), positives.row(j)) / (anorm[i] * pnorm[j]);
  }

  InfoNceResult r;
  r.grad_anchors = EmbeddingMatrix(n, d);
  r.grad_positives = EmbeddingMatrix(n, d);
  // coef[i][j] = dL/dlogit_ij = (softmax_ij - [i == j]) / n
  std::vector<double> coef(n * n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = sim.data() + i * n;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) max_logit = std::max(max_logit, row[j] / tau);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(row[j] / tau - max_logit);
    const double log_z = max_logit + std::log(z);
    loss += log_z - row[i] / tau;
    for (std::size_t j = 0; j < n; ++j) {
      coef[i * n + j] = (std::exp(row[j] / tau - log_z) - (i == j ? 1.0 : 0.0)) * inv_n;
    }
  }
  r.loss = loss * inv_n;

  double dlog_tau = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) dlog_tau -= coef[k] * sim[k] / tau;
  r.grad_log_tau = dlog_tau;
  r.grad_tau = dlog_tau / tau;

  // d cos(a, b) / da = b / (|a||b|) - cos * a / |a|^2
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = anchors.row(i);
    auto ga = r.grad_anchors.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double g = coef[i * n + j] / tau;
      if (g == 0.0) continue;
      const auto p = positives.row(j);
      const double s = sim[i * n + j];
      const double ca = g / (anorm[i] * pnorm[j]);
      const double sa = g * s / (anorm[i] * anorm[i]);
      const double sp = g * s / (pnorm[j] * pnorm[j]);
      auto gp = r.grad_positives.row(j);
      for (std::size_t k = 0; k < d; ++k) {
        ga[k] += ca * p[k] - sa * a[k];
        gp[k] += ca * a[k] - sp * p[k];
      }
    }
  }
  return r;
}

double lr_schedule(std::size_t step, const TrainConfig& config) {
  if (step > config.total_steps) {
    throw ValidationError("lr_schedule: step " + std::to_string(step) + " beyond total_steps " +
                          std::to_string(config.total_steps));
  }
  const auto t = static_cast<double>(step);
  const auto warmup = static_cast<double>(config.warmup_steps);
  if (step <= config.warmup_steps) return config.peak_lr * t / warmup;
  const double progress = (t - warmup) / (static_cast<double>(config.total_steps) - warmup);
  return config.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void adamw_step(TrainState& state, const Gradients& grads, double lr, const TrainConfig& config) {
  if (grads.weights.size() != state.weights.size() || grads.bias.size() != state.bias.size()) {
    throw ValidationError("adamw_step: gradient shapes do not match parameters");
  }
  const auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(grads.weights) || !finite(grads.bias) || !std::isfinite(grads.log_tau)) {
    throw ValidationError("adamw_step: non-finite gradients");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  const auto update = [&](double& p, double& m, double& v, double g) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g * g;
    p -= lr * (m / c1) / (std::sqrt(v / c2) + config.eps);
  };

  const double decay = 1.0 - lr * config.weight_decay;
  for (std::size_t k = 0; k < state.weights.size(); ++k) {
    state.weights[k] *= decay;
    update(state.weights[k], state.m_weights[k], state.v_weights[k], grads.weights[k]);
  }
  for (std::size_t k = 0; k < state.bias.size(); ++k) {
    update(state.bias[k], state.m_bias[k], state.v_bias[k], grads.bias[k]);
  }
  update(state.log_tau, state.m_log_tau, state.v_log_tau, grads.log_tau);
}

// ---------------------------------------------------------------------------

SourceBatcher::SourceBatcher(const PositivePairCorpus& corpus, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), rng_(seed) {
  if (corpus.empty()) throw ValidationError("source_batcher: empty corpus");
  if (batch_size == 0) throw ValidationError("source_batcher: batch_size must be positive");
  std::map<std::string, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_source[corpus[i].source].push_back(i);
  double cum = 0.0;
  for (auto& [source, indices] : by_source) {
    sources_.push_back(source);
    cum += static_cast<double>(indices.size());
    cumulative_.push_back(cum);
    Stream s;
    s.order = std::move(indices);
    rng_.shuffle(s.order);
    streams_.push_back(std::move(s));
  }
  for (double& c : cumulative_) c /= cum;
}

Batch SourceBatcher::next() {
  const double u = rng_.uniform();
  std::size_t src = 0;
  while (src + 1 < cumulative_.size() && u >= cumulative_[src]) ++src;

  Stream& s = streams_[src];
  const std::size_t b = std::min(batch_size_, s.order.size());
  if (s.cursor + b > s.order.size()) {
    rng_.shuffle(s.order);
    s.cursor = 0;
  }
  Batch batch{sources_[src], {s.order.begin() + static_cast<std::ptrdiff_t>(s.cursor),
                              s.order.begin() + static_cast<std::ptrdiff_t>(s.cursor + b)}};
  s.cursor += b;
  return batch;
}

// ---------------------------------------------------------------------------

namespace {

EmbeddingMatrix gather(const EmbeddingMatrix& src, std::span<const std::size_t> rows) {
  EmbeddingMatrix out(rows.size(), src.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(src.row(rows[i]).begin(), src.row(rows[i]).end(), out.row(i).begin());
  }
  return out;
}

// Backpropagates dL/dY through Y = X W^T + b.
void accumulate_projection_grad(const EmbeddingMatrix& X, const EmbeddingMatrix& dY, Gradients& g) {
  const std::size_t d_in = X.dim();
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    const auto gy = dY.row(i);
    for (std::size_t r = 0; r < gy.size(); ++r) {
      if (gy[r] == 0.0) continue;
      double* gw = g.weights.data() + r * d_in;
      for (std::size_t c = 0; c < d_in; ++c) gw[c] += gy[r] * x[c];
      g.bias[r] += gy[r];
    }
  }
}

}  // namespace

double mean_info_nce(const TrainState& state, const EmbeddingMatrix& anchors, const EmbeddingMatrix& positives,
                     std::span<const std::string> sources, std::size_t batch_size) {
  std::map<std::string, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < sources.size(); ++i) by_source[sources[i]].push_back(i);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& [_, idx] : by_source) {
    for (std::size_t begin = 0; begin < idx.size(); begin += batch_size) {
      const std::size_t len = std::min(batch_size, idx.size() - begin);
      const std::span<const std::size_t> rows(idx.data() + begin, len);
      const auto r = info_nce(state.project(gather(anchors, rows)), state.project(gather(positives, rows)), state.tau());
      total += r.loss * static_cast<double>(len);
      count += len;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

TrainResult train_head(EmbeddingProvider& base, const PositivePairCorpus& corpus, const TrainConfig& config) {
  validate(config);
  if (corpus.empty()) throw ValidationError("train_head: empty corpus");
  const std::size_t d_in = base.dim();
  if (config.d_in != 0 && config.d_in != d_in) {
    throw ValidationError("train_head: config d_in " + std::to_string(config.d_in) + " but base provider dimension is " +
                          std::to_string(d_in));
  }
  const std::size_t d_out = config.d_out == 0 ? d_in : config.d_out;

  // Each distinct text is embedded exactly once.
  std::vector<std::string> unique;
  std::unordered_map<std::string, std::size_t> row_of;
  auto intern = [&](const std::string& t) {
    const auto [it, inserted] = row_of.try_emplace(t, unique.size());
    if (inserted) unique.push_back(t);
    return it->second;
  };
  std::vector<std::size_t> anchor_row(corpus.size()), positive_row(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    anchor_row[i] = intern(corpus[i].anchor);
    positive_row[i] = intern(corpus[i].positive);
  }
  const EmbeddingMatrix base_vectors = base.embed(unique);
  const EmbeddingMatrix anchors = gather(base_vectors, anchor_row);
  const EmbeddingMatrix positives = gather(base_vectors, positive_row);

  // Seeded held-out split.
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(splitmix64(config.seed ^ 0x68656c646f7574ULL));
  split_rng.shuffle(order);
  auto n_heldout = static_cast<std::size_t>(std::floor(config.heldout_fraction * static_cast<double>(corpus.size())));
  n_heldout = std::min(n_heldout, corpus.size() - 1);
  std::vector<std::size_t> heldout(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_heldout));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_heldout), order.end());
  std::sort(heldout.begin(), heldout.end());
  std::sort(train.begin(), train.end());

  PositivePairCorpus train_corpus;
  train_corpus.reserve(train.size());
  for (std::size_t i : train) train_corpus.push_back(corpus[i]);
  const EmbeddingMatrix heldout_anchors = gather(anchors, heldout);
  const EmbeddingMatrix heldout_positives = gather(positives, heldout);
  std::vector<std::string> heldout_sources;
  for (std::size_t i : heldout) heldout_sources.push_back(corpus[i].source);

  TrainResult result;
  result.state = init_state(d_in, d_out, config.tau_init);
  result.train_pairs = train.size();
  result.heldout_pairs = heldout.size();
  SourceBatcher batcher(train_corpus, config.batch_size, config.seed);

  for (std::size_t t = 1; t <= config.total_steps; ++t) {
    const Batch batch = batcher.next();
    std::vector<std::size_t> rows;
    rows.reserve(batch.indices.size());
    for (std::size_t i : batch.indices) rows.push_back(train[i]);
    const EmbeddingMatrix xa = gather(anchors, rows);
    const EmbeddingMatrix xp = gather(positives, rows);

    TrainState& s = result.state;
    const auto nce = info_nce(s.project(xa), s.project(xp), s.tau());
    if (!std::isfinite(nce.loss)) {
      throw TaskError("train_head: non-finite loss at step " + std::to_string(t) + " (tau = " +
                      std::to_string(s.tau()) + ", source " + batch.source + ")");
    }
    Gradients g{std::vector<double>(s.weights.size(), 0.0), std::vector<double>(s.bias.size(), 0.0),
                nce.grad_log_tau};
    accumulate_projection_grad(xa, nce.grad_anchors, g);
    accumulate_projection_grad(xp, nce.grad_positives, g);

    const double lr = lr_schedule(t, config);
    adamw_step(s, g, lr, config);

    LossLogRow row{t, lr, nce.loss, std::nullopt};
    if (!heldout.empty() && (t % config.heldout_every == 0 || t == config.total_steps)) {
      row.heldout_loss = mean_info_nce(s, heldout_anchors, heldout_positives, heldout_sources, config.batch_size);
    }
    result.log.push_back(row);
  }
  return result;
}

void write_loss_csv(const std::vector<LossLogRow>& log, const fs::path& csv) {
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw Error("cannot write " + csv.string());
  out.precision(17);
  out << "step,lr,train_loss,heldout_loss\n";
  for (const auto& r : log) {
    out << r.step << ',' << r.lr << ',' << r.train_loss << ',';
    if (r.heldout_loss) out << *r.heldout_loss;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'M', 'E', 'D', 'T', 'E', 'H', 'D', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

class LeWriter {
 public:
  explicit LeWriter(std::ofstream& out) : out_(out) {}
  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  void bytes(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xffU));
  }
  std::ofstream& out_;
};

class LeReader {
 public:
  LeReader(std::ifstream& in, fs::path path) : in_(in), path_(std::move(path)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  std::uint64_t bytes(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw ValidationError(path_.string() + ": truncated checkpoint");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  std::ifstream& in_;
  fs::path path_;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  const TrainState& s = ckpt.state;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  LeWriter w(out);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(s.d_in));
  w.u32(static_cast<std::uint32_t>(s.d_out));
  w.u64(s.step);
  w.f64(s.log_tau);
  w.u64(ckpt.config.batch_size);
  w.u64(ckpt.config.total_steps);
  w.u64(ckpt.config.warmup_steps);
  w.f64(ckpt.config.peak_lr);
  w.f64(ckpt.config.weight_decay);
  w.f64(ckpt.config.tau_init);
  w.u64(ckpt.config.seed);
  for (double x : s.weights) w.f64(x);
  for (double x : s.bias) w.f64(x);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw ValidationError(path.string() + ": not a projection-head checkpoint (bad magic)");
  }
  LeReader r(in, path);
  if (const auto version = r.u32(); version != kCheckpointVersion) {
    throw ValidationError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  const std::size_t d_in = r.u32();
  const std::size_t d_out = r.u32();
  const std::uint64_t step = r.u64();
  const double log_tau = r.f64();
  c.config.batch_size = r.u64();
  c.config.total_steps = r.u64();
  c.config.warmup_steps = r.u64();
  c.config.peak_lr = r.f64();
  c.config.weight_decay = r.f64();
  c.config.tau_init = r.f64();
  c.config.seed = r.u64();
  c.config.d_in = d_in;
  c.config.d_out = d_out;
  c.state = init_state(d_in, d_out, 1.0);
  c.state.step = step;
  c.state.log_tau = log_tau;
  for (double& x : c.state.weights) x = r.f64();
  for (double& x : c.state.bias) x = r.f64();
  if (in.peek() != std::char_traits<char>::eof()) throw ValidationError(path.string() + ": trailing bytes in checkpoint");
  return c;
}

// ---------------------------------------------------------------------------

ProjectedProvider::ProjectedProvider(std::shared_ptr<EmbeddingProvider> base, TrainState state)
    : base_(std::move(base)), state_(std::move(state)) {}

std::string ProjectedProvider::name() const { return base_->name() + "+head"; }

EmbeddingMatrix ProjectedProvider::embed_texts(std::span<const std::string> texts) {
  return state_.project(base_->embed(texts));
}

}  // namespace medteb
