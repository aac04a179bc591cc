#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "medteb/dataset.hpp"
#include "medteb/learners.hpp"
#include "medteb/manifest.hpp"
#include "medteb/metrics.hpp"
#include "medteb/providers.hpp"

namespace medteb {

// A pair is predicted positive when its score lies on the metric's similar
// side of the threshold: score > threshold for cosine/dot, score < threshold
// for the distances.
struct ThresholdRule {
  PairMetric metric = PairMetric::cosine;
  double threshold = 0.0;

  int predict(double score) const {
    return higher_is_similar(metric) ? (score > threshold ? 1 : 0) : (score < threshold ? 1 : 0);
  }
};

struct ThresholdFit {
  ThresholdRule rule;
  double train_f1 = 0.0;
};

// Sweeps midpoints between consecutive distinct scores plus one sentinel beyond
// each extreme and keeps the F1-maximizing rule; ties go to the smaller threshold.
ThresholdFit best_threshold_f1(std::span<const double> train_scores, std::span<const int> train_labels,
                               PairMetric metric);

struct PairDetails {
  PairMetric metric = PairMetric::cosine;
  double threshold = 0.0;
  std::map<PairMetric, double> test_f1;  // every metric's test F1

  friend bool operator==(const PairDetails&, const PairDetails&) = default;
};

struct TaskScore {
  std::string task_id;
  Category category = Category::classification;
  std::string source;
  double score = 0.0;
  double eval_seconds = 0.0;
  std::optional<PairDetails> details;  // pair classification only

  friend bool operator==(const TaskScore&, const TaskScore&) = default;
};

struct EvalOptions {
  LogRegConfig logreg;
  std::size_t kmeans_batch_size = 32;
  std::size_t kmeans_iters = 100;
  std::size_t ndcg_k = 10;
};

// Embeds each distinct text of a task exactly once and serves rows by text.
class EmbeddingCache {
 public:
  EmbeddingCache(EmbeddingProvider& provider, std::span<const std::string> texts);

  std::span<const double> row(const std::string& text) const;
  EmbeddingMatrix rows(std::span<const std::string> texts) const;
  std::size_t unique_count() const { return index_.size(); }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  EmbeddingMatrix matrix_;
};

TaskScore eval_classification(EmbeddingProvider& provider, const LabeledTextDataset& dataset,
                              const EvalOptions& options = {});
TaskScore eval_clustering(EmbeddingProvider& provider, const LabeledTextDataset& dataset, std::uint64_t seed,
                          const EvalOptions& options = {});
TaskScore eval_pair_classification(EmbeddingProvider& provider, const PairDataset& dataset);
TaskScore eval_retrieval(EmbeddingProvider& provider, const RetrievalDataset& dataset, const EvalOptions& options = {});

// Top-k document indices by descending cosine, ties by ascending document id.
// Rows of `query` and `docs` must already be L2-normalized.
std::vector<std::size_t> rank_documents(std::span<const double> query, const EmbeddingMatrix& docs,
                                        std::span<const std::string> doc_ids, std::size_t k);

// Dispatches on the task category and fills in task_id/source.
TaskScore evaluate_task(EmbeddingProvider& provider, const TaskManifest& task, const TaskDataset& dataset,
                        std::uint64_t seed, const EvalOptions& options = {});

}  // namespace medteb
