#include "medteb/evaluators.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>

#include "medteb/error.hpp"

namespace medteb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

EmbeddingCache::EmbeddingCache(EmbeddingProvider& provider, std::span<const std::string> texts) {
  std::vector<std::string> unique;
  for (const auto& t : texts) {
    if (index_.try_emplace(t, unique.size()).second) unique.push_back(t);
  }
  if (!unique.empty()) matrix_ = provider.embed(unique);
}

std::span<const double> EmbeddingCache::row(const std::string& text) const {
  const auto it = index_.find(text);
  if (it == index_.end()) throw Error("embedding cache: text was not registered");
  return matrix_.row(it->second);
}

EmbeddingMatrix EmbeddingCache::rows(std::span<const std::string> texts) const {
  EmbeddingMatrix out(texts.size(), matrix_.dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto r = row(texts[i]);
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------

ThresholdFit best_threshold_f1(std::span<const double> scores, std::span<const int> labels, PairMetric metric) {
  if (scores.size() != labels.size()) throw ValidationError("best_threshold_f1: scores and labels differ in length");
  std::size_t positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("best_threshold_f1: labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  if (positives == 0 || positives == labels.size()) {
    throw ValidationError("best_threshold_f1: training labels must contain both classes");
  }

  std::vector<double> distinct(scores.begin(), scores.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates;
  candidates.reserve(distinct.size() + 1);
  const double span = std::max(1.0, distinct.back() - distinct.front());
  candidates.push_back(distinct.front() - span);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  candidates.push_back(distinct.back() + span);

  // Sweep candidates in ascending order over the sorted scores.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  const auto total_pos = static_cast<std::int64_t>(positives);
  const auto total = static_cast<std::int64_t>(scores.size());
  // Counts of scores strictly below / at-or-below the current candidate.
  std::int64_t pos_lt = 0, count_lt = 0, pos_le = 0, count_le = 0;
  std::size_t lt = 0, le = 0;

  ThresholdFit best{{metric, candidates.front()}, -1.0};
  for (const double thr : candidates) {
    while (lt < order.size() && scores[order[lt]] < thr) {
      pos_lt += labels[order[lt]];
      ++count_lt;
      ++lt;
    }
    while (le < order.size() && scores[order[le]] <= thr) {
      pos_le += labels[order[le]];
      ++count_le;
      ++le;
    }
    std::int64_t tp = 0, predicted = 0;
    if (higher_is_similar(metric)) {
      tp = total_pos - pos_le;
      predicted = total - count_le;
    } else {
      tp = pos_lt;
      predicted = count_lt;
    }
    const std::int64_t fp = predicted - tp;
    const std::int64_t fn = total_pos - tp;
    const std::int64_t denom = 2 * tp + fp + fn;
    const double f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    if (f1 > best.train_f1) best = {{metric, thr}, f1};
  }
  return best;
}

// ---------------------------------------------------------------------------

TaskScore eval_classification(EmbeddingProvider& provider, const LabeledTextDataset& dataset,
                              const EvalOptions& options) {
  const auto start = Clock::now();
  const auto train = split_view(dataset, Split::train);
  const auto test = split_view(dataset, Split::test);
  if (train.items.empty()) throw ValidationError("classification: empty train split");
  if (test.items.empty()) throw ValidationError("classification: empty test split");

  std::vector<std::string> train_texts, train_labels, test_texts, test_labels;
  for (const auto& it : train.items) {
    train_texts.push_back(it.text);
    train_labels.push_back(it.label);
  }
  const std::set<std::string> known(train_labels.begin(), train_labels.end());
  if (known.size() < 2) throw ValidationError("classification: train split has a single class");
  for (const auto& it : test.items) {
    if (!known.contains(it.label)) {
      throw ValidationError("classification: test label \"" + it.label + "\" does not occur in the train split");
    }
    test_texts.push_back(it.text);
    test_labels.push_back(it.label);
  }

  std::vector<std::string> all(train_texts);
  all.insert(all.end(), test_texts.begin(), test_texts.end());
  const EmbeddingCache cache(provider, all);

  const LogRegModel model = fit_logreg(cache.rows(train_texts), train_labels, options.logreg);
  const auto predicted = logreg_predict(model, cache.rows(test_texts));

  TaskScore s;
  s.category = Category::classification;
  s.source = dataset.source;
  s.score = macro_f1(predicted, test_labels);
  s.eval_seconds = seconds_since(start);
  return s;
}

TaskScore eval_clustering(EmbeddingProvider& provider, const LabeledTextDataset& dataset, std::uint64_t seed,
                          const EvalOptions& options) {
  const auto start = Clock::now();
  std::vector<std::string> texts, labels;
  for (const auto& it : dataset.items) {
    texts.push_back(it.text);
    labels.push_back(it.label);
  }
  const std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ValidationError("clustering: needs at least 2 distinct labels");
  if (texts.size() < distinct.size()) throw ValidationError("clustering: fewer points than labels");

  const EmbeddingCache cache(provider, texts);
  const auto result =
      minibatch_kmeans(cache.rows(texts), distinct.size(), options.kmeans_batch_size, options.kmeans_iters, seed);

  TaskScore s;
  s.category = Category::clustering;
  s.source = dataset.source;
  s.score = v_measure(result.assignments, labels);
  s.eval_seconds = seconds_since(start);
  return s;
}

TaskScore eval_pair_classification(EmbeddingProvider& provider, const PairDataset& dataset) {
  const auto start = Clock::now();
  const auto train = split_view(dataset, Split::train);
  const auto test = split_view(dataset, Split::test);
  if (test.items.empty()) throw ValidationError("pair classification: empty test split");
  const auto train_pos = std::count_if(train.items.begin(), train.items.end(), [](const auto& p) { return p.label == 1; });
  if (train_pos == 0 || train_pos == static_cast<std::ptrdiff_t>(train.items.size())) {
    throw ValidationError("pair classification: train split must contain both labels");
  }

  std::vector<std::string> texts;
  for (const auto* part : {&train, &test}) {
    for (const auto& p : part->items) {
      texts.push_back(p.sent1);
      texts.push_back(p.sent2);
    }
  }
  const EmbeddingCache cache(provider, texts);

  auto scores_of = [&](const PairDataset& d, PairMetric m) {
    std::vector<double> out;
    out.reserve(d.items.size());
    for (const auto& p : d.items) out.push_back(pair_score(cache.row(p.sent1), cache.row(p.sent2), m));
    return out;
  };
  std::vector<int> train_labels, test_labels;
  for (const auto& p : train.items) train_labels.push_back(p.label);
  for (const auto& p : test.items) test_labels.push_back(p.label);

  TaskScore s;
  s.category = Category::pair_classification;
  s.source = dataset.source;
  s.score = -1.0;
  PairDetails details;
  for (const PairMetric m : kAllPairMetrics) {
    const ThresholdFit fit = best_threshold_f1(scores_of(train, m), train_labels, m);
    const auto test_scores = scores_of(test, m);
    std::vector<int> predicted;
    predicted.reserve(test_scores.size());
    for (double x : test_scores) predicted.push_back(fit.rule.predict(x));
    const double f1 = binary_f1(predicted, test_labels);
    details.test_f1[m] = f1;
    if (f1 > s.score) {
      s.score = f1;
      details.metric = m;
      details.threshold = fit.rule.threshold;
    }
  }
  s.details = details;
  s.eval_seconds = seconds_since(start);
  return s;
}

std::vector<std::size_t> rank_documents(std::span<const double> query, const EmbeddingMatrix& docs,
                                        std::span<const std::string> doc_ids, std::size_t k) {
  std::vector<double> scores(docs.rows());
  for (std::size_t j = 0; j < docs.rows(); ++j) scores[j] = dot(query, docs.row(j));
  std::vector<std::size_t> order(docs.rows());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t depth = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(depth), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return doc_ids[a] < doc_ids[b];
                    });
  order.resize(depth);
  return order;
}

TaskScore eval_retrieval(EmbeddingProvider& provider, const RetrievalDataset& dataset, const EvalOptions& options) {
  const auto start = Clock::now();
  if (dataset.corpus.empty() || dataset.queries.empty()) throw ValidationError("retrieval: empty corpus or query set");

  std::unordered_map<std::string, std::unordered_map<std::string, std::int64_t>> relevant;
  for (const auto& q : dataset.qrels) relevant[q.qid][q.did] = q.score;
  for (const auto& q : dataset.queries) {
    const auto it = relevant.find(q.id);
    const bool any = it != relevant.end() &&
                     std::any_of(it->second.begin(), it->second.end(), [](const auto& kv) { return kv.second > 0; });
    if (!any) throw ValidationError("retrieval: query \"" + q.id + "\" has no relevant documents");
  }

  std::vector<std::string> texts, doc_texts, doc_ids, query_texts;
  for (const auto& d : dataset.corpus) {
    doc_texts.push_back(d.text);
    doc_ids.push_back(d.id);
  }
  for (const auto& q : dataset.queries) query_texts.push_back(q.text);
  texts = doc_texts;
  texts.insert(texts.end(), query_texts.begin(), query_texts.end());
  const EmbeddingCache cache(provider, texts);

  EmbeddingMatrix docs = cache.rows(doc_texts);
  EmbeddingMatrix queries = cache.rows(query_texts);
  l2_normalize_rows(docs);
  l2_normalize_rows(queries);

  double total = 0.0;
  std::vector<std::string> ranked;
  for (std::size_t qi = 0; qi < dataset.queries.size(); ++qi) {
    const auto top = rank_documents(queries.row(qi), docs, doc_ids, options.ndcg_k);
    ranked.clear();
    for (std::size_t j : top) ranked.push_back(doc_ids[j]);
    total += ndcg_at_k(ranked, relevant.at(dataset.queries[qi].id), options.ndcg_k);
  }

  TaskScore s;
  s.category = Category::retrieval;
  s.source = dataset.source;
  s.score = total / static_cast<double>(dataset.queries.size());
  s.eval_seconds = seconds_since(start);
  return s;
}

TaskScore evaluate_task(EmbeddingProvider& provider, const TaskManifest& task, const TaskDataset& dataset,
                        std::uint64_t seed, const EvalOptions& options) {
  TaskScore s;
  switch (task.category) {
    case Category::classification:
      s = eval_classification(provider, std::get<LabeledTextDataset>(dataset), options);
      break;
    case Category::clustering:
      s = eval_clustering(provider, std::get<LabeledTextDataset>(dataset), seed, options);
      break;
    case Category::pair_classification:
      s = eval_pair_classification(provider, std::get<PairDataset>(dataset));
      break;
    case Category::retrieval: s = eval_retrieval(provider, std::get<RetrievalDataset>(dataset), options); break;
  }
  s.task_id = task.task_id;
  s.source = task.source;
  return s;
}

}  // namespace medteb
