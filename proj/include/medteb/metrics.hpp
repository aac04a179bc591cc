#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "medteb/matrix.hpp"

namespace medteb {

enum class PairMetric { cosine, euclidean, manhattan, dot };

inline constexpr PairMetric kAllPairMetrics[] = {PairMetric::cosine, PairMetric::euclidean, PairMetric::manhattan,
                                                 PairMetric::dot};

// Cosine and dot grow with similarity; the two distances shrink.
constexpr bool higher_is_similar(PairMetric m) { return m == PairMetric::cosine || m == PairMetric::dot; }

std::string_view to_string(PairMetric m);
PairMetric parse_pair_metric(std::string_view s);

double dot(std::span<const double> u, std::span<const double> v);
double l2_norm(std::span<const double> v);

// Throws ValidationError on a dimension mismatch or a zero vector under cosine.
double pair_score(std::span<const double> u, std::span<const double> v, PairMetric metric);

Vector l2_normalize(std::span<const double> v);
// Normalizes every row in place.
void l2_normalize_rows(EmbeddingMatrix& m);

// Mean over gold classes of per-class F1. Classes predicted but absent from
// gold are ignored; a class with P + R = 0 contributes 0.
double macro_f1(std::span<const std::string> predicted, std::span<const std::string> gold);
double macro_f1(std::span<const int> predicted, std::span<const int> gold);

// F1 of the positive class (label 1) for binary predictions; 0 when undefined.
double binary_f1(std::span<const int> predicted, std::span<const int> gold);

struct VMeasure {
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v = 0.0;
};

VMeasure v_measure_parts(std::span<const int> assignments, std::span<const int> gold);
double v_measure(std::span<const int> assignments, std::span<const int> gold);
double v_measure(std::span<const int> assignments, std::span<const std::string> gold);

// Binary-gain nDCG@k: a document is relevant when its qrels score is > 0.
// `relevant` maps document id to qrels score. Throws when no document is relevant.
double ndcg_at_k(std::span<const std::string> ranked_doc_ids,
                 const std::unordered_map<std::string, std::int64_t>& relevant, std::size_t k);

}  // namespace medteb
