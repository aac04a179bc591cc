#include "medteb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "medteb/error.hpp"

namespace medteb {

std::string_view to_string(PairMetric m) {
  switch (m) {
    case PairMetric::cosine: return "cosine";
    case PairMetric::euclidean: return "euclidean";
    case PairMetric::manhattan: return "manhattan";
    case PairMetric::dot: return "dot";
  }
  return "?";
}

PairMetric parse_pair_metric(std::string_view s) {
  for (PairMetric m : kAllPairMetrics) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown pair metric '" + std::string(s) + "'");
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double pair_score(std::span<const double> u, std::span<const double> v, PairMetric metric) {
  if (u.size() != v.size()) {
    throw ValidationError("pair_score: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  }
  switch (metric) {
    case PairMetric::cosine: {
      const double nu = l2_norm(u);
      const double nv = l2_norm(v);
      if (nu == 0.0 || nv == 0.0) throw ValidationError("pair_score: cosine of a zero vector is undefined");
      return dot(u, v) / (nu * nv);
    }
    case PairMetric::euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
      return std::sqrt(s);
    }
    case PairMetric::manhattan: {
      double s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(u[i] - v[i]);
      return s;
    }
    case PairMetric::dot: return dot(u, v);
  }
  throw ValidationError("pair_score: unknown metric");
}

Vector l2_normalize(std::span<const double> v) {
  const double n = l2_norm(v);
  if (n == 0.0) throw ValidationError("l2_normalize: zero vector");
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

void l2_normalize_rows(EmbeddingMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const double n = l2_norm(r);
    if (n == 0.0) throw ValidationError("l2_normalize: zero vector in row " + std::to_string(i));
    for (double& x : r) x /= n;
  }
}

namespace {

template <typename Label>
std::vector<int> encode(std::span<const Label> labels, std::map<Label, int>& codes) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto [it, inserted] = codes.try_emplace(l, static_cast<int>(codes.size()));
    out.push_back(it->second);
  }
  return out;
}

void check_lengths(std::size_t a, std::size_t b, const char* fn) {
  if (a != b) {
    throw ValidationError(std::string(fn) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw ValidationError(std::string(fn) + ": empty input");
}

double f1_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  const std::int64_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double entropy(const std::vector<std::int64_t>& counts, double n) {
  double h = 0.0;
  for (const auto c : counts) {
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace

double macro_f1(std::span<const int> predicted, std::span<const int> gold) {
  check_lengths(predicted.size(), gold.size(), "macro_f1");
  std::map<int, std::int64_t> tp, fp, fn;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    fn[gold[i]];  // register gold class
    if (predicted[i] == gold[i]) {
      ++tp[gold[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[gold[i]];
    }
  }
  double sum = 0.0;
  for (const auto& [cls, _] : fn) {
    // F1 = 2PR/(P+R) simplifies to 2TP/(2TP+FP+FN).
    sum += f1_from_counts(tp[cls], fp[cls], fn[cls]);
  }
  return sum / static_cast<double>(fn.size());
}

double macro_f1(std::span<const std::string> predicted, std::span<const std::string> gold) {
  check_lengths(predicted.size(), gold.size(), "macro_f1");
  std::map<std::string, int> codes;
  const auto g = encode(gold, codes);
  const auto p = encode(predicted, codes);
  return macro_f1(std::span<const int>(p), std::span<const int>(g));
}

double binary_f1(std::span<const int> predicted, std::span<const int> gold) {
  check_lengths(predicted.size(), gold.size(), "binary_f1");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] == 1 && gold[i] == 1) ++tp;
    else if (predicted[i] == 1) ++fp;
    else if (gold[i] == 1) ++fn;
  }
  return f1_from_counts(tp, fp, fn);
}

VMeasure v_measure_parts(std::span<const int> assignments, std::span<const int> gold) {
  check_lengths(assignments.size(), gold.size(), "v_measure");
  std::map<int, int> cluster_index, class_index;
  for (int k : assignments) cluster_index.try_emplace(k, static_cast<int>(cluster_index.size()));
  for (int c : gold) class_index.try_emplace(c, static_cast<int>(class_index.size()));
  const std::size_t nk = cluster_index.size();
  const std::size_t nc = class_index.size();

  std::vector<std::int64_t> table(nc * nk, 0), class_totals(nc, 0), cluster_totals(nk, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto c = static_cast<std::size_t>(class_index[gold[i]]);
    const auto k = static_cast<std::size_t>(cluster_index[assignments[i]]);
    ++table[c * nk + k];
    ++class_totals[c];
    ++cluster_totals[k];
  }
  const double n = static_cast<double>(gold.size());
  const double h_c = entropy(class_totals, n);
  const double h_k = entropy(cluster_totals, n);

  // Conditional entropies H(C|K) and H(K|C) from the joint counts.
  double h_c_given_k = 0.0;
  double h_k_given_c = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t k = 0; k < nk; ++k) {
      const auto nck = table[c * nk + k];
      if (nck == 0) continue;
      const double joint = static_cast<double>(nck) / n;
      h_c_given_k -= joint * std::log(static_cast<double>(nck) / static_cast<double>(cluster_totals[k]));
      h_k_given_c -= joint * std::log(static_cast<double>(nck) / static_cast<double>(class_totals[c]));
    }
  }

  VMeasure out;
  out.homogeneity = h_c == 0.0 ? 1.0 : 1.0 - h_c_given_k / h_c;
  out.completeness = h_k == 0.0 ? 1.0 : 1.0 - h_k_given_c / h_k;
  const double denom = out.homogeneity + out.completeness;
  out.v = denom == 0.0 ? 0.0 : 2.0 * out.homogeneity * out.completeness / denom;
  return out;
}

double v_measure(std::span<const int> assignments, std::span<const int> gold) {
  return v_measure_parts(assignments, gold).v;
}

double v_measure(std::span<const int> assignments, std::span<const std::string> gold) {
  check_lengths(assignments.size(), gold.size(), "v_measure");
  std::map<std::string, int> codes;
  const auto g = encode(gold, codes);
  return v_measure(assignments, std::span<const int>(g));
}

double ndcg_at_k(std::span<const std::string> ranked_doc_ids,
                 const std::unordered_map<std::string, std::int64_t>& relevant, std::size_t k) {
  if (k == 0) throw ValidationError("ndcg_at_k: k must be positive");
  std::size_t num_relevant = 0;
  for (const auto& [_, score] : relevant) {
    if (score > 0) ++num_relevant;
  }
  if (num_relevant == 0) throw ValidationError("ndcg_at_k: query has no relevant documents");

  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranked_doc_ids.size());
  for (std::size_t i = 0; i < depth; ++i) {
    const auto it = relevant.find(ranked_doc_ids[i]);
    if (it != relevant.end() && it->second > 0) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, num_relevant); ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

}  // namespace medteb
