// Independent reference implementations used by the unit and acceptance tests.
// They favour the most literal formulation over speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "medteb/matrix.hpp"
#include "medteb/metrics.hpp"

namespace oracle {

using medteb::EmbeddingMatrix;
using medteb::PairMetric;

// Full confusion matrix, then per gold class F1 = 2PR/(P+R).
inline double macro_f1(const std::vector<int>& pred, const std::vector<int>& gold) {
  std::set<int> classes(gold.begin(), gold.end());
  std::set<int> all = classes;
  all.insert(pred.begin(), pred.end());
  std::map<std::pair<int, int>, int> cm;  // (gold, pred)
  for (std::size_t i = 0; i < gold.size(); ++i) ++cm[{gold[i], pred[i]}];
  double sum = 0.0;
  for (int c : classes) {
    double tp = cm[{c, c}], col = 0.0, row = 0.0;
    for (int o : all) {
      col += cm[{o, c}];
      row += cm[{c, o}];
    }
    const double p = col > 0 ? tp / col : 0.0;
    const double r = row > 0 ? tp / row : 0.0;
    sum += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

// V = 2 I(C;K) / (H(C) + H(K)), with the degenerate cases spelled out.
inline double v_measure(const std::vector<int>& clusters, const std::vector<int>& gold) {
  const double n = static_cast<double>(gold.size());
  std::map<int, double> pc, pk;
  std::map<std::pair<int, int>, double> pj;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    pc[gold[i]] += 1.0 / n;
    pk[clusters[i]] += 1.0 / n;
    pj[{gold[i], clusters[i]}] += 1.0 / n;
  }
  auto entropy = [](const std::map<int, double>& p) {
    double h = 0.0;
    for (const auto& [_, v] : p) h -= v * std::log(v);
    return h;
  };
  const double hc = entropy(pc), hk = entropy(pk);
  double mi = 0.0;
  for (const auto& [ck, v] : pj) mi += v * std::log(v / (pc[ck.first] * pk[ck.second]));
  const double h = hc == 0.0 ? 1.0 : mi / hc;
  const double c = hk == 0.0 ? 1.0 : mi / hk;
  if (h + c == 0.0) return 0.0;
  return 2 * h * c / (h + c);
}

// DCG over the first k ranks, ideal DCG from the sorted gain vector.
inline double ndcg(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t k) {
  std::vector<double> gains;
  for (std::size_t r = 0; r < ranked.size(); ++r) gains.push_back(relevant.count(ranked[r]) ? 1.0 : 0.0);
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, gains.size()); ++r) dcg += gains[r] / std::log2(static_cast<double>(r) + 2.0);
  std::vector<double> ideal(relevant.size(), 1.0);
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) idcg += ideal[r] / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

inline double pair_score(const std::vector<double>& u, const std::vector<double>& v, PairMetric m) {
  long double uv = 0, uu = 0, vv = 0, l1 = 0, l2 = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += static_cast<long double>(u[i]) * v[i];
    uu += static_cast<long double>(u[i]) * u[i];
    vv += static_cast<long double>(v[i]) * v[i];
    l1 += std::fabs(static_cast<long double>(u[i]) - v[i]);
    l2 += (static_cast<long double>(u[i]) - v[i]) * (static_cast<long double>(u[i]) - v[i]);
  }
  switch (m) {
    case PairMetric::cosine: return static_cast<double>(uv / std::sqrt(uu * vv));
    case PairMetric::euclidean: return static_cast<double>(std::sqrt(l2));
    case PairMetric::manhattan: return static_cast<double>(l1);
    case PairMetric::dot: return static_cast<double>(uv);
  }
  return 0.0;
}

inline double binary_f1(const std::vector<int>& pred, const std::vector<int>& gold) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    tp += pred[i] == 1 && gold[i] == 1;
    fp += pred[i] == 1 && gold[i] == 0;
    fn += pred[i] == 0 && gold[i] == 1;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// Best train F1 over every threshold that can change a prediction: each
// distinct score, each midpoint, and one value beyond each end.
inline double best_threshold_f1(const std::vector<double>& scores, const std::vector<int>& labels, PairMetric m) {
  std::set<double> distinct(scores.begin(), scores.end());
  std::vector<double> cands(distinct.begin(), distinct.end());
  std::vector<double> all = cands;
  for (std::size_t i = 0; i + 1 < cands.size(); ++i) all.push_back(cands[i] + (cands[i + 1] - cands[i]) / 2);
  const double span = cands.back() - cands.front() + 1.0;
  all.push_back(cands.front() - span);
  all.push_back(cands.back() + span);
  const bool hi = medteb::higher_is_similar(m);
  double best = -1.0;
  for (double t : all) {
    std::vector<int> pred;
    for (double s : scores) pred.push_back(hi ? (s > t) : (s < t));
    best = std::max(best, binary_f1(pred, labels));
  }
  return best;
}

// Indices of the k most cosine-similar rows to `target`, skipping `excluded`.
inline std::set<std::size_t> knn(const EmbeddingMatrix& pool, std::size_t target, const std::set<std::size_t>& excluded,
                                 std::size_t k) {
  std::vector<std::pair<double, std::size_t>> sims;
  std::vector<double> t(pool.row(target).begin(), pool.row(target).end());
  for (std::size_t i = 0; i < pool.rows(); ++i) {
    if (i == target || excluded.count(i)) continue;
    std::vector<double> r(pool.row(i).begin(), pool.row(i).end());
    sims.emplace_back(pair_score(r, t, PairMetric::cosine), i);
  }
  std::sort(sims.begin(), sims.end(), [](auto& a, auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::set<std::size_t> out;
  for (std::size_t j = 0; j < std::min(k, sims.size()); ++j) out.insert(sims[j].second);
  return out;
}

// Norm-wise relative error between an analytic and a numeric gradient.
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(diff) / denom;
}

// Central differences of f around x.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

// Reference InfoNCE loss, no max-shift, long double accumulation.
inline double info_nce_loss(const EmbeddingMatrix& a, const EmbeddingMatrix& p, double tau) {
  const std::size_t n = a.rows();
  long double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> ai(a.row(i).begin(), a.row(i).end());
    long double denom = 0, own = 0;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> pj(p.row(j).begin(), p.row(j).end());
      const long double e = std::exp(static_cast<long double>(pair_score(ai, pj, PairMetric::cosine)) / tau);
      denom += e;
      if (i == j) own = e;
    }
    total -= std::log(own / denom);
  }
  return static_cast<double>(total / n);
}

}  // namespace oracle
