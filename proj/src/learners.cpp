#include "medteb/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "medteb/error.hpp"
#include "medteb/rng.hpp"

namespace medteb {

namespace {

void require_finite(const EmbeddingMatrix& X, const char* fn) {
  if (!X.all_finite()) throw ValidationError(std::string(fn) + ": non-finite features");
}

}  // namespace

double logreg_objective(const EmbeddingMatrix& X, std::span<const int> y, std::size_t num_classes,
                        std::span<const double> weights, std::span<const double> bias, double l2,
                        std::vector<double>* gradient) {
  const std::size_t d = X.dim();
  const std::size_t C = num_classes;
  if (gradient != nullptr) gradient->assign(C * d + C, 0.0);

  double loss = 0.0;
  std::vector<double> logits(C);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) {
      double s = bias[c];
      const double* w = weights.data() + c * d;
      for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
      logits[c] = s;
      max_logit = std::max(max_logit, s);
    }
    double z = 0.0;
    for (std::size_t c = 0; c < C; ++c) z += std::exp(logits[c] - max_logit);
    const double log_z = max_logit + std::log(z);
    const auto yi = static_cast<std::size_t>(y[i]);
    loss += log_z - logits[yi];

    if (gradient != nullptr) {
      for (std::size_t c = 0; c < C; ++c) {
        const double residual = std::exp(logits[c] - log_z) - (c == yi ? 1.0 : 0.0);
        double* gw = gradient->data() + c * d;
        for (std::size_t j = 0; j < d; ++j) gw[j] += residual * x[j];
        (*gradient)[C * d + c] += residual;
      }
    }
  }

  double sq = 0.0;
  for (double w : weights) sq += w * w;
  loss += 0.5 * l2 * sq;
  if (gradient != nullptr) {
    for (std::size_t k = 0; k < C * d; ++k) (*gradient)[k] += l2 * weights[k];
  }
  return loss;
}

LogRegModel fit_logreg(const EmbeddingMatrix& X, std::span<const std::string> labels, const LogRegConfig& config) {
  if (X.rows() != labels.size()) throw ValidationError("fit_logreg: feature rows and labels differ in length");
  if (X.rows() == 0) throw ValidationError("fit_logreg: empty training set");
  require_finite(X, "fit_logreg");

  LogRegModel model;
  model.dim = X.dim();
  std::map<std::string, int> index;
  std::vector<int> y;
  y.reserve(labels.size());
  for (const auto& l : labels) {
    const auto [it, inserted] = index.try_emplace(l, static_cast<int>(model.class_names.size()));
    if (inserted) model.class_names.push_back(l);
    y.push_back(it->second);
  }
  const std::size_t C = model.class_names.size();
  if (C < 2) throw ValidationError("fit_logreg: training data has a single class");

  const std::size_t d = X.dim();
  std::vector<double> theta(C * d + C, 0.0);
  auto evaluate = [&](const std::vector<double>& p, std::vector<double>* grad) {
    return logreg_objective(X, y, C, std::span<const double>(p.data(), C * d),
                            std::span<const double>(p.data() + C * d, C), config.l2_strength, grad);
  };

  std::vector<double> grad;
  double f = evaluate(theta, &grad);
  double step = 1.0;
  std::vector<double> candidate(theta.size());
  int iter = 0;
  constexpr double kArmijo = 1e-4;
  for (; iter < config.max_iters; ++iter) {
    const double gnorm_sq = std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0);
    if (std::sqrt(gnorm_sq) <= config.grad_tol) break;

    bool accepted = false;
    double f_new = f;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t k = 0; k < theta.size(); ++k) candidate[k] = theta[k] - step * grad[k];
      f_new = evaluate(candidate, nullptr);
      if (f_new <= f - kArmijo * step * gnorm_sq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable descent step remains
    theta.swap(candidate);
    f = evaluate(theta, &grad);
    step *= 2.0;
  }

  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(C * d));
  model.bias.assign(theta.begin() + static_cast<std::ptrdiff_t>(C * d), theta.end());
  model.iterations = iter;
  model.objective = f;
  return model;
}

std::vector<int> logreg_predict_index(const LogRegModel& model, const EmbeddingMatrix& X) {
  if (X.dim() != model.dim) {
    throw ValidationError("logreg_predict: dimension mismatch (" + std::to_string(X.dim()) + " vs " +
                          std::to_string(model.dim) + ")");
  }
  const std::size_t C = model.num_classes();
  std::vector<int> out(X.rows(), 0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) {
      double s = model.bias[c];
      const double* w = model.weights.data() + c * model.dim;
      for (std::size_t j = 0; j < model.dim; ++j) s += w[j] * x[j];
      if (s > best) {
        best = s;
        out[i] = static_cast<int>(c);
      }
    }
  }
  return out;
}

std::vector<std::string> logreg_predict(const LogRegModel& model, const EmbeddingMatrix& X) {
  const auto idx = logreg_predict_index(model, X);
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (int c : idx) out.push_back(model.class_names[static_cast<std::size_t>(c)]);
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

std::vector<int> assign_all(const EmbeddingMatrix& X, const EmbeddingMatrix& centroids, std::vector<double>* dists) {
  std::vector<int> out(X.rows());
  if (dists != nullptr) dists->resize(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double d = 0.0;
    out[i] = static_cast<int>(nearest_centroid(X.row(i), centroids, &d));
    if (dists != nullptr) (*dists)[i] = d;
  }
  return out;
}

// Moves each empty centroid onto the point farthest from its current centroid,
// taken from a cluster that can spare it.
void reseed_empty(const EmbeddingMatrix& X, EmbeddingMatrix& centroids, std::vector<int>& assignments) {
  const std::size_t k = centroids.rows();
  for (std::size_t round = 0; round <= k; ++round) {
    std::vector<double> dists;
    assignments = assign_all(X, centroids, &dists);
    std::vector<std::size_t> sizes(k, 0);
    for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
    const auto empty = std::find(sizes.begin(), sizes.end(), 0U);
    if (empty == sizes.end()) return;
    const auto e = static_cast<std::size_t>(empty - sizes.begin());

    std::size_t far = X.rows();
    double far_dist = -1.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      if (sizes[static_cast<std::size_t>(assignments[i])] > 1 && dists[i] > far_dist) {
        far_dist = dists[i];
        far = i;
      }
    }
    if (far == X.rows()) return;
    std::copy(X.row(far).begin(), X.row(far).end(), centroids.row(e).begin());
    if (round == k) assignments[far] = static_cast<int>(e);
  }
}

}  // namespace

std::size_t nearest_centroid(std::span<const double> x, const EmbeddingMatrix& centroids, double* sq_dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (sq_dist != nullptr) *sq_dist = best_d;
  return best;
}

EmbeddingMatrix kmeans_plus_plus(const EmbeddingMatrix& X, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ValidationError("minibatch_kmeans: k must be positive");
  if (k > X.rows()) {
    throw ValidationError("minibatch_kmeans: k = " + std::to_string(k) + " exceeds the number of points " +
                          std::to_string(X.rows()));
  }
  require_finite(X, "minibatch_kmeans");

  Rng rng(seed);
  const std::size_t n = X.rows();
  EmbeddingMatrix centroids(k, X.dim());
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t pick = rng.index(n);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      if (total > 0.0) {
        const double r = rng.uniform() * total;
        double cum = 0.0;
        pick = n;
        std::size_t last_positive = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] <= 0.0) continue;
          last_positive = i;
          cum += d2[i];
          if (cum > r) {
            pick = i;
            break;
          }
        }
        if (pick == n) pick = last_positive;
      } else {
        // All remaining points coincide with chosen centers.
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      }
    }
    chosen[pick] = true;
    std::copy(X.row(pick).begin(), X.row(pick).end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(X.row(i), centroids.row(c)));
  }
  return centroids;
}

KMeansResult minibatch_kmeans_from(const EmbeddingMatrix& X, EmbeddingMatrix centroids, std::size_t batch_size,
                                   std::size_t iters, std::uint64_t seed) {
  if (batch_size == 0) throw ValidationError("minibatch_kmeans: batch_size must be positive");
  if (centroids.dim() != X.dim()) throw ValidationError("minibatch_kmeans: centroid dimension mismatch");
  require_finite(X, "minibatch_kmeans");

  // Separate stream from the one used for seeding.
  Rng rng(splitmix64(seed ^ 0x6d696e6962617463ULL));
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::size_t> batch(batch_size);
  std::vector<std::size_t> batch_assign(batch_size);
  for (std::size_t it = 0; it < iters; ++it) {
    for (auto& b : batch) b = rng.index(X.rows());
    for (std::size_t s = 0; s < batch_size; ++s) batch_assign[s] = nearest_centroid(X.row(batch[s]), centroids);
    for (std::size_t s = 0; s < batch_size; ++s) {
      const std::size_t c = batch_assign[s];
      ++counts[c];
      const double eta = 1.0 / static_cast<double>(counts[c]);
      auto centroid = centroids.row(c);
      const auto x = X.row(batch[s]);
      for (std::size_t j = 0; j < centroid.size(); ++j) centroid[j] = (1.0 - eta) * centroid[j] + eta * x[j];
    }
  }

  KMeansResult result;
  reseed_empty(X, centroids, result.assignments);
  result.centroids = std::move(centroids);
  return result;
}

KMeansResult minibatch_kmeans(const EmbeddingMatrix& X, std::size_t k, std::size_t batch_size, std::size_t iters,
                              std::uint64_t seed) {
  return minibatch_kmeans_from(X, kmeans_plus_plus(X, k, seed), batch_size, iters, seed);
}

}  // namespace medteb
