#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "medteb/matrix.hpp"

namespace medteb {

struct LogRegConfig {
  double l2_strength = 1.0;
  int max_iters = 200;
  double grad_tol = 1e-5;
};

// Multinomial logistic regression. `weights` is C x d row-major.
struct LogRegModel {
  std::vector<std::string> class_names;  // first-appearance order in the training labels
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  int iterations = 0;
  double objective = 0.0;

  std::size_t num_classes() const { return class_names.size(); }
};

// Sum of softmax cross-entropy over rows plus (l2/2)*||W||^2; bias is not
// penalized. `gradient` (if non-null) receives dW followed by db.
double logreg_objective(const EmbeddingMatrix& X, std::span<const int> y, std::size_t num_classes,
                        std::span<const double> weights, std::span<const double> bias, double l2,
                        std::vector<double>* gradient = nullptr);

// Full-batch gradient descent with Armijo backtracking from zero parameters.
LogRegModel fit_logreg(const EmbeddingMatrix& X, std::span<const std::string> labels, const LogRegConfig& config = {});

// Argmax class index per row; ties go to the lowest index.
std::vector<int> logreg_predict_index(const LogRegModel& model, const EmbeddingMatrix& X);
std::vector<std::string> logreg_predict(const LogRegModel& model, const EmbeddingMatrix& X);

struct KMeansResult {
  EmbeddingMatrix centroids;  // k x d
  std::vector<int> assignments;
};

// k-means++ seeding followed by `iters` mini-batch updates (sampling with
// replacement, per-centroid learning rate 1/count). Final assignments are the
// nearest centroid over all points; empty clusters are re-seeded to the point
// farthest from its centroid. Deterministic given (X, seed).
KMeansResult minibatch_kmeans(const EmbeddingMatrix& X, std::size_t k, std::size_t batch_size, std::size_t iters,
                              std::uint64_t seed);

// Same update loop starting from caller-provided centroids.
KMeansResult minibatch_kmeans_from(const EmbeddingMatrix& X, EmbeddingMatrix initial_centroids, std::size_t batch_size,
                                   std::size_t iters, std::uint64_t seed);

EmbeddingMatrix kmeans_plus_plus(const EmbeddingMatrix& X, std::size_t k, std::uint64_t seed);

// Nearest centroid by squared Euclidean distance, lowest index on ties.
std::size_t nearest_centroid(std::span<const double> x, const EmbeddingMatrix& centroids, double* sq_dist = nullptr);

}  // namespace medteb
