#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fairprobe/core.hpp"
#include "fairprobe/linalg.hpp"

namespace fairprobe {

/// I x D matrix of encoder outputs keyed by image id.
struct EmbeddingSet {
  std::vector<std::string> image_ids;
  Matrix matrix;  // rows = images, cols = embedding dimension

  std::size_t count() const { return matrix.rows(); }
  std::size_t dim() const { return matrix.cols(); }

  // Rejects non-finite entries, duplicate ids, and empty sets.
  void validate() const;
};

enum class HeadKind { Linear, Rbf };

struct SvmMachine {
  // Linear: weights over the D input features. Rbf: dual coefficients over
  // the stored support rows.
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> objective_history;
  bool converged = true;
};

/// One-vs-rest squared-hinge SVM head, L2-regularized.
struct SvmHead {
  HeadKind kind = HeadKind::Linear;
  double gamma = 0.0;            // rbf only
  double regularization = 1.0;
  std::vector<double> class_weights;
  std::size_t dim = 0;
  std::vector<SvmMachine> machines;  // one per segment

  // Rbf: training rows acting as the kernel expansion basis.
  Matrix support;
  std::vector<std::size_t> support_indices;

  std::vector<double> decision_values(const double* x) const;
};

struct TrainOptions {
  double objective_tol = 1e-6;
  std::size_t max_iterations = 10000;
  std::size_t rbf_sample_cap = 50000;
};

// gamma = 1 / (D * Var(X)) with the pooled variance over all I*D entries.
double rbf_gamma(const EmbeddingSet& x);

// Binary case: 0.5 / freq. K > 2 generalizes to (1/K) / freq.
std::vector<double> balanced_class_weights(const std::vector<std::size_t>& labels,
                                           std::size_t k);

SvmHead train_head(const EmbeddingSet& x, const std::vector<std::size_t>& labels,
                   std::size_t k, HeadKind kind,
                   const std::vector<double>* class_weights = nullptr,
                   double regularization = 1.0,
                   const TrainOptions& options = {});

struct PredictResult {
  SampleTable table;
  std::size_t tie_count = 0;
};

PredictResult predict(const SvmHead& head, const EmbeddingSet& x);

// Majority label among the k nearest references (Euclidean). Ties on the
// majority count break toward the lowest segment index.
PredictResult knn_label(const EmbeddingSet& query, const EmbeddingSet& reference,
                        const std::vector<std::size_t>& reference_labels,
                        std::size_t k, std::size_t num_segments);

}  // namespace fairprobe
