#include "fairprobe/probing.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fairprobe/error.hpp"

namespace fairprobe {

void EmbeddingSet::validate() const {
  if (count() == 0 || dim() == 0)
    throw Error(ErrorCode::InvalidInput, "empty embedding set");
  if (image_ids.size() != count())
    throw Error(ErrorCode::DimensionMismatch, "id count != row count");
  std::unordered_set<std::string> seen;
  for (const auto& id : image_ids)
    if (!seen.insert(id).second)
      throw Error(ErrorCode::DuplicateImageId, id);
  for (double v : matrix.data())
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteValue, "embedding matrix");
}

double rbf_gamma(const EmbeddingSet& x) {
  const std::size_t n = x.matrix.data().size();
  if (n < 2) throw Error(ErrorCode::ZeroVariance, "need at least 2 entries");
  double mean = 0.0;
  for (double v : x.matrix.data()) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x.matrix.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) throw Error(ErrorCode::ZeroVariance, "constant embedding matrix");
  return 1.0 / (static_cast<double>(x.dim()) * var);
}

std::vector<double> balanced_class_weights(const std::vector<std::size_t>& labels,
                                           std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t label : labels) {
    if (label >= k) throw Error(ErrorCode::UnknownSegment, "label out of range");
    ++counts[label];
  }
  std::vector<double> weights(k);
  const double target = 1.0 / static_cast<double>(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0)
      throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " absent");
    const double freq =
        static_cast<double>(counts[c]) / static_cast<double>(labels.size());
    weights[c] = target / freq;
  }
  return weights;
}

namespace {

double rbf_kernel(const double* a, const double* b, std::size_t d, double gamma) {
  double dist2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    dist2 += diff * diff;
  }
  return std::exp(-gamma * dist2);
}

// Weighted squared-hinge objective and gradient for one binary machine over
// an arbitrary feature map. `features` is n x dim row-major; for the linear
// head it is the raw data, for the rbf head it is the Gram matrix and the
// regularizer becomes 0.5 a^T K a.
struct BinaryProblem {
  const Matrix& features;
  const std::vector<double>& sample_weights;
  const std::vector<double>& y;  // +1 / -1
  double reg;
  bool kernelized;

  double objective(const std::vector<double>& w, double b,
                   std::vector<double>& scores) const {
    const std::size_t n = features.rows();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double f = b;
      const double* row = features.data().data() + i * features.cols();
      for (std::size_t j = 0; j < features.cols(); ++j) f += row[j] * w[j];
      scores[i] = f;
      const double h = std::max(0.0, 1.0 - y[i] * f);
      loss += sample_weights[i] * h * h;
    }
    double quad = 0.0;
    if (kernelized) {
      // 0.5 a^T K a; K row i is features row i.
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] == 0.0) continue;
        const double* row = features.data().data() + i * features.cols();
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * w[j];
        quad += w[i] * acc;
      }
      quad *= 0.5;
    } else {
      for (double wi : w) quad += wi * wi;
      quad *= 0.5;
    }
    return quad + reg * loss;
  }

  void gradient(const std::vector<double>& w, const std::vector<double>& scores,
                std::vector<double>& grad_w, double& grad_b) const {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    std::vector<double> g(n, 0.0);  // dLoss/df per sample
    grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = std::max(0.0, 1.0 - y[i] * scores[i]);
      if (h > 0.0) {
        g[i] = -2.0 * reg * sample_weights[i] * y[i] * h;
        grad_b += g[i];
      }
    }
    grad_w.assign(d, 0.0);
    if (kernelized) {
      // grad = K (a + g); K symmetric so accumulate row-wise.
      for (std::size_t i = 0; i < n; ++i) {
        const double coeff = w[i] + g[i];
        if (coeff == 0.0) continue;
        const double* row = features.data().data() + i * d;
        for (std::size_t j = 0; j < d; ++j) grad_w[j] += coeff * row[j];
      }
    } else {
      for (std::size_t j = 0; j < d; ++j) grad_w[j] = w[j];
      for (std::size_t i = 0; i < n; ++i) {
        if (g[i] == 0.0) continue;
        const double* row = features.data().data() + i * d;
        for (std::size_t j = 0; j < d; ++j) grad_w[j] += g[i] * row[j];
      }
    }
  }
};

// Monotone gradient descent with backtracking line search; starts at zero,
// no randomness, so training is bit-deterministic. Scores and the quadratic
// term are linear/quadratic in the step size, so each line-search trial only
// costs O(n) after one feature-matrix product per iteration.
SvmMachine train_binary(const BinaryProblem& problem, const TrainOptions& options) {
  const std::size_t n = problem.features.rows();
  const std::size_t d = problem.features.cols();
  SvmMachine machine;
  machine.weights.assign(d, 0.0);
  machine.bias = 0.0;

  std::vector<double> scores(n, 0.0);
  double obj = problem.objective(machine.weights, machine.bias, scores);
  machine.objective_history.push_back(obj);
  double ww = 0.0;  // ||w||^2 (linear) or w^T K w (kernelized)

  const auto trial_loss = [&](const std::vector<double>& trial_scores) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = std::max(0.0, 1.0 - problem.y[i] * trial_scores[i]);
      loss += problem.sample_weights[i] * h * h;
    }
    return loss;
  };

  double step = 1.0;
  std::vector<double> grad_w(d), dir_scores(n), trial_scores(n);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    double grad_b = 0.0;
    problem.gradient(machine.weights, scores, grad_w, grad_b);
    double grad_norm2 = grad_b * grad_b;
    for (double g : grad_w) grad_norm2 += g * g;
    if (grad_norm2 <= 1e-24) break;

    // dir_scores = F * grad_w; for the kernelized head F is K, so it also
    // yields the cross terms of the quadratic form.
    const double* base = problem.features.data().data();
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = base + i * d;
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += row[j] * grad_w[j];
      dir_scores[i] = acc;
    }
    double wg = 0.0, gg = 0.0;
    if (problem.kernelized) {
      for (std::size_t i = 0; i < n; ++i) {
        wg += machine.weights[i] * dir_scores[i];
        gg += grad_w[i] * dir_scores[i];
      }
    } else {
      for (std::size_t j = 0; j < d; ++j) {
        wg += machine.weights[j] * grad_w[j];
        gg += grad_w[j] * grad_w[j];
      }
    }

    double new_obj = obj;
    double trial_ww = ww;
    bool accepted = false;
    for (int shrink = 0; shrink < 60; ++shrink) {
      for (std::size_t i = 0; i < n; ++i)
        trial_scores[i] = scores[i] - step * (dir_scores[i] + grad_b);
      trial_ww = ww - 2.0 * step * wg + step * step * gg;
      new_obj = 0.5 * trial_ww + problem.reg * trial_loss(trial_scores);
      if (new_obj <= obj) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    for (std::size_t j = 0; j < d; ++j) machine.weights[j] -= step * grad_w[j];
    machine.bias -= step * grad_b;
    scores.swap(trial_scores);
    ww = trial_ww;
    machine.objective_history.push_back(new_obj);
    const double rel = (obj - new_obj) / std::max(1e-300, std::abs(obj));
    obj = new_obj;
    step *= 1.25;
    if (rel < options.objective_tol) return machine;
    if (it + 1 == options.max_iterations) machine.converged = false;
  }
  return machine;
}

}  // namespace

SvmHead train_head(const EmbeddingSet& x, const std::vector<std::size_t>& labels,
                   std::size_t k, HeadKind kind,
                   const std::vector<double>* class_weights,
                   double regularization, const TrainOptions& options) {
  x.validate();
  const std::size_t n = x.count();
  if (labels.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "label count != embedding count");
  std::unordered_set<std::size_t> present(labels.begin(), labels.end());
  if (present.size() < 2)
    throw Error(ErrorCode::SingleClass, "training set has a single class");
  if (kind == HeadKind::Rbf && n > options.rbf_sample_cap)
    throw Error(ErrorCode::KernelTooLarge,
                "rbf head capped at " + std::to_string(options.rbf_sample_cap) +
                    " samples");

  SvmHead head;
  head.kind = kind;
  head.regularization = regularization;
  head.dim = x.dim();
  head.class_weights =
      class_weights ? *class_weights : std::vector<double>(k, 1.0);
  if (head.class_weights.size() != k)
    throw Error(ErrorCode::DimensionMismatch, "class weight vector length");

  std::vector<double> sample_weights(n);
  for (std::size_t i = 0; i < n; ++i)
    sample_weights[i] = head.class_weights[labels[i]];

  Matrix gram;
  if (kind == HeadKind::Rbf) {
    head.gamma = rbf_gamma(x);
    head.support = x.matrix;
    head.support_indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) head.support_indices[i] = i;
    gram = Matrix(n, n);
    const double* base = x.matrix.data().data();
    for (std::size_t i = 0; i < n; ++i) {
      gram(i, i) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = rbf_kernel(base + i * head.dim, base + j * head.dim,
                                    head.dim, head.gamma);
        gram(i, j) = v;
        gram(j, i) = v;
      }
    }
  }

  head.machines.reserve(k);
  std::vector<double> y(n);
  for (std::size_t cls = 0; cls < k; ++cls) {
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == cls ? 1.0 : -1.0;
    const BinaryProblem problem{
        kind == HeadKind::Rbf ? gram : x.matrix, sample_weights, y,
        regularization, kind == HeadKind::Rbf};
    head.machines.push_back(train_binary(problem, options));
  }
  return head;
}

std::vector<double> SvmHead::decision_values(const double* x) const {
  std::vector<double> values(machines.size());
  if (kind == HeadKind::Linear) {
    for (std::size_t c = 0; c < machines.size(); ++c) {
      double f = machines[c].bias;
      for (std::size_t j = 0; j < dim; ++j) f += machines[c].weights[j] * x[j];
      values[c] = f;
    }
    return values;
  }
  const std::size_t n = support.rows();
  std::vector<double> kernel_row(n);
  const double* base = support.data().data();
  for (std::size_t i = 0; i < n; ++i)
    kernel_row[i] = rbf_kernel(base + i * dim, x, dim, gamma);
  for (std::size_t c = 0; c < machines.size(); ++c) {
    double f = machines[c].bias;
    for (std::size_t i = 0; i < n; ++i)
      f += machines[c].weights[i] * kernel_row[i];
    values[c] = f;
  }
  return values;
}

PredictResult predict(const SvmHead& head, const EmbeddingSet& x) {
  x.validate();
  if (x.dim() != head.dim)
    throw Error(ErrorCode::DimensionMismatch,
                "embedding dimension " + std::to_string(x.dim()) +
                    " != trained dimension " + std::to_string(head.dim));
  PredictResult result;
  result.table.rows.reserve(x.count());
  const double* base = x.matrix.data().data();
  for (std::size_t i = 0; i < x.count(); ++i) {
    const std::vector<double> values = head.decision_values(base + i * head.dim);
    std::size_t best = 0;
    bool tied = false;
    for (std::size_t c = 1; c < values.size(); ++c) {
      if (values[c] > values[best]) {
        best = c;
        tied = false;
      } else if (values[c] == values[best]) {
        tied = true;
      }
    }
    if (tied) ++result.tie_count;
    SampleRow row;
    row.image_id = x.image_ids[i];
    row.predicted_segment = best;
    result.table.rows.push_back(std::move(row));
  }
  return result;
}

PredictResult knn_label(const EmbeddingSet& query, const EmbeddingSet& reference,
                        const std::vector<std::size_t>& reference_labels,
                        std::size_t k, std::size_t num_segments) {
  if (reference.count() == 0)
    throw Error(ErrorCode::EmptyReference, "no reference embeddings");
  if (reference_labels.size() != reference.count())
    throw Error(ErrorCode::DimensionMismatch, "reference label count");
  if (k < 1 || k > reference.count())
    throw Error(ErrorCode::InvalidInput, "k must be in [1, reference size]");
  if (query.dim() != reference.dim())
    throw Error(ErrorCode::DimensionMismatch, "query/reference dimension");

  PredictResult result;
  result.table.rows.reserve(query.count());
  const std::size_t d = query.dim();
  const double* qbase = query.matrix.data().data();
  const double* rbase = reference.matrix.data().data();
  std::vector<std::pair<double, std::size_t>> dists(reference.count());
  for (std::size_t qi = 0; qi < query.count(); ++qi) {
    const double* q = qbase + qi * d;
    for (std::size_t ri = 0; ri < reference.count(); ++ri) {
      const double* r = rbase + ri * d;
      double dist2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = q[j] - r[j];
        dist2 += diff * diff;
      }
      dists[ri] = {dist2, ri};
    }
    std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
    std::vector<std::size_t> votes(num_segments, 0);
    for (std::size_t j = 0; j < k; ++j) ++votes[reference_labels[dists[j].second]];
    std::size_t best = 0;
    bool tied = false;
    for (std::size_t c = 1; c < num_segments; ++c) {
      if (votes[c] > votes[best]) {
        best = c;
        tied = false;
      } else if (votes[c] == votes[best] && votes[c] > 0) {
        tied = true;
      }
    }
    if (tied) ++result.tie_count;
    SampleRow row;
    row.image_id = query.image_ids[qi];
    row.predicted_segment = best;
    result.table.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace fairprobe
