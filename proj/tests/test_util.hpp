#pragma once

#include <vector>

#include "fairprobe/core.hpp"
#include "fairprobe/rng.hpp"

namespace fairprobe::testutil {

// Random point on the K-simplex with entries bounded away from zero.
inline std::vector<double> random_simplex(Rng& rng, std::size_t k,
                                          double floor = 0.05) {
  std::vector<double> v(k);
  double sum = 0.0;
  for (double& x : v) {
    x = floor + rng.uniform();
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

// Diagonally dominant row-stochastic matrix; diag_weight in (0,1) sets the
// mass kept on the diagonal, keeping the matrix comfortably invertible.
inline ConfusionMatrix random_confusion(Rng& rng, std::size_t k,
                                        double diag_weight = 0.7) {
  ConfusionMatrix cm;
  cm.entries = Matrix(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    std::vector<double> off = random_simplex(rng, k, 0.01);
    for (std::size_t b = 0; b < k; ++b)
      cm.entries(a, b) = (a == b ? diag_weight : 0.0) +
                         (1.0 - diag_weight) * off[b];
    // renormalize exactly
    double row_sum = 0.0;
    for (std::size_t b = 0; b < k; ++b) row_sum += cm.entries(a, b);
    for (std::size_t b = 0; b < k; ++b) cm.entries(a, b) /= row_sum;
  }
  return cm;
}

inline GroupModel random_model(Rng& rng, std::size_t k,
                               double diag_weight = 0.7) {
  std::vector<double> p(k);
  for (double& x : p) x = rng.uniform();
  return GroupModel::make(random_simplex(rng, k), std::move(p),
                          random_confusion(rng, k, diag_weight));
}

// Hand model used throughout: pi=(.5,.5), p=(.9,.7), C rows (.9,.1)/(.1,.9).
inline GroupModel hand_model() {
  ConfusionMatrix cm;
  cm.entries = Matrix(2, 2);
  cm.entries(0, 0) = 0.9;
  cm.entries(0, 1) = 0.1;
  cm.entries(1, 0) = 0.1;
  cm.entries(1, 1) = 0.9;
  return GroupModel::make({0.5, 0.5}, {0.9, 0.7}, cm);
}

}  // namespace fairprobe::testutil
