#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fairprobe {

// Row-major dense square-or-rectangular matrix of doubles. Sized for the
// K x K systems of the correction step (K <= 64), not for general use.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  Matrix transposed() const;
  std::vector<double> multiply(const std::vector<double>& v) const;
  Matrix multiply(const Matrix& other) const;

  double max_abs() const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SolveResult {
  std::vector<double> x;
  double condition_estimate = 0.0;  // ||A||_op * ||A^-1||_op
};

inline constexpr std::size_t kMaxSolveDim = 64;
inline constexpr std::uint64_t kDefaultNormSeed = 0x5EED;

// LU factorization with partial pivoting. Throws SingularMatrix when a
// pivot magnitude drops below 1e-14 * max|A|.
SolveResult solve_dense(const Matrix& a, const std::vector<double>& b);

// Inverse via LU; same singularity rule as solve_dense.
Matrix invert(const Matrix& a);

struct OperatorNormResult {
  double value = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
};

// Largest singular value via power iteration on A^T A. Deterministic under
// a fixed seed; tolerance 1e-10, iteration cap 10 * K^2.
OperatorNormResult operator_norm_detail(const Matrix& a,
                                        std::uint64_t seed = kDefaultNormSeed);

double operator_norm(const Matrix& a, std::uint64_t seed = kDefaultNormSeed);

// Pairwise (tree) summation; reproducible independent of thread count as
// long as the element order is fixed.
double pairwise_sum(const std::vector<double>& values);

}  // namespace fairprobe
