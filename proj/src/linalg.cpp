#include "fairprobe/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairprobe/error.hpp"
#include "fairprobe/rng.hpp"

namespace fairprobe {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

std::vector<double> Matrix::multiply(const std::vector<double>& v) const {
  if (v.size() != cols_)
    throw Error(ErrorCode::DimensionMismatch, "matrix-vector size mismatch");
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

Matrix Matrix::multiply(const Matrix& other) const {
  if (cols_ != other.rows_)
    throw Error(ErrorCode::DimensionMismatch, "matrix-matrix size mismatch");
  Matrix out(rows_, other.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      if (a == 0.0) continue;
      for (std::size_t c = 0; c < other.cols_; ++c)
        out(r, c) += a * other(k, c);
    }
  return out;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

struct LuFactors {
  Matrix lu;
  std::vector<std::size_t> perm;
};

LuFactors lu_factor(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "solve_dense needs a square matrix");
  if (n > kMaxSolveDim)
    throw Error(ErrorCode::DimensionMismatch, "dense solver capped at K <= 64");
  const double pivot_floor = 1e-14 * a.max_abs();

  LuFactors f{a, std::vector<std::size_t>(n)};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(f.lu(r, col)) > std::abs(f.lu(pivot, col))) pivot = r;
    if (std::abs(f.lu(pivot, col)) < pivot_floor || f.lu(pivot, col) == 0.0)
      throw Error(ErrorCode::SingularMatrix, "pivot below threshold at column " +
                                                 std::to_string(col));
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c)
        std::swap(f.lu(pivot, c), f.lu(col, c));
      std::swap(f.perm[pivot], f.perm[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = f.lu(r, col) / f.lu(col, col);
      f.lu(r, col) = factor;
      for (std::size_t c = col + 1; c < n; ++c)
        f.lu(r, c) -= factor * f.lu(col, c);
    }
  }
  return f;
}

std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b) {
  const std::size_t n = f.lu.rows();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

}  // namespace

SolveResult solve_dense(const Matrix& a, const std::vector<double>& b) {
  const std::size_t n = a.rows();
  if (b.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "rhs length mismatch");
  const LuFactors f = lu_factor(a);
  SolveResult result;
  result.x = lu_solve(f, b);

  Matrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    const std::vector<double> col = lu_solve(f, e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
    e[c] = 0.0;
  }
  result.condition_estimate = operator_norm(a) * operator_norm(inv);
  return result;
}

Matrix invert(const Matrix& a) {
  const std::size_t n = a.rows();
  const LuFactors f = lu_factor(a);
  Matrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    const std::vector<double> col = lu_solve(f, e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
    e[c] = 0.0;
  }
  return inv;
}

OperatorNormResult operator_norm_detail(const Matrix& a, std::uint64_t seed) {
  const std::size_t n = a.cols();
  OperatorNormResult result;
  if (n == 0 || a.rows() == 0) return result;
  if (n > kMaxSolveDim || a.rows() > kMaxSolveDim)
    throw Error(ErrorCode::DimensionMismatch, "operator_norm capped at K <= 64");

  // Gram matrix A^T A; its dominant eigenvalue is sigma_max^2.
  const Matrix gram = a.transposed().multiply(a);

  Rng rng(seed);
  std::vector<double> v(n);
  for (double& vi : v) vi = rng.uniform(-1.0, 1.0);
  double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  if (norm == 0.0) {
    v.assign(n, 0.0);
    v[0] = 1.0;
    norm = 1.0;
  }
  for (double& vi : v) vi /= norm;

  const std::size_t cap = 10 * n * n + 10;
  double lambda = 0.0;
  double prev = -1.0;
  for (std::size_t it = 0; it < cap; ++it) {
    std::vector<double> w = gram.multiply(v);
    const double wnorm =
        std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (wnorm == 0.0) {  // v in the null space; the matrix may still be zero
      result.value = 0.0;
      result.iterations = it + 1;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wnorm;
    lambda = wnorm;
    result.iterations = it + 1;
    if (prev >= 0.0 && std::abs(lambda - prev) <= 1e-10 * std::max(1.0, lambda)) {
      result.value = std::sqrt(lambda);
      return result;
    }
    prev = lambda;
  }
  result.value = std::sqrt(lambda);
  result.converged = false;
  return result;
}

double operator_norm(const Matrix& a, std::uint64_t seed) {
  return operator_norm_detail(a, seed).value;
}

double pairwise_sum(const std::vector<double>& values) {
  // Recursive halving with a small base case.
  struct Impl {
    static double sum(const double* v, std::size_t n) {
      if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += v[i];
        return acc;
      }
      const std::size_t half = n / 2;
      return sum(v, half) + sum(v + half, n - half);
    }
  };
  return Impl::sum(values.data(), values.size());
}

}  // namespace fairprobe
