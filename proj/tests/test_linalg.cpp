#include <doctest.h>

#include <cmath>

#include "fairprobe/error.hpp"
#include "fairprobe/linalg.hpp"
#include "fairprobe/rng.hpp"

using namespace fairprobe;

TEST_CASE("solve_dense identity returns the rhs") {
  const Matrix a = Matrix::identity(3);
  const SolveResult r = solve_dense(a, {1.0, -2.0, 3.0});
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(r.x[2] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.condition_estimate == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("solve_dense hand 2x2 system") {
  Matrix a(2, 2);
  a(0, 0) = 0.9;
  a(0, 1) = 0.1;
  a(1, 0) = 0.1;
  a(1, 1) = 0.9;
  const SolveResult r = solve_dense(a, {0.44, 0.36});
  CHECK(r.x[0] == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("solve_dense zero matrix is singular") {
  const Matrix a(2, 2, 0.0);
  try {
    solve_dense(a, {1.0, 1.0});
    FAIL("expected SingularMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMatrix);
  }
}

TEST_CASE("solve_dense residual contract on random systems") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 16;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
      a(i, i) += 2.0;  // keep well away from singularity
    }
    std::vector<double> b(n);
    double b_inf = 0.0;
    for (double& v : b) {
      v = rng.uniform(-5.0, 5.0);
      b_inf = std::max(b_inf, std::abs(v));
    }
    const SolveResult r = solve_dense(a, b);
    const std::vector<double> ax = a.multiply(r.x);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ax[i] - b[i]) <= 1e-10 * (1.0 + b_inf));
  }
}

TEST_CASE("operator_norm examples") {
  CHECK(operator_norm(Matrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-9));

  Matrix diag(2, 2);
  diag(0, 0) = 2.0;
  diag(1, 1) = 0.5;
  CHECK(operator_norm(diag) == doctest::Approx(2.0).epsilon(1e-9));

  Matrix ct(2, 2);
  ct(0, 0) = 0.9;
  ct(0, 1) = 0.1;
  ct(1, 0) = 0.1;
  ct(1, 1) = 0.9;
  CHECK(operator_norm(ct) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("operator_norm deterministic under a fixed seed") {
  Rng rng(3);
  Matrix a(5, 5);
  for (double& v : a.data()) v = rng.uniform(-1.0, 1.0);
  const double n1 = operator_norm(a, 123);
  const double n2 = operator_norm(a, 123);
  CHECK(n1 == n2);
}

TEST_CASE("covariance inequality ||M S M^T||_op <= ||M||^2 ||S||_op") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 6;
    Matrix m(n, n), b(n, n);
    for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : b.data()) v = rng.uniform(-1.0, 1.0);
    const Matrix sigma = b.multiply(b.transposed());  // PSD
    const Matrix lhs = m.multiply(sigma).multiply(m.transposed());
    const double lhs_norm = operator_norm(lhs);
    const double m_norm = operator_norm(m);
    const double sigma_norm = operator_norm(sigma);
    CHECK(lhs_norm <= m_norm * m_norm * sigma_norm * (1.0 + 1e-8) + 1e-12);
  }
}

TEST_CASE("pairwise_sum matches sequential sums and is order-stable") {
  Rng rng(29);
  std::vector<double> values(1000);
  long double exact = 0.0;
  for (double& v : values) {
    v = rng.uniform(-1.0, 1.0);
    exact += v;
  }
  const double s1 = pairwise_sum(values);
  const double s2 = pairwise_sum(values);
  CHECK(s1 == s2);
  CHECK(s1 == doctest::Approx(static_cast<double>(exact)).epsilon(1e-12));
}

TEST_CASE("invert round trip") {
  Rng rng(31);
  Matrix a(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    a(i, i) += 3.0;
  }
  const Matrix prod = a.multiply(invert(a));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
}
