#include <doctest.h>

#include <cmath>
#include <vector>

#include "sepnmf/gram.hpp"
#include "sepnmf/prox_solver.hpp"
#include "test_support.hpp"

using namespace sepnmf;

namespace {

// Gaussian elimination with partial pivoting in extended precision, one
// right-hand side at a time.
DenseMatrix reference_solve(const DenseMatrix& g, const DenseMatrix& b) {
  const Index n = g.rows();
  DenseMatrix out(n, b.cols());
  for (Index c = 0; c < b.cols(); ++c) {
    std::vector<std::vector<long double>> m(static_cast<std::size_t>(n),
                                            std::vector<long double>(static_cast<std::size_t>(n + 1)));
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) m[i][j] = g(i, j);
      m[i][n] = b(i, c);
    }
    for (Index k = 0; k < n; ++k) {
      Index piv = k;
      for (Index i = k + 1; i < n; ++i)
        if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
      std::swap(m[k], m[piv]);
      for (Index i = k + 1; i < n; ++i) {
        const long double f = m[i][k] / m[k][k];
        for (Index j = k; j <= n; ++j) m[i][j] -= f * m[k][j];
      }
    }
    for (Index i = n - 1; i >= 0; --i) {
      long double s = m[i][n];
      for (Index j = i + 1; j < n; ++j) s -= m[i][j] * static_cast<long double>(out(j, c));
      out(i, c) = static_cast<double>(s / m[i][i]);
    }
  }
  return out;
}

DenseMatrix gram_of(const DenseMatrix& a, double delta) {
  DenseMatrix g = a.transpose() * a;
  g.diagonal().array() += delta;
  return g;
}

}  // namespace

TEST_SUITE("gram") {

TEST_CASE("augmented identity factors without a ridge") {
  DenseMatrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  const auto h = gram_factor(a, 0.0);
  CHECK(h.dimension() == 2);
  const DenseMatrix z = gram_solve(h, a.transpose() * a);
  CHECK((z - DenseMatrix::Identity(2, 2)).norm() <= 1e-14);
}

TEST_CASE("rank-deficient A needs a ridge") {
  const DenseMatrix a = make_matrix({{1, 0, 1}, {0, 1, 1}});
  try {
    gram_factor(a, 0.0);
    FAIL("expected SingularGram");
  } catch (const NmfError& e) {
    CHECK(e.kind() == ErrorKind::SingularGram);
  }

  const double delta = 1e-8;
  const auto h = gram_factor(a, delta);
  const DenseMatrix g = gram_of(a, delta);
  const DenseMatrix b = make_matrix({{1, 0.5}, {-2, 0.25}, {0.5, 3}});
  const DenseMatrix z = gram_solve(h, b);
  CHECK((g * z - b).norm() <= 1e-8 * b.norm());
  const DenseMatrix ref = reference_solve(g, b);
  CHECK(testing::relative_error(z, ref) <= 1e-7);
}

TEST_CASE("negative ridge is rejected") {
  CHECK_THROWS_AS(gram_factor(DenseMatrix::Identity(2, 2), -1.0), NmfError);
}

TEST_CASE("zero right-hand side and single Gram columns") {
  std::mt19937_64 gen(2);
  const DenseMatrix a = testing::random_matrix(6, 4, gen);
  const double delta = 1e-8;
  const auto h = gram_factor(a, delta);
  CHECK(gram_solve(h, DenseMatrix::Zero(4, 3)).isZero(0.0));
  const DenseMatrix g = gram_of(a, delta);
  for (Index j = 0; j < 4; ++j) {
    const DenseMatrix z = gram_solve(h, g.col(j));
    CHECK((z - DenseMatrix::Identity(4, 4).col(j)).norm() <= 1e-7);
  }
}

TEST_CASE("right-hand side of the wrong height") {
  const auto h = gram_factor(DenseMatrix::Identity(3, 3), 0.0);
  try {
    gram_solve(h, DenseMatrix::Zero(2, 1));
    FAIL("expected DimensionMismatch");
  } catch (const NmfError& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("forward-constructed systems solve back") {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> rows(1, 50), cols(1, 80);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = rows(gen), n = cols(gen);
    const DenseMatrix xn = l1_normalize_columns(testing::random_matrix(m, n, gen, 0.01, 1.0)).matrix;
    const DenseMatrix a = build_augmented(xn);
    const double delta = 1e-8;
    const auto h = gram_factor(a, delta);
    const DenseMatrix z0 = testing::random_matrix(n, 3, gen, -1.0, 1.0);
    const DenseMatrix b = gram_of(a, delta) * z0;
    const DenseMatrix z = gram_solve(h, b);
    CAPTURE(m);
    CAPTURE(n);
    CHECK((gram_of(a, delta) * z - b).norm() <= 1e-8 * b.norm());
  }
}

TEST_CASE("repeated solves are bitwise identical") {
  std::mt19937_64 gen(23);
  const DenseMatrix a = testing::random_matrix(8, 12, gen);
  const auto h = gram_factor(a, 1e-8);
  const DenseMatrix b = testing::random_matrix(12, 5, gen);
  const DenseMatrix z1 = gram_solve(h, b);
  const DenseMatrix z2 = gram_solve(h, b);
  CHECK(z1 == z2);
}

}  // TEST_SUITE
