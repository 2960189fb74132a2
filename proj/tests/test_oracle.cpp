#include <doctest.h>

#include "sepnmf/datagen.hpp"
#include "sepnmf/oracle.hpp"
#include "sepnmf/prox_solver.hpp"
#include "test_support.hpp"

using namespace sepnmf;

TEST_SUITE("oracle") {

TEST_CASE("nnls on the identity") {
  Vector y(2);
  y << 3, 4;
  const auto res = nnls(DenseMatrix::Identity(2, 2), y);
  CHECK(res.w(0) == doctest::Approx(3.0));
  CHECK(res.w(1) == doctest::Approx(4.0));
  CHECK(res.residual <= 1e-14);
}

TEST_CASE("nnls with an orthogonal target") {
  DenseMatrix b(2, 1);
  b << 1, 0;
  Vector y(2);
  y << 0, 1;
  const auto res = nnls(b, y);
  CHECK(res.w(0) == 0.0);
  CHECK(res.residual == doctest::Approx(1.0));
}

TEST_CASE("nnls recovers a forward-built combination") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix b = testing::random_matrix(6, 2, gen);
    const Vector y = 0.3 * b.col(0) + 0.7 * b.col(1);
    const auto res = nnls(b, y);
    CHECK(res.residual <= 1e-8);
    CHECK(nnls_kkt_holds(b, y, res.w, kDefaultKktTol));
  }
}

TEST_CASE("nnls KKT certificate on random problems") {
  std::mt19937_64 gen(37);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 2 + trial % 9, n = 1 + trial % 13;
    const DenseMatrix b = testing::random_matrix(m, n, gen, -1.0, 1.0);
    const Vector y = testing::random_matrix(m, 1, gen, -1.0, 1.0);
    const auto res = nnls(b, y);
    CHECK(res.w.minCoeff() >= 0.0);
    CHECK(res.residual == doctest::Approx((b * res.w - y).norm()));
    CHECK(nnls_kkt_holds(b, y, res.w, 1e-9));
  }
}

TEST_CASE("adding a column never increases the residual") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 30; ++trial) {
    const DenseMatrix full = testing::random_matrix(5, 8, gen);
    const Vector y = testing::random_matrix(5, 1, gen);
    double prev = nnls(full.leftCols(1), y).residual;
    for (Index k = 2; k <= full.cols(); ++k) {
      const double now = nnls(full.leftCols(k), y).residual;
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("extreme rays of small instances") {
  CHECK(brute_force_extreme_rays(DenseMatrix::Identity(3, 3)) == IndexList{0, 1, 2});
  CHECK(brute_force_extreme_rays(make_matrix({{1, 0, 0.5}, {0, 1, 0.5}})) == IndexList{0, 1});
  CHECK(cone_residual(make_matrix({{1, 0, 0.5}, {0, 1, 0.5}}), 2) <= 1e-12);
}

TEST_CASE("oracle agrees with the planted C3 anchors") {
  const auto inst = generate_instance(25, 100, 45, Regime::C3, 42);
  const IndexList found = brute_force_extreme_rays(inst.xn);
  CHECK(found.size() == 45);
  CHECK(found == inst.true_anchors);
}

TEST_CASE("phi2 report for identity and zero") {
  const DenseMatrix xn = make_matrix({{0.2, 0.7, 0.5}, {0.8, 0.3, 0.5}});
  const auto id = validate_phi2(xn, DenseMatrix::Identity(3, 3));
  CHECK(id.max_equality_violation == 0.0);
  CHECK(id.max_column_sum_violation == 0.0);
  CHECK(id.min_entry == 0.0);
  CHECK(id.feasible(0.0));

  const auto zero = validate_phi2(xn, DenseMatrix::Zero(3, 3));
  CHECK(zero.max_equality_violation == doctest::Approx(0.8));
  CHECK(zero.max_column_sum_violation == doctest::Approx(1.0));
  CHECK_FALSE(zero.feasible(0.5));

  CHECK_THROWS_AS(validate_phi2(xn, DenseMatrix::Identity(2, 2)), NmfError);
}

TEST_CASE("converged solver output is phi2-feasible") {
  const auto inst = generate_instance(12, 25, 5, Regime::C2, 3);
  SolverConfig cfg;
  const auto res = run_solver(inst.xn, cfg);
  REQUIRE(res.converged);
  CHECK(validate_phi2(inst.xn, res.c_final).feasible(10 * cfg.epsilon));
}

TEST_CASE("reconstruction residual") {
  const DenseMatrix x = make_matrix({{1, 0, 0.5}, {0, 2, 1}});
  DenseMatrix w(2, 3);
  w << 1, 0, 0.5, 0, 1, 0.5;
  CHECK(reconstruction_residual(x, IndexList{0, 1}, w) <= 1e-12);
  CHECK(reconstruction_residual(x, IndexList{0, 1}, DenseMatrix::Zero(2, 3)) == doctest::Approx(1.0));
  try {
    reconstruction_residual(x, IndexList{}, DenseMatrix::Zero(0, 3));
    FAIL("expected EmptyAnchorSet");
  } catch (const NmfError& e) {
    CHECK(e.kind() == ErrorKind::EmptyAnchorSet);
  }
  CHECK_THROWS_AS(reconstruction_residual(x, IndexList{0}, w), NmfError);
}

TEST_CASE("solver output reconstructs a generated instance") {
  const auto inst = generate_instance(30, 40, 8, Regime::C2, 12);
  const auto res = run_solver(inst.xn, SolverConfig{});
  REQUIRE(res.converged);
  CHECK(reconstruction_residual(inst.xn, res.anchors, res.w) <= 1e-4);
}

}  // TEST_SUITE
