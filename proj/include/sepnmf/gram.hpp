#pragma once

#include <Eigen/Cholesky>

#include "sepnmf/matrix.hpp"

namespace sepnmf {

// Reusable solver for (A^T A + delta I) Z = B with A fixed.
//
// The Cholesky factor is computed once. Each solve is followed by iterative
// refinement whose residual is accumulated in extended precision from A
// itself, so the returned Z is accurate to the conditioning of the system
// rather than to the rounding of the explicitly formed Gram matrix.
class GramSolveHandle {
 public:
  Index dimension() const { return gram_.rows(); }
  double ridge() const { return delta_; }
  const DenseMatrix& gram() const { return gram_; }

  // Throws DimensionMismatch when b.rows() != dimension().
  DenseMatrix solve(const DenseMatrix& b) const;

 private:
  friend GramSolveHandle gram_factor(const DenseMatrix& a, double delta);

  using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

  GramSolveHandle(const DenseMatrix& a, double delta);

  ExtMatrix residual(const DenseMatrix& b, const DenseMatrix& z) const;

  ExtMatrix a_ext_;
  DenseMatrix gram_;  // A^T A + delta I
  double delta_;
  Eigen::LLT<DenseMatrix> llt_;
};

// Factors A^T A + delta I. delta must be >= 0; with delta == 0 a
// rank-deficient A raises SingularGram.
GramSolveHandle gram_factor(const DenseMatrix& a, double delta);

inline DenseMatrix gram_solve(const GramSolveHandle& h, const DenseMatrix& b) {
  return h.solve(b);
}

}  // namespace sepnmf
