#pragma once

#include "sepnmf/matrix.hpp"

namespace sepnmf {

// Ground-truth checks that share no code path with the proximal solver.

struct NnlsResult {
  Vector w;
  double residual = 0.0;  // ||B w - y||_2
  int iterations = 0;
};

inline constexpr double kDefaultKktTol = 1e-10;

// Lawson-Hanson active set method for min ||B w - y||_2 s.t. w >= 0.
// `tol` bounds the gradient B^T (B w - y) at termination.
NnlsResult nnls(const DenseMatrix& b, const Vector& y, double tol = kDefaultKktTol);

// KKT certificate for a candidate w: w >= 0, |g_j| <= tol where w_j > 0 and
// g_j >= -tol where w_j == 0, with g = B^T (B w - y).
bool nnls_kkt_holds(const DenseMatrix& b, const Vector& y, const Vector& w, double tol);

inline constexpr double kRepresentableTol = 1e-7;

// Residual of the best non-negative fit of column j by all other columns.
double cone_residual(const DenseMatrix& xn, Index j);

// Columns whose cone residual against the others exceeds `tol`. Intended for
// small n: one NNLS per column.
IndexList brute_force_extreme_rays(const DenseMatrix& xn, double tol = kRepresentableTol);

struct Phi2Report {
  double max_equality_violation = 0.0;    // max |X C - X|
  double max_column_sum_violation = 0.0;  // max |1^T C - 1|
  double min_entry = 0.0;                 // min C

  bool feasible(double eta) const {
    return max_equality_violation <= eta && max_column_sum_violation <= eta && min_entry >= -eta;
  }
};

Phi2Report validate_phi2(const DenseMatrix& xn, const DenseMatrix& c);

// ||X - X(:, I) W||_F / ||X||_F.
double reconstruction_residual(const DenseMatrix& x, const IndexList& anchors, const DenseMatrix& w);

}  // namespace sepnmf
