#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <map>
#include <vector>

#include "sepnmf/error.hpp"

namespace sepnmf {

// Column-major dense storage for X, C, A, Q and W.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

// Builds a matrix from row-wise literals; rejects ragged rows and
// non-finite entries.
DenseMatrix make_matrix(std::initializer_list<std::initializer_list<double>> rows);

// Throws NonFinite on the first NaN/Inf entry.
void require_finite(const DenseMatrix& m);

// Original L1 mass of each column, one positive entry per column.
struct ColumnScales {
  Vector values;

  Index size() const { return values.size(); }
  double operator[](Index j) const { return values(j); }
};

struct NormalizedColumns {
  DenseMatrix matrix;
  ColumnScales scales;
};

// Divides every column by its L1 norm. X must be non-negative with no zero
// column (NegativeEntry / ZeroColumn otherwise).
NormalizedColumns l1_normalize_columns(const DenseMatrix& x);

// Reapplies the recorded scales: column j is multiplied by scales[j].
DenseMatrix rescale_columns(const DenseMatrix& xn, const ColumnScales& scales);

// Elementwise max(m, 0).
DenseMatrix pos_project(const DenseMatrix& m);

// ||a - b||_F.
double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b);

struct DedupeResult {
  DenseMatrix matrix;               // retained columns, in original order
  IndexList keep;                   // ascending, 0-based
  std::map<Index, Index> dup_map;   // dropped column -> retained representative
};

inline constexpr double kDefaultDedupeTol = 1e-9;

// Drops every column within L1 distance `tol` of an earlier retained column.
// The earliest column of each cluster is the representative.
DedupeResult dedupe_columns(const DenseMatrix& xn, double tol = kDefaultDedupeTol);

}  // namespace sepnmf
