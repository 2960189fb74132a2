#include "sepnmf/matrix.hpp"

#include <cmath>
#include <string>

namespace sepnmf {

DenseMatrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const Index n_rows = static_cast<Index>(rows.size());
  const Index n_cols = n_rows == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  DenseMatrix m(n_rows, n_cols);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != n_cols)
      throw NmfError(ErrorKind::DimensionMismatch, "ragged row " + std::to_string(i));
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  require_finite(m);
  return m;
}

void require_finite(const DenseMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j)))
        throw NmfError(ErrorKind::NonFinite,
                       "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite",
                       static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}

NormalizedColumns l1_normalize_columns(const DenseMatrix& x) {
  require_finite(x);
  NormalizedColumns out{x, ColumnScales{Vector(x.cols())}};
  for (Index j = 0; j < x.cols(); ++j) {
    double sum = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      if (x(i, j) < 0.0)
        throw NmfError(ErrorKind::NegativeEntry,
                       "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is negative",
                       static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      sum += x(i, j);
    }
    if (!(sum > 0.0))
      throw NmfError(ErrorKind::ZeroColumn, "column " + std::to_string(j) + " sums to zero",
                     NmfError::npos, static_cast<std::size_t>(j));
    out.matrix.col(j) /= sum;
    out.scales.values(j) = sum;
  }
  return out;
}

DenseMatrix rescale_columns(const DenseMatrix& xn, const ColumnScales& scales) {
  if (scales.size() != xn.cols())
    throw NmfError(ErrorKind::DimensionMismatch, "scale count differs from column count");
  return xn * scales.values.asDiagonal();
}

DenseMatrix pos_project(const DenseMatrix& m) { return m.cwiseMax(0.0); }

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw NmfError(ErrorKind::DimensionMismatch, "frobenius_distance operands differ in shape");
  return (a - b).norm();
}

DedupeResult dedupe_columns(const DenseMatrix& xn, double tol) {
  DedupeResult out;
  for (Index j = 0; j < xn.cols(); ++j) {
    Index representative = -1;
    for (Index k : out.keep) {
      double dist = 0.0;
      for (Index i = 0; i < xn.rows() && dist <= tol; ++i) dist += std::abs(xn(i, j) - xn(i, k));
      if (dist <= tol) {
        representative = k;
        break;
      }
    }
    if (representative < 0)
      out.keep.push_back(j);
    else
      out.dup_map.emplace(j, representative);
  }
  out.matrix.resize(xn.rows(), static_cast<Index>(out.keep.size()));
  for (std::size_t c = 0; c < out.keep.size(); ++c) out.matrix.col(static_cast<Index>(c)) = xn.col(out.keep[c]);
  return out;
}

}  // namespace sepnmf
