#include "sepnmf/oracle.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <vector>

namespace sepnmf {

namespace {

// Unconstrained least squares restricted to the passive columns.
Vector passive_solution(const DenseMatrix& b, const Vector& y, const std::vector<bool>& passive) {
  std::vector<Index> cols;
  for (Index j = 0; j < b.cols(); ++j)
    if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
  DenseMatrix sub(b.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Index>(k)) = b.col(cols[k]);
  const Vector zp = sub.colPivHouseholderQr().solve(y);
  Vector z = Vector::Zero(b.cols());
  for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zp(static_cast<Index>(k));
  return z;
}

}  // namespace

NnlsResult nnls(const DenseMatrix& b, const Vector& y, double tol) {
  if (b.rows() != y.size())
    throw NmfError(ErrorKind::DimensionMismatch, "nnls: B and y differ in length");
  const Index n = b.cols();
  const auto at = [](Index j) { return static_cast<std::size_t>(j); };
  NnlsResult out;
  out.w = Vector::Zero(n);
  std::vector<bool> passive(at(n), false);
  // Columns whose entry would not move w; cleared whenever w changes.
  std::vector<bool> blocked(at(n), false);
  const int max_outer = static_cast<int>(3 * n + 10);

  Vector grad = b.transpose() * (y - b * out.w);  // negative gradient
  while (out.iterations < max_outer) {
    Index best = -1;
    double best_val = tol;
    for (Index j = 0; j < n; ++j)
      if (!passive[at(j)] && !blocked[at(j)] && grad(j) > best_val) {
        best = j;
        best_val = grad(j);
      }
    if (best < 0) break;
    ++out.iterations;
    passive[at(best)] = true;

    Vector z = passive_solution(b, y, passive);
    if (z(best) <= 0.0) {
      passive[at(best)] = false;
      blocked[at(best)] = true;
      continue;
    }
    for (int inner = 0; inner <= n; ++inner) {
      bool all_positive = true;
      for (Index j = 0; j < n; ++j)
        if (passive[at(j)] && z(j) <= 0.0) all_positive = false;
      if (all_positive) {
        out.w = z;
        break;
      }
      // Step back towards z until the first passive coordinate hits zero.
      double alpha = 1.0;
      for (Index j = 0; j < n; ++j)
        if (passive[at(j)] && z(j) <= 0.0) alpha = std::min(alpha, out.w(j) / (out.w(j) - z(j)));
      out.w += alpha * (z - out.w);
      for (Index j = 0; j < n; ++j)
        if (passive[at(j)] && out.w(j) <= 1e-15) {
          passive[at(j)] = false;
          out.w(j) = 0.0;
        }
      z = passive_solution(b, y, passive);
    }
    std::fill(blocked.begin(), blocked.end(), false);
    grad = b.transpose() * (y - b * out.w);
  }
  out.residual = (b * out.w - y).norm();
  return out;
}

bool nnls_kkt_holds(const DenseMatrix& b, const Vector& y, const Vector& w, double tol) {
  if (w.size() != b.cols() || y.size() != b.rows()) return false;
  const Vector g = b.transpose() * (b * w - y);
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) < 0.0) return false;
    if (w(j) > 0.0 ? std::abs(g(j)) > tol : g(j) < -tol) return false;
  }
  return true;
}

double cone_residual(const DenseMatrix& xn, Index j) {
  const Index n = xn.cols();
  if (j < 0 || j >= n) throw NmfError(ErrorKind::DimensionMismatch, "column index out of range");
  if (n == 1) return xn.col(0).norm();
  DenseMatrix others(xn.rows(), n - 1);
  others.leftCols(j) = xn.leftCols(j);
  others.rightCols(n - 1 - j) = xn.rightCols(n - 1 - j);
  return nnls(others, xn.col(j)).residual;
}

IndexList brute_force_extreme_rays(const DenseMatrix& xn, double tol) {
  IndexList extreme;
  for (Index j = 0; j < xn.cols(); ++j)
    if (cone_residual(xn, j) > tol) extreme.push_back(j);
  return extreme;
}

Phi2Report validate_phi2(const DenseMatrix& xn, const DenseMatrix& c) {
  if (c.rows() != xn.cols() || c.cols() != xn.cols())
    throw NmfError(ErrorKind::DimensionMismatch, "C must be n x n for an m x n data matrix");
  Phi2Report r;
  if (c.size() == 0) return r;
  r.max_equality_violation = xn.rows() > 0 ? (xn * c - xn).cwiseAbs().maxCoeff() : 0.0;
  r.max_column_sum_violation = (c.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.min_entry = c.minCoeff();
  return r;
}

double reconstruction_residual(const DenseMatrix& x, const IndexList& anchors, const DenseMatrix& w) {
  if (anchors.empty()) throw NmfError(ErrorKind::EmptyAnchorSet, "no anchor columns");
  if (static_cast<Index>(anchors.size()) != w.rows() || w.cols() != x.cols())
    throw NmfError(ErrorKind::DimensionMismatch, "W must be |I| x n");
  DenseMatrix xi(x.rows(), static_cast<Index>(anchors.size()));
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    if (anchors[k] < 0 || anchors[k] >= x.cols())
      throw NmfError(ErrorKind::DimensionMismatch, "anchor index out of range");
    xi.col(static_cast<Index>(k)) = x.col(anchors[k]);
  }
  const double denom = x.norm();
  const double num = (x - xi * w).norm();
  return denom > 0.0 ? num / denom : num;
}

}  // namespace sepnmf
