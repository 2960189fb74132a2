#include "sepnmf/gram.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace sepnmf {

namespace {

constexpr int kRefinementSweeps = 3;

}  // namespace

GramSolveHandle::GramSolveHandle(const DenseMatrix& a, double delta)
    : a_ext_(a.cast<long double>()), delta_(delta) {
  gram_ = a.transpose() * a;
  gram_.diagonal().array() += delta;
  llt_.compute(gram_);
}

GramSolveHandle gram_factor(const DenseMatrix& a, double delta) {
  require_finite(a);
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw NmfError(ErrorKind::InvalidInput, "ridge delta must be finite and non-negative");
  GramSolveHandle h(a, delta);
  const double n = static_cast<double>(h.dimension());
  const double floor = n * std::numeric_limits<double>::epsilon();
  if (h.llt_.info() != Eigen::Success || (h.dimension() > 0 && !(h.llt_.rcond() > floor))) {
    if (delta == 0.0)
      throw NmfError(ErrorKind::SingularGram,
                     "A^T A is singular; supply a positive ridge delta");
    throw NmfError(ErrorKind::SingularGram,
                   "A^T A + delta I could not be factored; increase delta");
  }
  return h;
}

GramSolveHandle::ExtMatrix GramSolveHandle::residual(const DenseMatrix& b,
                                                     const DenseMatrix& z) const {
  const ExtMatrix z_ext = z.cast<long double>();
  ExtMatrix az = a_ext_ * z_ext;
  ExtMatrix r = b.cast<long double>();
  r.noalias() -= a_ext_.transpose() * az;
  r -= static_cast<long double>(delta_) * z_ext;
  return r;
}

DenseMatrix GramSolveHandle::solve(const DenseMatrix& b) const {
  if (b.rows() != dimension())
    throw NmfError(ErrorKind::DimensionMismatch,
                   "right-hand side has " + std::to_string(b.rows()) + " rows, expected " +
                       std::to_string(dimension()));
  DenseMatrix z = llt_.solve(b);
  ExtMatrix r = residual(b, z);
  long double r_norm = r.norm();
  for (int sweep = 0; sweep < kRefinementSweeps && r_norm > 0.0L; ++sweep) {
    DenseMatrix candidate = z + llt_.solve(r.cast<double>());
    ExtMatrix candidate_r = residual(b, candidate);
    const long double candidate_norm = candidate_r.norm();
    if (!(candidate_norm < r_norm)) break;
    z = std::move(candidate);
    r = std::move(candidate_r);
    r_norm = candidate_norm;
  }
  return z;
}

}  // namespace sepnmf
