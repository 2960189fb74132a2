#include "sepnmf/prox_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "sepnmf/rng.hpp"

namespace sepnmf {

namespace {

constexpr double kNormalizationTol = 1e-9;
constexpr double kActiveTol = 1e-14;
constexpr double kRankTol = 1e-12;
constexpr double kPlateauStep = 1e-12;

double max_primal_violation(const DenseMatrix& ac, const DenseMatrix& a, double row_scale) {
  const Index m = a.rows() - 1;
  const double data = m > 0 ? (ac.topRows(m) - a.topRows(m)).cwiseAbs().maxCoeff() / row_scale : 0.0;
  const double sums = (ac.row(m) - a.row(m)).cwiseAbs().maxCoeff();
  return std::max(data, sums);
}

void require_normalized(const DenseMatrix& xn) {
  if (xn.rows() == 0 || xn.cols() == 0)
    throw NmfError(ErrorKind::InvalidInput, "empty data matrix");
  if (!xn.allFinite()) throw NmfError(ErrorKind::InvalidInput, "data matrix has non-finite entries");
  if (xn.minCoeff() < 0.0) throw NmfError(ErrorKind::InvalidInput, "data matrix has negative entries");
  for (Index j = 0; j < xn.cols(); ++j) {
    if (std::abs(xn.col(j).sum() - 1.0) > kNormalizationTol)
      throw NmfError(ErrorKind::InvalidInput,
                     "column " + std::to_string(j) + " is not L1-normalized", NmfError::npos,
                     static_cast<std::size_t>(j));
  }
}

IndexList complement(const IndexList& anchors, Index n) {
  IndexList rest;
  rest.reserve(static_cast<std::size_t>(n) - anchors.size());
  auto it = anchors.begin();
  for (Index j = 0; j < n; ++j) {
    if (it != anchors.end() && *it == j)
      ++it;
    else
      rest.push_back(j);
  }
  return rest;
}

void require_anchor_set(const IndexList& anchors, Index n) {
  if (anchors.empty()) throw NmfError(ErrorKind::EmptyAnchorSet, "no anchor columns");
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    if (anchors[k] < 0 || anchors[k] >= n)
      throw NmfError(ErrorKind::DimensionMismatch, "anchor index out of range");
    if (k > 0 && anchors[k] <= anchors[k - 1])
      throw NmfError(ErrorKind::InvalidInput, "anchor indices must be strictly ascending");
  }
}


// Active-set least squares warm-started from a non-negative x: the passive
// set starts as the support of x and every interpolation keeps x >= 0.
Vector refine_column(const DenseMatrix& b, const Vector& y, Vector x) {
  const Index n = b.cols();
  std::vector<bool> passive(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) passive[static_cast<std::size_t>(k)] = x(k) > 0.0;
  const auto solve_passive = [&]() {
    std::vector<Index> idx;
    for (Index k = 0; k < n; ++k)
      if (passive[static_cast<std::size_t>(k)]) idx.push_back(k);
    Vector z = Vector::Zero(n);
    if (idx.empty()) return z;
    DenseMatrix sub(b.rows(), static_cast<Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Index>(c)) = b.col(idx[c]);
    const Vector zs = Eigen::CompleteOrthogonalDecomposition<DenseMatrix>(sub).solve(y);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zs(static_cast<Index>(c));
    return z;
  };

  const Index cap = 3 * n + 10;
  for (Index outer = 0; outer < cap; ++outer) {
    Vector z = solve_passive();
    for (Index inner = 0; inner < n; ++inner) {
      double alpha = 1.0;
      bool blocked = false;
      for (Index k = 0; k < n; ++k)
        if (passive[static_cast<std::size_t>(k)] && z(k) <= 0.0) {
          blocked = true;
          const double denom = x(k) - z(k);
          alpha = std::min(alpha, denom > 0.0 ? x(k) / denom : 0.0);
        }
      if (!blocked) break;
      x += alpha * (z - x);
      for (Index k = 0; k < n; ++k)
        if (passive[static_cast<std::size_t>(k)] && x(k) <= kActiveTol) {
          passive[static_cast<std::size_t>(k)] = false;
          x(k) = 0.0;
        }
      z = solve_passive();
    }
    x = z.cwiseMax(0.0);

    const Vector grad = b.transpose() * (y - b * x);
    Index enter = -1;
    double best = kActiveTol;
    for (Index k = 0; k < n; ++k)
      if (!passive[static_cast<std::size_t>(k)] && grad(k) > best) {
        best = grad(k);
        enter = k;
      }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;
  }
  return x;
}


// While C is stationary the iteration is affine in k: Q gains t (A C - A)
// per step, so the unprojected update drifts by -K (A C - A) per step.
// Advances Q and the counter to one step before the first clamped entry turns
// positive, which is where the projected trajectory would start moving again.
// Entries that are not clamped may drift by at most a tenth of epsilon.
std::int64_t skip_plateau(SolverState& state, const ProxSystem& sys, double epsilon, std::int64_t budget) {
  const DenseMatrix resid = state.ac - sys.a;
  DenseMatrix raw = sys.c0 + state.c;
  raw.noalias() -= sys.k * (state.q / sys.t + state.ac);
  const DenseMatrix drift = -(sys.k * resid);

  double to_cross = std::numeric_limits<double>::infinity();
  double free_drift = 0.0;
  for (Index j = 0; j < raw.cols(); ++j)
    for (Index i = 0; i < raw.rows(); ++i) {
      if (raw(i, j) < 0.0) {
        if (drift(i, j) > 0.0) to_cross = std::min(to_cross, -raw(i, j) / drift(i, j));
      } else {
        free_drift = std::max(free_drift, std::abs(drift(i, j)));
      }
    }
  if (free_drift > 0.0) to_cross = std::min(to_cross, 0.1 * epsilon / free_drift);
  if (!std::isfinite(to_cross)) return 0;
  const double jump = std::min(std::floor(to_cross) - 1.0, static_cast<double>(budget));
  if (jump < 1.0) return 0;
  const auto skipped = static_cast<std::int64_t>(jump);
  state.q += (static_cast<double>(skipped) * sys.t) * resid;
  state.iter += skipped;
  return skipped;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw NmfError(ErrorKind::InvalidInput, "epsilon must be positive");
  if (!(step_t > 0.0) || !std::isfinite(step_t))
    throw NmfError(ErrorKind::InvalidInput, "step t must be positive");
  if (!(ridge_delta >= 0.0) || !std::isfinite(ridge_delta))
    throw NmfError(ErrorKind::InvalidInput, "ridge delta must be non-negative");
  if (!(anchor_tau > 0.0 && anchor_tau < 0.5))
    throw NmfError(ErrorKind::InvalidInput, "anchor tau must lie in (0, 0.5)");
  if (max_iters < 1) throw NmfError(ErrorKind::InvalidInput, "max iterations must be >= 1");
}

DenseMatrix build_augmented(const DenseMatrix& xn, double row_scale) {
  DenseMatrix a(xn.rows() + 1, xn.cols());
  a.topRows(xn.rows()) = row_scale * xn;
  a.row(xn.rows()).setOnes();
  return a;
}

double equilibration_scale(const DenseMatrix& xn) {
  const double total = xn.colwise().norm().sum();
  return total > 0.0 ? static_cast<double>(xn.cols()) / total : 1.0;
}

Vector generate_price_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector p(n);
  for (Index i = 0; i < n; ++i) p(i) = rng.uniform(0.5, 1.5);
  // Redraw the later member of any tie until every entry is distinct.
  for (;;) {
    std::vector<std::pair<double, Index>> sorted;
    sorted.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) sorted.emplace_back(p(i), i);
    std::sort(sorted.begin(), sorted.end());
    bool clash = false;
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      if (sorted[k].first == sorted[k - 1].first) {
        p(sorted[k].second) = rng.uniform(0.5, 1.5);
        clash = true;
      }
    }
    if (!clash) return p;
  }
}

DenseMatrix compress_rows(const DenseMatrix& a) {
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(a.rows(), a.cols());
  qr.setThreshold(kRankTol);
  qr.compute(a);
  const Index k = std::max<Index>(qr.rank(), 1);
  if (k >= a.rows()) return a;
  const DenseMatrix r = qr.matrixR().topRows(k).triangularView<Eigen::Upper>();
  return r * qr.colsPermutation().transpose();
}

ProxSystem make_prox_system(const DenseMatrix& a, const GramSolveHandle& h, const Vector& p,
                            double t, double row_scale) {
  if (h.dimension() != a.cols() || p.size() != a.cols())
    throw NmfError(ErrorKind::DimensionMismatch, "augmented matrix, Gram handle and price vector disagree");
  ProxSystem sys;
  sys.a = a;
  sys.t = t;
  sys.row_scale = row_scale;
  sys.k = h.solve(a.transpose());
  DenseMatrix rhs = a.transpose() * a;
  rhs.diagonal() -= p / (2.0 * t);
  sys.c0 = h.solve(rhs);
  return sys;
}

SolverState initial_state(const ProxSystem& sys) {
  const Index n = sys.a.cols();
  SolverState s;
  s.c = DenseMatrix::Zero(n, n);
  s.q = DenseMatrix::Zero(sys.a.rows(), n);
  s.ac = DenseMatrix::Zero(sys.a.rows(), n);
  return s;
}

SolverState prox_step(const SolverState& state, const ProxSystem& sys) {
  const Index n = sys.a.cols();
  if (state.c.rows() != n || state.c.cols() != n || state.q.rows() != sys.a.rows() ||
      state.q.cols() != n || state.ac.rows() != sys.a.rows() || state.ac.cols() != n)
    throw NmfError(ErrorKind::DimensionMismatch, "solver state does not match the augmented system");

  SolverState next;
  DenseMatrix shifted = state.q / sys.t + state.ac;
  next.c = sys.c0 + state.c;
  next.c.noalias() -= sys.k * shifted;
  next.c = next.c.cwiseMax(0.0);
  next.ac.noalias() = sys.a * next.c;
  next.q = state.q + sys.t * (next.ac - sys.a);
  if (!next.c.allFinite() || !next.q.allFinite())
    throw NmfError(ErrorKind::NonFiniteState,
                   "iteration " + std::to_string(state.iter + 1) +
                       " produced non-finite values; reduce t or raise delta");
  next.iter = state.iter + 1;
  next.last_step_norm = frobenius_distance(next.c, state.c);
  next.primal_violation = sys.compressed
                              ? (next.ac - sys.a).norm() * std::max(1.0, 1.0 / sys.row_scale)
                              : max_primal_violation(next.ac, sys.a, sys.row_scale);
  return next;
}

FactorizationResult run_solver(const DenseMatrix& xn, const SolverConfig& cfg) {
  cfg.validate();
  require_normalized(xn);

  FactorizationResult out;
  out.row_scale = cfg.equilibrate ? equilibration_scale(xn) : 1.0;
  const DenseMatrix a = build_augmented(xn, out.row_scale);
  const DenseMatrix r = cfg.compress ? compress_rows(a) : a;
  const GramSolveHandle h = gram_factor(r, cfg.ridge_delta);
  ProxSystem sys = make_prox_system(r, h, generate_price_vector(xn.cols(), cfg.seed), cfg.step_t, out.row_scale);
  sys.compressed = r.rows() < a.rows();

  SolverState state = initial_state(sys);
  while (state.iter < cfg.max_iters) {
    state = prox_step(state, sys);
    if (state.last_step_norm > cfg.epsilon) continue;
    // On the compressed system the step only carries an upper bound.
    if (sys.compressed && state.primal_violation > cfg.epsilon)
      state.primal_violation = max_primal_violation(a * state.c, a, out.row_scale);
    if (state.primal_violation <= cfg.epsilon) {
      out.converged = true;
      break;
    }
    if (cfg.skip_plateaus && state.last_step_norm <= kPlateauStep) {
      const std::int64_t skipped = skip_plateau(state, sys, cfg.epsilon, cfg.max_iters - state.iter);
      out.plateau_iterations += skipped;
    }
  }
  if (sys.compressed) state.primal_violation = max_primal_violation(a * state.c, a, out.row_scale);

  out.iterations = state.iter;
  out.last_step_norm = state.last_step_norm;
  out.primal_violation = state.primal_violation;
  out.c_final = std::move(state.c);
  out.diag_values = out.c_final.diagonal();
  out.anchors = extract_anchors(out.c_final, cfg.anchor_tau);
  out.diagonal_gap = diagonal_gap(out.diag_values, out.anchors);
  if (out.anchors.empty()) {
    out.w = DenseMatrix(0, xn.cols());
  } else {
    out.w = absorb_weights(out.c_final, out.anchors);
    if (cfg.polish_weights) out.w = polish_weights(xn, out.anchors, out.w);
  }
  return out;
}

IndexList extract_anchors(const DenseMatrix& c, double tau) {
  if (c.rows() != c.cols()) throw NmfError(ErrorKind::DimensionMismatch, "C must be square");
  IndexList anchors;
  for (Index i = 0; i < c.rows(); ++i)
    if (c(i, i) >= 1.0 - tau) anchors.push_back(i);
  return anchors;
}

double diagonal_gap(const Vector& diag, const IndexList& anchors) {
  double lowest_accepted = 1.0;
  double highest_rejected = 0.0;
  auto it = anchors.begin();
  for (Index i = 0; i < diag.size(); ++i) {
    if (it != anchors.end() && *it == i) {
      lowest_accepted = std::min(lowest_accepted, diag(i));
      ++it;
    } else {
      highest_rejected = std::max(highest_rejected, diag(i));
    }
  }
  return lowest_accepted - highest_rejected;
}

DenseMatrix extract_weights(const DenseMatrix& c, const IndexList& anchors) {
  require_anchor_set(anchors, c.rows());
  DenseMatrix w(static_cast<Index>(anchors.size()), c.cols());
  for (std::size_t k = 0; k < anchors.size(); ++k) w.row(static_cast<Index>(k)) = c.row(anchors[k]);
  return w;
}

DenseMatrix absorb_weights(const DenseMatrix& c, const IndexList& anchors) {
  if (c.rows() != c.cols()) throw NmfError(ErrorKind::DimensionMismatch, "C must be square");
  DenseMatrix w = extract_weights(c, anchors);
  const IndexList rest = complement(anchors, c.rows());
  if (rest.empty()) return w;

  const Index nr = static_cast<Index>(rest.size());
  const Index na = static_cast<Index>(anchors.size());
  DenseMatrix transient(nr, nr);   // I - C(N,N)
  DenseMatrix to_anchor(na, nr);   // C(I,N)
  DenseMatrix from_rest(nr, c.cols());  // C(N,:)
  for (Index b = 0; b < nr; ++b) {
    for (Index a = 0; a < nr; ++a) transient(a, b) = (a == b ? 1.0 : 0.0) - c(rest[a], rest[b]);
    for (Index k = 0; k < na; ++k) to_anchor(k, b) = c(anchors[k], rest[b]);
  }
  for (Index a = 0; a < nr; ++a) from_rest.row(a) = c.row(rest[a]);
  if (from_rest.cwiseAbs().maxCoeff() == 0.0) return w;

  // M = C(I,N) (I - C(N,N))^{-1}, from the transposed system.
  Eigen::PartialPivLU<DenseMatrix> lu(transient.transpose());
  // Singular when some non-anchor rows never reach an anchor; keep the plain slice.
  if (!(lu.rcond() > 1e-12)) return w;
  const DenseMatrix m = lu.solve(to_anchor.transpose()).transpose();
  w.noalias() += m * from_rest;
  return w.cwiseMax(0.0);
}

DenseMatrix polish_weights(const DenseMatrix& xn, const IndexList& anchors, const DenseMatrix& w) {
  require_anchor_set(anchors, xn.cols());
  if (w.rows() != static_cast<Index>(anchors.size()) || w.cols() != xn.cols())
    throw NmfError(ErrorKind::DimensionMismatch, "weights do not match the anchor set");
  const Index m = xn.rows();
  DenseMatrix b(m + 1, w.rows());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    b.col(static_cast<Index>(k)).head(m) = xn.col(anchors[k]);
    b(m, static_cast<Index>(k)) = 1.0;
  }
  DenseMatrix out = w;
  Vector y(m + 1);
  for (Index j = 0; j < xn.cols(); ++j) {
    y.head(m) = xn.col(j);
    y(m) = 1.0;
    const Vector cand = refine_column(b, y, w.col(j));
    if ((b * cand - y).norm() < (b * w.col(j) - y).norm()) out.col(j) = cand;
  }
  return out;
}

DenseMatrix denormalize(const IndexList& anchors, const DenseMatrix& w, const ColumnScales& s) {
  if (static_cast<Index>(anchors.size()) != w.rows() || s.size() != w.cols())
    throw NmfError(ErrorKind::DimensionMismatch, "weights, anchors and scales disagree");
  DenseMatrix out(w.rows(), w.cols());
  for (Index j = 0; j < w.cols(); ++j)
    for (Index k = 0; k < w.rows(); ++k) {
      const Index anchor = anchors[static_cast<std::size_t>(k)];
      if (anchor < 0 || anchor >= s.size())
        throw NmfError(ErrorKind::DimensionMismatch, "anchor index out of range");
      out(k, j) = w(k, j) * s[j] / s[anchor];
    }
  return out;
}

}  // namespace sepnmf
