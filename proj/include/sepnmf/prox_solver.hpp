#pragma once

#include <cstdint>
#include <limits>

#include "sepnmf/gram.hpp"
#include "sepnmf/matrix.hpp"

namespace sepnmf {

struct SolverConfig {
  double epsilon = 1e-5;     // stopping threshold
  double step_t = 100.0;     // constant dual step t
  double ridge_delta = 1.0;  // proximal weight; 0 gives the plain multiplier method
  double anchor_tau = 0.05;  // accept C_ii >= 1 - tau
  std::int64_t max_iters = 50000;
  std::uint64_t seed = 1;    // price vector seed
  bool equilibrate = true;   // rescale the data rows of A (feasible set unchanged)
  bool compress = true;        // iterate on the R factor of A when its rank is below m + 1
  bool skip_plateaus = true;   // jump over stretches where only Q moves
  bool polish_weights = true;  // least-squares correction of W after extraction

  // Throws InvalidInput when a field is outside its domain.
  void validate() const;
};

// Iterate of the proximal multiplier method. `ac` caches A * c.
struct SolverState {
  DenseMatrix c;
  DenseMatrix q;
  DenseMatrix ac;
  std::int64_t iter = 0;
  double last_step_norm = std::numeric_limits<double>::infinity();
  double primal_violation = std::numeric_limits<double>::infinity();
};

struct FactorizationResult {
  IndexList anchors;  // ascending, 0-based
  DenseMatrix c_final;
  DenseMatrix w;      // anchors.size() x n
  std::int64_t iterations = 0;        // includes plateau_iterations
  std::int64_t plateau_iterations = 0;  // advanced in closed form
  bool converged = false;
  Vector diag_values;
  double diagonal_gap = 0.0;
  double last_step_norm = 0.0;
  double primal_violation = 0.0;
  double row_scale = 1.0;
};

// [row_scale * Xn; 1^T].
DenseMatrix build_augmented(const DenseMatrix& xn, double row_scale = 1.0);

// n / sum_j ||x_j||_2. Brings the data rows of the augmented system to the
// magnitude of the all-ones row; equals 1 when every column is a unit vector.
double equilibration_scale(const DenseMatrix& xn);

// Distinct entries, uniform on (0.5, 1.5), reproducible from `seed`.
Vector generate_price_vector(Index n, std::uint64_t seed);

// Everything that stays fixed across iterations for one (A, p, t, delta).
//
// The C update solves
//   (A^T A + delta I) C = A^T A - (diag(p) + 2 A^T Q) / (2t) + delta C_prev,
// the stationary point of
//   p^T diag(C) + (1/t) ||Q + t (A C - A)||^2 + t delta ||C - C_prev||^2.
// By linearity that is C0 + C_prev - K (Q / t + A C_prev) with
//   K  = (A^T A + delta I)^{-1} A^T,
//   C0 = (A^T A + delta I)^{-1} (A^T A - diag(p) / (2t)),
// so an iteration costs two (m+1) x n x n products and no solve.
struct ProxSystem {
  DenseMatrix a;
  DenseMatrix k;
  DenseMatrix c0;
  double t = 100.0;
  double row_scale = 1.0;
  bool compressed = false;  // `a` is compress_rows of the augmented matrix
};

// R (k x n) from a rank-revealing QR of A, k the numerical rank, so that
// A = U R with orthonormal U. Then A^T A = R^T R and A C = A iff R C = R, and
// the iteration on R is the one on A with Q replaced by U^T Q. Returns A
// itself when it already has full row rank.
DenseMatrix compress_rows(const DenseMatrix& a);

ProxSystem make_prox_system(const DenseMatrix& a, const GramSolveHandle& h, const Vector& p,
                            double t, double row_scale = 1.0);

SolverState initial_state(const ProxSystem& sys);

// One pass of: C update, projection onto C >= 0, multiplier update. On a
// compressed system primal_violation is an upper bound built from
// ||R C - R||_F rather than the exact max-entry violation.
// Throws NonFiniteState if the new C or Q has a non-finite entry.
SolverState prox_step(const SolverState& state, const ProxSystem& sys);

// Full run from C = 0, Q = 0. Converged means both the step ||C+ - C||_F and
// the largest Phi2 equality violation dropped to epsilon.
FactorizationResult run_solver(const DenseMatrix& xn, const SolverConfig& cfg);

// { i : C(i,i) >= 1 - tau }, ascending.
IndexList extract_anchors(const DenseMatrix& c, double tau);

// Smallest accepted diagonal minus largest rejected one. An empty side
// counts as 1 (accepted) or 0 (rejected).
double diagonal_gap(const Vector& diag, const IndexList& anchors);

// Rows `anchors` of C. Throws EmptyAnchorSet.
DenseMatrix extract_weights(const DenseMatrix& c, const IndexList& anchors);

// Anchor weights with the mass routed through non-anchor rows folded back:
//   W = C(I,:) + C(I,N) (I - C(N,N))^{-1} C(N,:),   N = complement of I.
// C is column-stochastic with anchor columns absorbing, so this is the
// absorption matrix of that chain and satisfies X(:,I) W = X C. Reduces to
// extract_weights when the rows N are zero. Throws EmptyAnchorSet.
DenseMatrix absorb_weights(const DenseMatrix& c, const IndexList& anchors);

// Per column, non-negative least squares of [Xn(:,j); 1] against
// [Xn(:,I); 1^T], warm-started from the support of `w`. A column is replaced
// only when its residual drops, so the result is never worse than `w`.
DenseMatrix polish_weights(const DenseMatrix& xn, const IndexList& anchors, const DenseMatrix& w);

// W_orig(k, j) = W(k, j) * s[j] / s[I(k)], so X_orig = X_orig(:, I) W_orig.
DenseMatrix denormalize(const IndexList& anchors, const DenseMatrix& w, const ColumnScales& s);

}  // namespace sepnmf
