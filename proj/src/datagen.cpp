#include "sepnmf/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "sepnmf/oracle.hpp"
#include "sepnmf/rng.hpp"

namespace sepnmf {

namespace {

constexpr double kRayMax = 100.0;
// Planted rays must clear the oracle threshold by this factor.
constexpr double kCertifyMargin = 10.0;

void draw_ray(Rng& rng, DenseMatrix& f, Index j) {
  for (Index i = 0; i < f.rows(); ++i) f(i, j) = rng.uniform(0.0, kRayMax);
}

void draw_mixture(Rng& rng, const DenseMatrix& f, DenseMatrix& x, Index j) {
  const Index r = f.cols();
  const Index count = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(r - 1)));
  IndexList pool(static_cast<std::size_t>(r));
  std::iota(pool.begin(), pool.end(), Index{0});
  x.col(j).setZero();
  for (Index k = 0; k < count; ++k) {
    const auto pick = static_cast<std::size_t>(k) +
                      static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(r - k)));
    std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
    const double weight = 1.0 - rng.uniform01();  // (0, 1]
    x.col(j) += weight * f.col(pool[static_cast<std::size_t>(k)]);
  }
}

// Planted rays (normalized) that some non-negative mix of the others reaches.
IndexList dominated_rays(const DenseMatrix& f) {
  DenseMatrix fn = f;
  for (Index j = 0; j < fn.cols(); ++j) fn.col(j) /= fn.col(j).sum();
  IndexList bad;
  for (Index j = 0; j < fn.cols(); ++j)
    if (!(cone_residual(fn, j) > kCertifyMargin * kRepresentableTol)) bad.push_back(j);
  return bad;
}

// m >= r: linear independence already makes every planted ray extreme.
bool full_column_rank(const DenseMatrix& f) {
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(f);
  qr.setThreshold(1e-10);
  return qr.rank() == f.cols();
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::C1: return "C1";
    case Regime::C2: return "C2";
    case Regime::C3: return "C3";
  }
  return "?";
}

std::string_view to_string(RegimeMatch match) {
  switch (match) {
    case RegimeMatch::C1: return "C1";
    case RegimeMatch::C2: return "C2";
    case RegimeMatch::C3: return "C3";
    case RegimeMatch::Ambiguous: return "Ambiguous";
  }
  return "?";
}

std::optional<Regime> parse_regime(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "c1") return Regime::C1;
  if (lower == "c2") return Regime::C2;
  if (lower == "c3") return Regime::C3;
  return std::nullopt;
}

bool satisfies(Regime regime, Index m, Index n, Index r) {
  switch (regime) {
    case Regime::C1: return m >= n && m >= r;
    case Regime::C2: return r <= m && m <= n;
    case Regime::C3: return m <= r && r <= n;
  }
  return false;
}

RegimeMatch classify_regime(Index m, Index n, Index r) {
  if (m < 1 || n < 1 || r < 1) throw NmfError(ErrorKind::InvalidInput, "dimensions must be positive");
  int count = 0;
  RegimeMatch match = RegimeMatch::Ambiguous;
  for (Regime g : {Regime::C1, Regime::C2, Regime::C3}) {
    if (satisfies(g, m, n, r)) {
      ++count;
      match = static_cast<RegimeMatch>(g);
    }
  }
  if (count == 0)
    throw NmfError(ErrorKind::NoRegime, "(m, n, r) = (" + std::to_string(m) + ", " +
                                            std::to_string(n) + ", " + std::to_string(r) +
                                            ") fits none of C1, C2, C3");
  return count == 1 ? match : RegimeMatch::Ambiguous;
}

NmfInstance generate_instance(Index m, Index n, Index r, Regime regime, std::uint64_t seed,
                              const GenerateOptions& options) {
  classify_regime(m, n, r);
  if (r < 2) throw NmfError(ErrorKind::InvalidInput, "r must be at least 2");
  if (n <= r) throw NmfError(ErrorKind::InvalidInput, "n must exceed r");
  if (!satisfies(regime, m, n, r))
    throw NmfError(ErrorKind::RegimeMismatch,
                   "(m, n, r) = (" + std::to_string(m) + ", " + std::to_string(n) + ", " +
                       std::to_string(r) + ") violates regime " + std::string(to_string(regime)));

  Rng rng(seed);
  NmfInstance inst;
  inst.regime = regime;
  inst.seed = seed;
  inst.m = m;
  inst.n = n;
  inst.r = r;

  DenseMatrix f(m, r);
  for (Index j = 0; j < r; ++j) draw_ray(rng, f, j);

  for (int attempt = 0;; ++attempt) {
    if (attempt > options.max_retries)
      throw NmfError(ErrorKind::GenerationFailure,
                     "no valid instance after " + std::to_string(options.max_retries) + " retries");

    bool certified = false;
    if (r <= m && full_column_rank(f)) {
      certified = true;
    } else if (r <= options.certify_max_r) {
      const IndexList bad = dominated_rays(f);
      if (!bad.empty()) {
        for (Index j : bad) draw_ray(rng, f, j);
        continue;
      }
      certified = true;
    } else if (r <= m) {
      draw_ray(rng, f, attempt % r);
      continue;
    }

    DenseMatrix x(m, n);
    x.leftCols(r) = f;
    for (Index j = r; j < n; ++j) draw_mixture(rng, f, x, j);

    // Redraw mixtures that land on top of an earlier column.
    bool unique = false;
    for (int fix = 0; fix <= options.max_retries; ++fix) {
      const DedupeResult dd = dedupe_columns(l1_normalize_columns(x).matrix);
      if (dd.dup_map.empty()) {
        unique = true;
        break;
      }
      if (dd.dup_map.begin()->first < r) break;  // two planted rays coincide
      for (const auto& entry : dd.dup_map) draw_mixture(rng, f, x, entry.first);
    }
    if (!unique) {
      draw_ray(rng, f, attempt % r);
      continue;
    }

    NormalizedColumns norm = l1_normalize_columns(x);
    bool oracle_checked = false;
    if (n <= options.oracle_max_n) {
      IndexList expected(static_cast<std::size_t>(r));
      std::iota(expected.begin(), expected.end(), Index{0});
      if (brute_force_extreme_rays(norm.matrix) != expected) {
        for (Index j = 0; j < r; ++j) draw_ray(rng, f, j);
        continue;
      }
      oracle_checked = true;
    }

    inst.x_orig = std::move(x);
    inst.xn = std::move(norm.matrix);
    inst.scales = std::move(norm.scales);
    inst.planted_certified = certified;
    inst.oracle_checked = oracle_checked;
    break;
  }

  inst.true_anchors.resize(static_cast<std::size_t>(r));
  std::iota(inst.true_anchors.begin(), inst.true_anchors.end(), Index{0});

  if (options.shuffle) {
    IndexList perm(static_cast<std::size_t>(n));  // new position -> old column
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index k = n - 1; k > 0; --k)
      std::swap(perm[static_cast<std::size_t>(k)],
                perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k + 1)))]);
    DenseMatrix xo(m, n), xs(m, n);
    Vector sc(n);
    IndexList anchors;
    for (Index k = 0; k < n; ++k) {
      const Index old = perm[static_cast<std::size_t>(k)];
      xo.col(k) = inst.x_orig.col(old);
      xs.col(k) = inst.xn.col(old);
      sc(k) = inst.scales[old];
      if (old < r) anchors.push_back(k);
    }
    inst.x_orig = std::move(xo);
    inst.xn = std::move(xs);
    inst.scales.values = std::move(sc);
    inst.true_anchors = std::move(anchors);
    inst.shuffled = true;
  }
  return inst;
}

}  // namespace sepnmf
