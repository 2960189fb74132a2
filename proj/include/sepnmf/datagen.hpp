#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "sepnmf/matrix.hpp"

namespace sepnmf {

// Dimension orderings of the benchmark families.
//   C1: m >= n and m >= r   (tall data)
//   C2: r <= m <= n          (topic-model shape)
//   C3: m <= r <= n          (more anchors than ambient dimensions)
enum class Regime { C1, C2, C3 };

enum class RegimeMatch { C1, C2, C3, Ambiguous };

std::string_view to_string(Regime regime);
std::string_view to_string(RegimeMatch match);

// Accepts "c1"/"C1" etc.
std::optional<Regime> parse_regime(std::string_view text);

bool satisfies(Regime regime, Index m, Index n, Index r);

// Throws NoRegime when no ordering holds (e.g. r > n).
RegimeMatch classify_regime(Index m, Index n, Index r);

struct NmfInstance {
  DenseMatrix x_orig;
  DenseMatrix xn;
  ColumnScales scales;
  IndexList true_anchors;  // ascending, 0-based
  Regime regime = Regime::C1;
  std::uint64_t seed = 0;
  Index m = 0;
  Index n = 0;
  Index r = 0;
  bool shuffled = false;
  bool planted_certified = false;  // planted rays checked pairwise by NNLS
  bool oracle_checked = false;     // full brute-force oracle agreed with the plant
};

struct GenerateOptions {
  bool shuffle = false;
  int max_retries = 50;
  // Planted rays are certified extreme against each other when r is at most
  // this; the full brute-force oracle runs when n is at most oracle_max_n.
  Index certify_max_r = 200;
  Index oracle_max_n = 200;
};

// Planted rays uniform on [0, 100]^m at columns 0..r-1; each further column
// mixes a uniformly chosen subset of 2..r planted rays with weights uniform
// on (0, 1]. Columns are then L1-normalized.
//
// Throws NoRegime, InvalidInput (r < 2, n <= r), RegimeMismatch, or
// GenerationFailure once the retry budget is spent.
NmfInstance generate_instance(Index m, Index n, Index r, Regime regime, std::uint64_t seed,
                              const GenerateOptions& options = {});

}  // namespace sepnmf
