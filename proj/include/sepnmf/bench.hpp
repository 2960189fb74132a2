#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sepnmf/datagen.hpp"
#include "sepnmf/prox_solver.hpp"

namespace sepnmf::bench {

struct BenchRow {
  std::string name;
  std::string group;
  Index m = 0;
  Index n = 0;
  Index r = 0;
  Regime regime = Regime::C1;
  double epsilon = 1e-5;
  std::optional<Index> reference_tp;  // published identification count, if any
};

// The nine accuracy-table rows (groups small/medium/large) and an r sweep at
// fixed (m, n) = (20, 60) with r in {2, m/2, > m} (group rsweep).
const std::vector<BenchRow>& catalog();

// Comma-separated row names and/or groups; "table" = small,medium,large and
// "all" = everything. Throws InvalidInput on an unknown token.
std::vector<BenchRow> select_rows(const std::string& spec);

struct CellResult {
  std::uint64_t seed = 0;
  Index true_positives = 0;
  Index false_positives = 0;
  Index found = 0;
  std::int64_t iterations = 0;
  std::int64_t plateau_iterations = 0;
  bool converged = false;
  double diagonal_gap = 0.0;
  double max_diag_offset = 0.0;  // max_i min(|C_ii|, |C_ii - 1|)
  double max_phi2_violation = 0.0;
  double reconstruction_normalized = 0.0;
  double reconstruction_original = 0.0;
  double wall_ms = 0.0;
};

struct RowSummary {
  BenchRow row;
  std::vector<CellResult> cells;
  Index median_tp = 0;  // lower median
  Index worst_tp = 0;
  Index max_fp = 0;
  double median_accuracy = 0.0;
  double median_wall_ms = 0.0;
  double max_wall_ms = 0.0;
  bool all_converged = false;
};

struct BenchOptions {
  int seeds = 5;
  std::uint64_t base_seed = 42;
  int jobs = 1;
  SolverConfig solver;  // epsilon is taken from each row
};

// Instance k of a row uses generator and price seed base_seed + k.
CellResult run_cell(const BenchRow& row, std::uint64_t seed, const SolverConfig& solver);

std::vector<RowSummary> run_bench(const std::vector<BenchRow>& rows, const BenchOptions& options);

nlohmann::ordered_json to_json(const std::vector<RowSummary>& summary, const BenchOptions& options,
                               bool timing);
std::string format_table(const std::vector<RowSummary>& summary, bool timing);

// SEPNMF_JOBS if set to a positive integer, else 1.
int default_jobs();

}  // namespace sepnmf::bench
