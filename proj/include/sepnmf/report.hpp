#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "sepnmf/datagen.hpp"
#include "sepnmf/oracle.hpp"
#include "sepnmf/prox_solver.hpp"

namespace sepnmf {

// Ground truth written next to a generated X.csv (meta.json). Indices are
// 1-based on disk and 0-based here.
struct InstanceMeta {
  Index m = 0;
  Index n = 0;
  Index r = 0;
  Regime regime = Regime::C1;
  std::uint64_t seed = 0;
  bool shuffled = false;
  bool planted_certified = false;
  bool oracle_checked = false;
  IndexList true_anchors;
};

InstanceMeta meta_of(const NmfInstance& inst);
nlohmann::ordered_json to_json(const InstanceMeta& meta);
InstanceMeta meta_from_json(const nlohmann::json& j);  // throws Parse

struct AnchorAccuracy {
  Index true_positives = 0;
  Index r = 0;
  Index false_positives = 0;
};

AnchorAccuracy score_anchors(const IndexList& found, const IndexList& truth);

struct RunReport {
  std::string input;
  Index m = 0;
  Index n = 0;
  SolverConfig config;
  double dedupe_tol = kDefaultDedupeTol;
  std::optional<InstanceMeta> instance;

  IndexList anchors_found;
  std::optional<AnchorAccuracy> accuracy;
  IndexList duplicates_removed;
  IndexList duplicate_of;

  std::int64_t iterations = 0;
  std::int64_t plateau_iterations = 0;
  bool converged = false;
  double last_step_norm = 0.0;
  double primal_violation = 0.0;
  double diagonal_gap = 0.0;
  double row_scale = 1.0;
  Phi2Report phi2;
  double reconstruction_normalized = 0.0;
  double reconstruction_original = 0.0;
  std::optional<double> wall_time_ms;
};

nlohmann::ordered_json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);  // throws Parse

}  // namespace sepnmf
