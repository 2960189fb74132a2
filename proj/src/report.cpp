#include "sepnmf/report.hpp"

#include <algorithm>

namespace sepnmf {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json one_based(const IndexList& xs) {
  ordered_json arr = ordered_json::array();
  for (Index x : xs) arr.push_back(x + 1);
  return arr;
}

IndexList zero_based(const json& arr) {
  IndexList xs;
  for (const auto& v : arr) {
    const auto x = v.get<long long>();
    if (x < 1) throw NmfError(ErrorKind::Parse, "indices must be 1-based");
    xs.push_back(static_cast<Index>(x - 1));
  }
  return xs;
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw NmfError(ErrorKind::Parse, e.what());
  }
}

}  // namespace

InstanceMeta meta_of(const NmfInstance& inst) {
  return InstanceMeta{inst.m,       inst.n,       inst.r,
                      inst.regime,  inst.seed,    inst.shuffled,
                      inst.planted_certified, inst.oracle_checked, inst.true_anchors};
}

nlohmann::ordered_json to_json(const InstanceMeta& meta) {
  ordered_json j;
  j["m"] = meta.m;
  j["n"] = meta.n;
  j["r"] = meta.r;
  j["regime"] = std::string(to_string(meta.regime));
  j["seed"] = meta.seed;
  j["shuffled"] = meta.shuffled;
  j["planted_certified"] = meta.planted_certified;
  j["oracle_checked"] = meta.oracle_checked;
  j["true_anchors"] = one_based(meta.true_anchors);
  return j;
}

InstanceMeta meta_from_json(const nlohmann::json& j) {
  return guarded([&] {
    InstanceMeta meta;
    meta.m = j.at("m").get<Index>();
    meta.n = j.at("n").get<Index>();
    meta.r = j.at("r").get<Index>();
    const auto regime = parse_regime(j.at("regime").get<std::string>());
    if (!regime) throw NmfError(ErrorKind::Parse, "unknown regime in meta");
    meta.regime = *regime;
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.shuffled = j.value("shuffled", false);
    meta.planted_certified = j.value("planted_certified", false);
    meta.oracle_checked = j.value("oracle_checked", false);
    meta.true_anchors = zero_based(j.at("true_anchors"));
    if (static_cast<Index>(meta.true_anchors.size()) != meta.r)
      throw NmfError(ErrorKind::Parse, "true_anchors length differs from r");
    return meta;
  });
}

AnchorAccuracy score_anchors(const IndexList& found, const IndexList& truth) {
  AnchorAccuracy acc;
  acc.r = static_cast<Index>(truth.size());
  for (Index a : found) {
    if (std::find(truth.begin(), truth.end(), a) != truth.end())
      ++acc.true_positives;
    else
      ++acc.false_positives;
  }
  return acc;
}

nlohmann::ordered_json to_json(const RunReport& rep) {
  ordered_json j;
  j["format"] = "sepnmf-run-report";
  j["version"] = 1;
  j["input"] = {{"path", rep.input}, {"rows", rep.m}, {"cols", rep.n}};
  j["config"] = {{"epsilon", rep.config.epsilon},
                 {"step_t", rep.config.step_t},
                 {"ridge_delta", rep.config.ridge_delta},
                 {"anchor_tau", rep.config.anchor_tau},
                 {"max_iters", rep.config.max_iters},
                 {"seed", rep.config.seed},
                 {"equilibrate", rep.config.equilibrate},
                 {"compress", rep.config.compress},
                 {"skip_plateaus", rep.config.skip_plateaus},
                 {"polish_weights", rep.config.polish_weights},
                 {"dedupe_tol", rep.dedupe_tol}};
  j["instance"] = rep.instance ? to_json(*rep.instance) : ordered_json(nullptr);
  j["anchors_found"] = one_based(rep.anchors_found);
  j["anchors_true"] = rep.instance ? one_based(rep.instance->true_anchors) : ordered_json(nullptr);
  if (rep.accuracy) {
    j["accuracy"] = {rep.accuracy->true_positives, rep.accuracy->r};
    j["false_positives"] = rep.accuracy->false_positives;
  } else {
    j["accuracy"] = nullptr;
    j["false_positives"] = nullptr;
  }
  j["duplicates_removed"] = one_based(rep.duplicates_removed);
  j["duplicate_of"] = one_based(rep.duplicate_of);
  j["iterations"] = rep.iterations;
  j["plateau_iterations"] = rep.plateau_iterations;
  j["converged"] = rep.converged;
  j["last_step_norm"] = rep.last_step_norm;
  j["primal_violation"] = rep.primal_violation;
  j["diagonal_gap"] = rep.diagonal_gap;
  j["row_scale"] = rep.row_scale;
  j["residuals"] = {{"phi2",
                     {{"max_equality_violation", rep.phi2.max_equality_violation},
                      {"max_column_sum_violation", rep.phi2.max_column_sum_violation},
                      {"min_entry", rep.phi2.min_entry}}},
                    {"reconstruction_normalized", rep.reconstruction_normalized},
                    {"reconstruction_original", rep.reconstruction_original}};
  if (rep.wall_time_ms) j["wall_time_ms"] = *rep.wall_time_ms;
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  return guarded([&] {
    if (j.at("format").get<std::string>() != "sepnmf-run-report")
      throw NmfError(ErrorKind::Parse, "not a run report");
    RunReport rep;
    rep.input = j.at("input").at("path").get<std::string>();
    rep.m = j.at("input").at("rows").get<Index>();
    rep.n = j.at("input").at("cols").get<Index>();
    const auto& c = j.at("config");
    rep.config.epsilon = c.at("epsilon").get<double>();
    rep.config.step_t = c.at("step_t").get<double>();
    rep.config.ridge_delta = c.at("ridge_delta").get<double>();
    rep.config.anchor_tau = c.at("anchor_tau").get<double>();
    rep.config.max_iters = c.at("max_iters").get<std::int64_t>();
    rep.config.seed = c.at("seed").get<std::uint64_t>();
    rep.config.equilibrate = c.at("equilibrate").get<bool>();
    rep.config.compress = c.at("compress").get<bool>();
    rep.config.skip_plateaus = c.at("skip_plateaus").get<bool>();
    rep.config.polish_weights = c.at("polish_weights").get<bool>();
    rep.dedupe_tol = c.at("dedupe_tol").get<double>();
    if (!j.at("instance").is_null()) rep.instance = meta_from_json(j.at("instance"));
    rep.anchors_found = zero_based(j.at("anchors_found"));
    if (!j.at("accuracy").is_null()) {
      AnchorAccuracy acc;
      acc.true_positives = j.at("accuracy").at(0).get<Index>();
      acc.r = j.at("accuracy").at(1).get<Index>();
      acc.false_positives = j.at("false_positives").get<Index>();
      rep.accuracy = acc;
    }
    rep.duplicates_removed = zero_based(j.at("duplicates_removed"));
    rep.duplicate_of = zero_based(j.at("duplicate_of"));
    rep.iterations = j.at("iterations").get<std::int64_t>();
    rep.plateau_iterations = j.at("plateau_iterations").get<std::int64_t>();
    rep.converged = j.at("converged").get<bool>();
    rep.last_step_norm = j.at("last_step_norm").get<double>();
    rep.primal_violation = j.at("primal_violation").get<double>();
    rep.diagonal_gap = j.at("diagonal_gap").get<double>();
    rep.row_scale = j.at("row_scale").get<double>();
    const auto& res = j.at("residuals");
    rep.phi2.max_equality_violation = res.at("phi2").at("max_equality_violation").get<double>();
    rep.phi2.max_column_sum_violation = res.at("phi2").at("max_column_sum_violation").get<double>();
    rep.phi2.min_entry = res.at("phi2").at("min_entry").get<double>();
    rep.reconstruction_normalized = res.at("reconstruction_normalized").get<double>();
    rep.reconstruction_original = res.at("reconstruction_original").get<double>();
    if (j.contains("wall_time_ms")) rep.wall_time_ms = j.at("wall_time_ms").get<double>();
    return rep;
  });
}

}  // namespace sepnmf
