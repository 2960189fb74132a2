#include "sepnmf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "sepnmf/oracle.hpp"
#include "sepnmf/report.hpp"

namespace sepnmf::bench {

const std::vector<BenchRow>& catalog() {
  static const std::vector<BenchRow> rows = {
      {"c1-small", "small", 100, 75, 25, Regime::C1, 1e-5, 25},
      {"c2-small", "small", 25, 100, 15, Regime::C2, 1e-5, 14},
      {"c3-small", "small", 25, 100, 45, Regime::C3, 1e-5, 45},
      {"c1-medium", "medium", 500, 375, 25, Regime::C1, 1e-4, 23},
      {"c2-medium", "medium", 125, 500, 75, Regime::C2, 1e-4, 74},
      {"c3-medium", "medium", 125, 500, 150, Regime::C3, 1e-4, 150},
      {"c1-large", "large", 1200, 600, 300, Regime::C1, 1e-4, 300},
      {"c2-large", "large", 425, 1200, 225, Regime::C2, 1e-4, 223},
      {"c3-large", "large", 425, 1200, 625, Regime::C3, 1e-4, 625},
      {"rsweep-2", "rsweep", 20, 60, 2, Regime::C2, 1e-5, std::nullopt},
      {"rsweep-half", "rsweep", 20, 60, 10, Regime::C2, 1e-5, std::nullopt},
      {"rsweep-over", "rsweep", 20, 60, 30, Regime::C3, 1e-5, std::nullopt},
  };
  return rows;
}

std::vector<BenchRow> select_rows(const std::string& spec) {
  std::vector<BenchRow> out;
  auto add = [&](const BenchRow& row) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const BenchRow& r) { return r.name == row.name; });
    if (!seen) out.push_back(row);
  };
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    bool matched = false;
    for (const auto& row : catalog()) {
      const bool in_table = row.group == "small" || row.group == "medium" || row.group == "large";
      if (token == "all" || token == row.name || token == row.group || (token == "table" && in_table)) {
        add(row);
        matched = true;
      }
    }
    if (!matched) throw NmfError(ErrorKind::InvalidInput, "unknown bench row or group '" + token + "'");
  }
  if (out.empty()) throw NmfError(ErrorKind::InvalidInput, "no bench rows selected");
  return out;
}

CellResult run_cell(const BenchRow& row, std::uint64_t seed, const SolverConfig& solver) {
  CellResult cell;
  cell.seed = seed;
  const NmfInstance inst = generate_instance(row.m, row.n, row.r, row.regime, seed);
  SolverConfig cfg = solver;
  cfg.epsilon = row.epsilon;
  cfg.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  const FactorizationResult res = run_solver(inst.xn, cfg);
  cell.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const AnchorAccuracy acc = score_anchors(res.anchors, inst.true_anchors);
  cell.true_positives = acc.true_positives;
  cell.false_positives = acc.false_positives;
  cell.found = static_cast<Index>(res.anchors.size());
  cell.iterations = res.iterations;
  cell.converged = res.converged;
  cell.plateau_iterations = res.plateau_iterations;
  cell.diagonal_gap = res.diagonal_gap;
  for (Index i = 0; i < res.diag_values.size(); ++i) {
    const double d = res.diag_values(i);
    cell.max_diag_offset = std::max(cell.max_diag_offset, std::min(std::abs(d), std::abs(d - 1.0)));
  }
  const Phi2Report phi = validate_phi2(inst.xn, res.c_final);
  cell.max_phi2_violation = std::max({phi.max_equality_violation, phi.max_column_sum_violation, -phi.min_entry});
  if (!res.anchors.empty()) {
    cell.reconstruction_normalized = reconstruction_residual(inst.xn, res.anchors, res.w);
    cell.reconstruction_original =
        reconstruction_residual(inst.x_orig, res.anchors, denormalize(res.anchors, res.w, inst.scales));
  } else {
    cell.reconstruction_normalized = cell.reconstruction_original = 1.0;
  }
  return cell;
}

std::vector<RowSummary> run_bench(const std::vector<BenchRow>& rows, const BenchOptions& options) {
  struct Task {
    std::size_t row;
    int k;
  };
  std::vector<Task> tasks;
  std::vector<RowSummary> summary(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    summary[i].row = rows[i];
    summary[i].cells.resize(static_cast<std::size_t>(options.seeds));
    for (int k = 0; k < options.seeds; ++k) tasks.push_back({i, k});
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task task = tasks[t];
      try {
        summary[task.row].cells[static_cast<std::size_t>(task.k)] =
            run_cell(rows[task.row], options.base_seed + static_cast<std::uint64_t>(task.k), options.solver);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  for (auto& s : summary) {
    std::vector<Index> tps;
    std::vector<double> times;
    s.all_converged = true;
    for (const auto& c : s.cells) {
      tps.push_back(c.true_positives);
      times.push_back(c.wall_ms);
      s.max_fp = std::max(s.max_fp, c.false_positives);
      s.all_converged = s.all_converged && c.converged;
    }
    std::sort(tps.begin(), tps.end());
    std::sort(times.begin(), times.end());
    if (!tps.empty()) {
      s.median_tp = tps[(tps.size() - 1) / 2];
      s.worst_tp = tps.front();
      s.median_wall_ms = times[(times.size() - 1) / 2];
      s.max_wall_ms = times.back();
    }
    s.median_accuracy = static_cast<double>(s.median_tp) / static_cast<double>(s.row.r);
  }
  return summary;
}

nlohmann::ordered_json to_json(const std::vector<RowSummary>& summary, const BenchOptions& options,
                               bool timing) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "sepnmf-bench";
  j["version"] = 1;
  j["seeds"] = options.seeds;
  j["base_seed"] = options.base_seed;
  j["solver"] = {{"step_t", options.solver.step_t},
                 {"ridge_delta", options.solver.ridge_delta},
                 {"anchor_tau", options.solver.anchor_tau},
                 {"max_iters", options.solver.max_iters},
                 {"equilibrate", options.solver.equilibrate},
                 {"compress", options.solver.compress},
                 {"skip_plateaus", options.solver.skip_plateaus},
                 {"polish_weights", options.solver.polish_weights}};
  ordered_json rows = ordered_json::array();
  for (const auto& s : summary) {
    ordered_json row;
    row["name"] = s.row.name;
    row["m"] = s.row.m;
    row["n"] = s.row.n;
    row["r"] = s.row.r;
    row["regime"] = std::string(to_string(s.row.regime));
    row["epsilon"] = s.row.epsilon;
    row["reference_tp"] = s.row.reference_tp ? ordered_json(*s.row.reference_tp) : ordered_json(nullptr);
    row["median_tp"] = s.median_tp;
    row["worst_tp"] = s.worst_tp;
    row["max_false_positives"] = s.max_fp;
    row["median_accuracy"] = s.median_accuracy;
    row["all_converged"] = s.all_converged;
    if (timing) {
      row["median_wall_ms"] = s.median_wall_ms;
      row["max_wall_ms"] = s.max_wall_ms;
    }
    ordered_json cells = ordered_json::array();
    for (const auto& c : s.cells) {
      ordered_json cell = {{"seed", c.seed},
                           {"true_positives", c.true_positives},
                           {"false_positives", c.false_positives},
                           {"found", c.found},
                           {"iterations", c.iterations},
                           {"plateau_iterations", c.plateau_iterations},
                           {"converged", c.converged},
                           {"diagonal_gap", c.diagonal_gap},
                           {"max_diag_offset", c.max_diag_offset},
                           {"max_phi2_violation", c.max_phi2_violation},
                           {"reconstruction_normalized", c.reconstruction_normalized},
                           {"reconstruction_original", c.reconstruction_original}};
      if (timing) cell["wall_ms"] = c.wall_ms;
      cells.push_back(std::move(cell));
    }
    row["cells"] = std::move(cells);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string format_table(const std::vector<RowSummary>& summary, bool timing) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-12s %5s %9s %9s %6s %5s %10s%s\n", "row", "data set", "r",
                "median", "worst", "ref", "fp", "converged", timing ? "  median ms" : "");
  out += line;
  for (const auto& s : summary) {
    const std::string dims = std::to_string(s.row.m) + "x" + std::to_string(s.row.n) + "(" +
                             std::string(to_string(s.row.regime)) + ")";
    const std::string median = std::to_string(s.median_tp) + "/" + std::to_string(s.row.r);
    const std::string worst = std::to_string(s.worst_tp) + "/" + std::to_string(s.row.r);
    const std::string ref = s.row.reference_tp ? std::to_string(*s.row.reference_tp) : "-";
    std::snprintf(line, sizeof line, "%-12s %-12s %5lld %9s %9s %6s %5lld %10s", s.row.name.c_str(),
                  dims.c_str(), static_cast<long long>(s.row.r), median.c_str(), worst.c_str(), ref.c_str(),
                  static_cast<long long>(s.max_fp), s.all_converged ? "yes" : "no");
    out += line;
    if (timing) {
      std::snprintf(line, sizeof line, "  %9.0f", s.median_wall_ms);
      out += line;
    }
    out += '\n';
  }
  return out;
}

int default_jobs() {
  if (const char* env = std::getenv("SEPNMF_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace sepnmf::bench
