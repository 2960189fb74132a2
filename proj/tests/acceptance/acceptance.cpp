// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Detail lines are indented under their criterion.
//
//   acceptance [--quick] [--jobs N]
//
// --quick runs the medium rows with a single seed (development only).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sepnmf/bench.hpp"
#include "sepnmf/commands.hpp"
#include "sepnmf/datagen.hpp"
#include "sepnmf/gram.hpp"
#include "sepnmf/io.hpp"
#include "sepnmf/oracle.hpp"
#include "sepnmf/prox_solver.hpp"

using namespace sepnmf;
namespace fs = std::filesystem;

namespace {

constexpr double kTau = 0.05;

int failures = 0;

void verdict(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& line) {
  std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// Every converged run feeds criteria 4 and 5.
struct RunAudit {
  int runs = 0;
  int converged = 0;
  int dichotomy_fail = 0;
  int feasibility_fail = 0;
  double worst_gap = 1.0;
  double worst_offset = 0.0;
  double worst_phi2_ratio = 0.0;  // violation / (10 epsilon)
  double worst_recon_norm = 0.0;
  double worst_recon_orig = 0.0;

  void add(double epsilon, bool conv, double gap, double offset, double phi2, double rn, double ro) {
    ++runs;
    if (!conv) return;
    ++converged;
    worst_gap = std::min(worst_gap, gap);
    worst_offset = std::max(worst_offset, offset);
    worst_phi2_ratio = std::max(worst_phi2_ratio, phi2 / (10 * epsilon));
    worst_recon_norm = std::max(worst_recon_norm, rn);
    worst_recon_orig = std::max(worst_recon_orig, ro);
    if (!(offset <= kTau && gap > 0.5)) ++dichotomy_fail;
    if (!(phi2 <= 10 * epsilon && rn <= 1e-4 && ro <= 1e-6)) ++feasibility_fail;
  }

  void add(const bench::BenchRow& row, const bench::CellResult& c) {
    add(row.epsilon, c.converged, c.diagonal_gap, c.max_diag_offset, c.max_phi2_violation,
        c.reconstruction_normalized, c.reconstruction_original);
  }
};

RunAudit audit;

std::vector<bench::RowSummary> run_rows(const std::string& rows, int seeds, int jobs) {
  bench::BenchOptions opt;
  opt.seeds = seeds;
  opt.base_seed = 42;
  opt.jobs = jobs;
  const auto summary = bench::run_bench(bench::select_rows(rows), opt);
  for (const auto& s : summary)
    for (const auto& c : s.cells) audit.add(s.row, c);
  return summary;
}

std::string row_line(const bench::RowSummary& s) {
  std::ostringstream os;
  os << s.row.name << " " << s.row.m << "x" << s.row.n << " r=" << s.row.r << ": median " << s.median_tp << "/"
     << s.row.r << ", worst " << s.worst_tp << ", max fp " << s.max_fp;
  if (s.row.reference_tp) os << ", reference " << *s.row.reference_tp;
  os << ", max " << sci(s.max_wall_ms / 1000.0) << " s";
  Index it = 0;
  for (const auto& c : s.cells) it = std::max<Index>(it, c.iterations);
  os << ", max iterations " << it << (s.all_converged ? "" : ", NOT all converged");
  return os.str();
}

void table_criterion(int id, const std::string& title, const std::string& rows, int seeds, int slack,
                     double max_seconds, int jobs) {
  const auto summary = run_rows(rows, seeds, jobs);
  bool ok = true;
  for (const auto& s : summary) {
    note(row_line(s));
    const bool row_ok = s.median_tp >= *s.row.reference_tp - slack && s.max_wall_ms <= max_seconds * 1000.0 &&
                        (id != 1 || s.max_fp <= 1);
    ok = ok && row_ok;
  }
  std::ostringstream d;
  d << seeds << " seeds per row, median >= reference - " << slack;
  if (id == 1) d << ", false positives <= 1";
  d << ", each run <= " << max_seconds << " s";
  verdict(id, ok, title, d.str());
}

void oracle_equivalence() {
  std::mt19937_64 gen(2024);
  auto pick = [&](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(gen); };
  int agree = 0;
  int by_regime[3] = {0, 0, 0};
  const int total = 50;
  for (int k = 0; k < total; ++k) {
    const auto regime = static_cast<Regime>(k % 3);
    Index m = 0, n = 0, r = 0;
    switch (regime) {
      case Regime::C1:  // m >= n > r
        n = pick(3, 20);
        m = pick(n, 20);
        r = pick(2, std::min<Index>(10, n - 1));
        break;
      case Regime::C2:  // r <= m <= n, n > r
        m = pick(2, 20);
        r = pick(2, std::min<Index>(10, m));
        n = pick(std::max(m, r + 1), 30);
        break;
      case Regime::C3:  // m <= r < n, at least three rows so r > m rays can be extreme
        r = pick(3, 10);
        m = pick(3, r);
        n = pick(r + 1, 30);
        break;
    }
    const std::uint64_t seed = gen();
    const NmfInstance inst = generate_instance(m, n, r, regime, seed);
    SolverConfig cfg;
    cfg.seed = seed;
    const auto res = run_solver(inst.xn, cfg);
    const Phi2Report phi = validate_phi2(inst.xn, res.c_final);
    double offset = 0.0;
    for (Index i = 0; i < res.diag_values.size(); ++i)
      offset = std::max(offset, std::min(std::abs(res.diag_values(i)), std::abs(res.diag_values(i) - 1.0)));
    audit.add(cfg.epsilon, res.converged, res.diagonal_gap, offset,
              std::max({phi.max_equality_violation, phi.max_column_sum_violation, -phi.min_entry}),
              reconstruction_residual(inst.xn, res.anchors, res.w),
              reconstruction_residual(inst.x_orig, res.anchors, denormalize(res.anchors, res.w, inst.scales)));
    const bool same = res.anchors == brute_force_extreme_rays(inst.xn);
    if (same) {
      ++agree;
    } else {
      std::ostringstream os;
      os << "mismatch: " << to_string(regime) << " " << m << "x" << n << " r=" << r << " seed " << seed;
      note(os.str());
    }
    ++by_regime[k % 3];
  }
  std::ostringstream d;
  d << agree << "/" << total << " agree; " << by_regime[0] << " C1, " << by_regime[1] << " C2, " << by_regime[2]
    << " C3; m <= 20, n <= 30, r <= 10";
  verdict(3, agree == total, "solver anchors equal brute-force extreme rays", d.str());
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "sepnmf");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

bool same_bytes(const fs::path& a, const fs::path& b) { return io::read_text(a) == io::read_text(b); }

void unknown_r(int jobs) {
  const auto summary = run_rows("rsweep", 5, jobs);
  bool ok = true;
  for (const auto& s : summary) {
    note(row_line(s));
    ok = ok && s.worst_tp == s.row.r && s.max_fp == 0;
  }
  // The solver has no rank parameter; the CLI refuses one.
  const fs::path dir = fs::temp_directory_path() / "sepnmf_acceptance_r";
  fs::remove_all(dir);
  fs::create_directories(dir);
  io::write_matrix_csv(dir / "X.csv", DenseMatrix::Identity(3, 3));
  const bool refused =
      run_cli({"factorize", "--input", (dir / "X.csv").string(), "--out", (dir / "f").string(), "--r", "3"}) == 2;
  note(std::string("factorize --r rejected: ") + (refused ? "yes" : "no"));
  fs::remove_all(dir);
  verdict(6, ok && refused, "anchor count recovered without r",
          "r in {2, m/2, > m} at 20x60, 5 seeds each, one solver config, exact |I| = r");
}

void determinism() {
  const fs::path dir = fs::temp_directory_path() / "sepnmf_acceptance_det";
  fs::remove_all(dir);
  bool ran = true;
  for (const char* tag : {"a", "b"}) {
    const fs::path d = dir / tag;
    ran = ran && run_cli({"generate", "--m", "25", "--n", "100", "--r", "45", "--regime", "c3", "--seed", "11",
                          "--out", (d / "g").string()}) == 0;
    // Both factorizations read the same file: the input path is part of the report.
    ran = ran && run_cli({"factorize", "--input", (dir / "a" / "g" / "X.csv").string(), "--out",
                          (d / "f").string(), "--meta", (dir / "a" / "g" / "meta.json").string()}) == 0;
    ran = ran && run_cli({"bench", "--rows", "c2-small,rsweep-2", "--seeds", "2", "--no-timing", "--out",
                          (d / "b").string()}) == 0;
  }
  int files = 0;
  const std::vector<std::string> rels{"g/X.csv",  "g/meta.json", "f/report.json", "f/anchors.txt",
                                      "f/W.csv",  "b/bench.json", "b/bench.txt"};
  for (const auto& rel : rels) {
    const bool same = ran && same_bytes(dir / "a" / rel, dir / "b" / rel);
    if (!same) note("differs: " + rel);
    files += same ? 1 : 0;
  }
  fs::remove_all(dir);
  verdict(7, ran && files == static_cast<int>(rels.size()), "repeated runs are byte-identical",
          std::to_string(files) + "/" + std::to_string(rels.size()) +
              " files identical across generate, factorize and bench reruns");
}

using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// B = (A^T A + delta I) Z0 accumulated in extended precision and rounded
// once, so B carries no error beyond its own representation.
DenseMatrix forward_rhs(const DenseMatrix& a, const DenseMatrix& z0, double delta) {
  const ExtMatrix al = a.cast<long double>();
  const ExtMatrix zl = z0.cast<long double>();
  const ExtMatrix b = al.transpose() * (al * zl) + static_cast<long double>(delta) * zl;
  return b.cast<double>();
}

struct GramTally {
  int pass = 0;
  int deficient = 0;
  int exact_miss = 0;  // pairs where even an exact solve of the rounded B misses 1e-7
  double worst = 0.0;
  double worst_vs_exact = 0.0;
};

template <typename MakeA>
GramTally gram_trials(std::mt19937_64& gen, MakeA make_a) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double delta = 1e-8;
  GramTally t;
  for (int k = 0; k < 100; ++k) {
    const DenseMatrix a = make_a(k);
    const Index n = a.cols();
    if (Eigen::FullPivLU<DenseMatrix>(a).rank() < n) ++t.deficient;
    DenseMatrix z0(n, 1 + k % 4);
    for (Index j = 0; j < z0.cols(); ++j)
      for (Index i = 0; i < n; ++i) z0(i, j) = 2.0 * unit(gen) - 1.0;
    const DenseMatrix b = forward_rhs(a, z0, delta);
    const DenseMatrix z = gram_solve(gram_factor(a, delta), b);
    const double err = (z - z0).norm() / z0.norm();
    t.worst = std::max(t.worst, err);
    if (err <= 1e-7) ++t.pass;

    ExtMatrix g = a.cast<long double>().transpose() * a.cast<long double>();
    g.diagonal().array() += static_cast<long double>(delta);
    const ExtMatrix exact = Eigen::PartialPivLU<ExtMatrix>(g).solve(b.cast<long double>());
    const long double z0n = z0.cast<long double>().norm();
    if ((exact - z0.cast<long double>()).norm() / z0n > 1e-7L) ++t.exact_miss;
    t.worst_vs_exact =
        std::max(t.worst_vs_exact, static_cast<double>((z.cast<long double>() - exact).norm() / z0n));
  }
  return t;
}

void gram_criterion() {
  std::mt19937_64 gen(8);
  auto pick = [&](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(gen); };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto positive = [&](Index rows, Index cols) {
    DenseMatrix x(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) x(i, j) = 0.01 + unit(gen);
    return x;
  };

  // A = [Xn; 1^T] as the solver builds it, up to 50 x 80. Odd trials draw a
  // low-rank X so that A^T A is singular.
  const GramTally augmented = gram_trials(gen, [&](int k) {
    const Index m = pick(1, 49);
    const Index n = pick(1, 80);
    DenseMatrix x;
    if (k % 2 == 0) {
      x = positive(m, n);
    } else {
      const Index inner = pick(1, std::max<Index>(1, std::min(m, n) / 2));
      x = positive(m, inner) * positive(inner, n);
    }
    return build_augmented(l1_normalize_columns(x).matrix);
  });
  // Unstructured uniform [0, 1] matrices, reported for reference only: with
  // delta = 1e-8 the forward error of any double-precision B is about
  // u ||A||^2 / delta, which exceeds 1e-7 once ||A||_2^2 is above ~10.
  const GramTally raw = gram_trials(gen, [&](int) { return positive(pick(1, 50), pick(1, 80)); });
  note("reference, uniform [0,1] A up to 50x80: " + std::to_string(raw.pass) + "/100 within 1e-7, worst " +
       sci(raw.worst) + " (not gating)");

  note("extended-precision solve of the same rounded B misses 1e-7 on " + std::to_string(augmented.exact_miss) +
       "/100; solver vs that solve differs by at most " + sci(augmented.worst_vs_exact));

  std::ostringstream d;
  d << augmented.pass << "/100 within 1e-7 on augmented A up to 50x80, " << augmented.deficient
    << " rank-deficient, worst " << sci(augmented.worst) << ", delta 1e-8";
  verdict(8, augmented.pass == 100, "Gram forward-construct/solve-back", d.str());
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  int jobs = bench::default_jobs();
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--quick") quick = true;
    if (arg == "--jobs" && i + 1 < argc) jobs = std::max(1, std::atoi(argv[++i]));
  }

  try {
    table_criterion(1, "accuracy-table small rows", "small", 5, 1, 30.0, jobs);
    table_criterion(2, "accuracy-table medium rows", "medium", quick ? 1 : 5, 2, 300.0, jobs);
    oracle_equivalence();
    unknown_r(jobs);

    {
      std::ostringstream d;
      d << audit.converged << "/" << audit.runs << " runs converged; worst gap " << sci(audit.worst_gap)
        << ", worst distance of a diagonal from {0,1} " << sci(audit.worst_offset);
      verdict(4, audit.converged > 0 && audit.dichotomy_fail == 0, "diagonal dichotomy", d.str());
    }
    {
      std::ostringstream d;
      d << audit.converged << " converged runs; worst phi2 / (10 eps) " << sci(audit.worst_phi2_ratio)
        << ", reconstruction " << sci(audit.worst_recon_norm) << " normalized, " << sci(audit.worst_recon_orig)
        << " original";
      verdict(5, audit.converged > 0 && audit.feasibility_fail == 0, "feasibility and reconstruction", d.str());
    }

    determinism();
    gram_criterion();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
