#include "sepnmf/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "sepnmf/bench.hpp"
#include "sepnmf/io.hpp"
#include "sepnmf/oracle.hpp"
#include "sepnmf/report.hpp"

namespace sepnmf::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw NmfError(ErrorKind::Parse, "cannot create directory " + dir.string());
}

nlohmann::json load_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw NmfError(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

std::string list_one_based(const IndexList& xs, std::size_t limit = 12) {
  std::string s;
  for (std::size_t k = 0; k < xs.size() && k < limit; ++k) {
    if (k > 0) s += ",";
    s += std::to_string(xs[k] + 1);
  }
  if (xs.size() > limit) s += ",...";
  return "{" + s + "}";
}

class CheckLog {
 public:
  explicit CheckLog(std::ostream& out) : out_(out) {}

  void record(bool ok, const std::string& name, const std::string& detail) {
    out_ << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    failed_ = failed_ || !ok;
  }
  void skip(const std::string& name, const std::string& detail) {
    out_ << "SKIP " << name << ": " << detail << '\n';
  }
  bool failed() const { return failed_; }

 private:
  std::ostream& out_;
  bool failed_ = false;
};

}  // namespace

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto regime = parse_regime(args.regime);
    if (!regime) {
      err << "error: unknown regime '" << args.regime << "' (expected c1, c2 or c3)\n";
      return kInputError;
    }
    GenerateOptions opts;
    opts.shuffle = args.shuffle;
    const NmfInstance inst = generate_instance(args.m, args.n, args.r, *regime, args.seed, opts);
    ensure_dir(args.out_dir);
    io::write_matrix_csv(args.out_dir / "X.csv", inst.x_orig);
    io::write_text(args.out_dir / "meta.json", to_json(meta_of(inst)).dump(2) + "\n");
    out << "generated " << inst.m << "x" << inst.n << " " << to_string(inst.regime) << " instance, r = " << inst.r
        << ", seed = " << inst.seed << " -> " << args.out_dir.string() << '\n';
    return kSuccess;
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

int cmd_factorize(const FactorizeArgs& args, std::ostream& out, std::ostream& err) {
  RunReport rep;
  DenseMatrix x;
  NormalizedColumns norm;
  DedupeResult dd;
  try {
    args.config.validate();
    x = io::read_matrix_csv(args.input);
    norm = l1_normalize_columns(x);
    dd = dedupe_columns(norm.matrix, args.dedupe_tol);
    if (args.meta) {
      rep.instance = meta_from_json(load_json(*args.meta));
      if (rep.instance->m != x.rows() || rep.instance->n != x.cols())
        throw NmfError(ErrorKind::DimensionMismatch, "meta.json dimensions differ from the matrix");
    }
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  rep.input = args.input.string();
  rep.m = x.rows();
  rep.n = x.cols();
  rep.config = args.config;
  rep.dedupe_tol = args.dedupe_tol;
  for (const auto& [dropped, kept] : dd.dup_map) {
    rep.duplicates_removed.push_back(dropped);
    rep.duplicate_of.push_back(kept);
  }

  FactorizationResult res;
  const auto start = std::chrono::steady_clock::now();
  try {
    res = run_solver(dd.matrix, args.config);
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::NonFiniteState ? kNonConvergence : kInputError;
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  // Back to original column numbering; dropped duplicates copy their
  // representative's weights.
  for (Index a : res.anchors) rep.anchors_found.push_back(dd.keep[static_cast<std::size_t>(a)]);
  DenseMatrix w(res.w.rows(), x.cols());
  for (std::size_t c = 0; c < dd.keep.size(); ++c) w.col(dd.keep[c]) = res.w.col(static_cast<Index>(c));
  for (const auto& [dropped, kept] : dd.dup_map) w.col(dropped) = w.col(kept);
  const DenseMatrix w_orig = denormalize(rep.anchors_found, w, norm.scales);

  rep.iterations = res.iterations;
  rep.plateau_iterations = res.plateau_iterations;
  rep.converged = res.converged;
  rep.last_step_norm = res.last_step_norm;
  rep.primal_violation = res.primal_violation;
  rep.diagonal_gap = res.diagonal_gap;
  rep.row_scale = res.row_scale;
  rep.phi2 = validate_phi2(dd.matrix, res.c_final);
  if (!rep.anchors_found.empty()) {
    rep.reconstruction_normalized = reconstruction_residual(norm.matrix, rep.anchors_found, w);
    rep.reconstruction_original = reconstruction_residual(x, rep.anchors_found, w_orig);
  } else {
    rep.reconstruction_normalized = rep.reconstruction_original = 1.0;
  }
  if (rep.instance) rep.accuracy = score_anchors(rep.anchors_found, rep.instance->true_anchors);
  if (args.timing) rep.wall_time_ms = wall_ms;

  try {
    ensure_dir(args.out_dir);
    io::write_text(args.out_dir / "report.json", to_json(rep).dump(2) + "\n");
    io::write_anchors(args.out_dir / "anchors.txt", rep.anchors_found);
    io::write_matrix_csv(args.out_dir / "W.csv", w_orig);
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  out << "anchors (" << rep.anchors_found.size() << "): " << list_one_based(rep.anchors_found) << '\n';
  out << "iterations " << rep.iterations << (rep.converged ? ", converged" : ", NOT converged")
      << ", diagonal gap " << rep.diagonal_gap << '\n';
  if (rep.accuracy)
    out << "accuracy " << rep.accuracy->true_positives << "/" << rep.accuracy->r << ", false positives "
        << rep.accuracy->false_positives << '\n';
  if (!rep.converged) {
    err << "warning: iteration cap " << args.config.max_iters << " reached before convergence\n";
    return kNonConvergence;
  }
  return kSuccess;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  DenseMatrix x;
  DenseMatrix w_orig;
  RunReport rep;
  std::optional<InstanceMeta> meta;
  try {
    x = io::read_matrix_csv(args.input);
    rep = report_from_json(load_json(args.report));
    w_orig = io::read_matrix_csv(args.weights.value_or(args.report.parent_path() / "W.csv"));
    if (args.meta) meta = meta_from_json(load_json(*args.meta));
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  CheckLog log(out);
  const Index n = x.cols();
  const IndexList& anchors = rep.anchors_found;

  log.record(rep.converged, "converged", std::to_string(rep.iterations) + " iterations");

  const bool in_range = std::all_of(anchors.begin(), anchors.end(), [&](Index a) { return a >= 0 && a < n; });
  const bool shape_ok = rep.m == x.rows() && rep.n == n && in_range && !anchors.empty() &&
                        w_orig.rows() == static_cast<Index>(anchors.size()) && w_orig.cols() == n;
  log.record(shape_ok, "shape",
             "X " + std::to_string(x.rows()) + "x" + std::to_string(n) + ", W " + std::to_string(w_orig.rows()) +
                 "x" + std::to_string(w_orig.cols()) + ", |I| = " + std::to_string(anchors.size()));

  NormalizedColumns norm;
  try {
    norm = l1_normalize_columns(x);
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  if (shape_ok) {
    // C with rows I taken from the normalized weights, zero elsewhere.
    DenseMatrix c = DenseMatrix::Zero(n, n);
    for (std::size_t k = 0; k < anchors.size(); ++k)
      for (Index j = 0; j < n; ++j)
        c(anchors[k], j) = w_orig(static_cast<Index>(k), j) * norm.scales[anchors[k]] / norm.scales[j];
    const Phi2Report phi = validate_phi2(norm.matrix, c);
    const double eta = args.phi2_tol.value_or(10.0 * rep.config.epsilon);
    log.record(phi.feasible(eta), "phi2-feasibility",
               "equality " + io::format_double(phi.max_equality_violation) + ", column sum " +
                   io::format_double(phi.max_column_sum_violation) + ", min entry " +
                   io::format_double(phi.min_entry) + " (tol " + io::format_double(eta) + ")");
    const double rec = reconstruction_residual(x, anchors, w_orig);
    log.record(rec <= args.reconstruction_tol, "reconstruction",
               "relative residual " + io::format_double(rec) + " (tol " +
                   io::format_double(args.reconstruction_tol) + ")");
  } else {
    log.skip("phi2-feasibility", "inconsistent shapes");
    log.skip("reconstruction", "inconsistent shapes");
  }

  const std::optional<InstanceMeta>& truth = meta ? meta : rep.instance;
  if (truth) {
    log.record(truth->true_anchors == anchors, "anchor-match-truth",
               "found " + list_one_based(anchors) + ", expected " + list_one_based(truth->true_anchors));
  } else {
    log.skip("anchor-match-truth", "no ground truth supplied");
  }

  if (args.oracle == OracleMode::Off) {
    log.skip("anchor-match-oracle", "disabled");
  } else if (n > args.oracle_max_n) {
    log.skip("anchor-match-oracle",
             "n = " + std::to_string(n) + " exceeds oracle limit " + std::to_string(args.oracle_max_n));
  } else {
    const DedupeResult dd = dedupe_columns(norm.matrix, rep.dedupe_tol);
    IndexList expected;
    for (Index a : brute_force_extreme_rays(dd.matrix)) expected.push_back(dd.keep[static_cast<std::size_t>(a)]);
    log.record(expected == anchors, "anchor-match-oracle",
               "found " + list_one_based(anchors) + ", oracle " + list_one_based(expected));
  }
  return log.failed() ? kVerificationFailure : kSuccess;
}

namespace {

int cmd_bench(const std::string& rows_spec, const bench::BenchOptions& options, const fs::path& out_dir,
              bool timing, std::ostream& out, std::ostream& err) {
  try {
    const auto rows = bench::select_rows(rows_spec);
    const auto summary = bench::run_bench(rows, options);
    const std::string table = bench::format_table(summary, timing);
    ensure_dir(out_dir);
    io::write_text(out_dir / "bench.json", bench::to_json(summary, options, timing).dump(2) + "\n");
    io::write_text(out_dir / "bench.txt", table);
    out << table;
    return kSuccess;
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

void add_solver_flags(CLI::App* cmd, SolverConfig& cfg) {
  cmd->add_option("--epsilon", cfg.epsilon, "Stopping threshold")->capture_default_str();
  cmd->add_option("--t", cfg.step_t, "Constant dual step")->capture_default_str();
  cmd->add_option("--delta", cfg.ridge_delta, "Proximal ridge weight")->capture_default_str();
  cmd->add_option("--tau", cfg.anchor_tau, "Anchor acceptance tolerance on diag(C)")->capture_default_str();
  cmd->add_option("--max-iters", cfg.max_iters, "Iteration cap")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Price vector seed")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Separable NMF by a proximal multiplier method on the reduced LP"};
  app.name(argv.empty() ? "sepnmf" : argv.front());
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic separable instance");
  generate->add_option("--m", gen.m, "Rows")->required();
  generate->add_option("--n", gen.n, "Columns")->required();
  generate->add_option("--r", gen.r, "Planted anchors")->required();
  generate->add_option("--regime", gen.regime, "c1, c2 or c3")->required();
  generate->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  generate->add_option("--out", gen.out_dir, "Output directory")->required();
  generate->add_flag("--shuffle", gen.shuffle, "Permute columns (ground truth follows)");

  FactorizeArgs fac;
  std::string fac_meta;
  bool fac_no_equilibrate = false, fac_no_compress = false, fac_no_polish = false, fac_no_skip = false;
  auto* factorize = app.add_subcommand("factorize", "Find anchor columns and weights of a matrix CSV");
  factorize->add_option("--input", fac.input, "Matrix CSV")->required();
  factorize->add_option("--out", fac.out_dir, "Output directory")->required();
  factorize->add_option("--meta", fac_meta, "meta.json with ground truth");
  add_solver_flags(factorize, fac.config);
  factorize->add_option("--dedupe-tol", fac.dedupe_tol, "L1 distance treated as duplicate")->capture_default_str();
  factorize->add_flag("--no-equilibrate", fac_no_equilibrate, "Use the unscaled augmented system");
  factorize->add_flag("--no-compress", fac_no_compress, "Iterate on the full augmented matrix");
  factorize->add_flag("--no-polish", fac_no_polish, "Keep W as extracted from C");
  factorize->add_flag("--no-plateau-skip", fac_no_skip, "Step through every iteration of a plateau");
  factorize->add_flag("--timing", fac.timing, "Record wall time in report.json");

  VerifyArgs ver;
  std::string ver_weights, ver_meta;
  bool ver_force = false, ver_off = false;
  double ver_phi2 = 0.0;
  auto* verify = app.add_subcommand("verify", "Check a factorization against the oracle and ground truth");
  verify->add_option("--input", ver.input, "Matrix CSV")->required();
  verify->add_option("--report", ver.report, "report.json from factorize")->required();
  verify->add_option("--weights", ver_weights, "W.csv (default: beside the report)");
  verify->add_option("--meta", ver_meta, "meta.json with ground truth");
  auto* force = verify->add_flag("--oracle", ver_force, "Request the brute-force oracle check");
  verify->add_flag("--no-oracle", ver_off, "Skip the brute-force oracle check")->excludes(force);
  verify->add_option("--oracle-max-n", ver.oracle_max_n, "Largest n for the oracle")->capture_default_str();
  auto* phi2_opt = verify->add_option("--phi2-tol", ver_phi2, "Phi2 tolerance (default 10 * epsilon)");
  verify->add_option("--recon-tol", ver.reconstruction_tol, "Reconstruction tolerance")->capture_default_str();

  bench::BenchOptions bopt;
  bopt.jobs = bench::default_jobs();
  std::string rows_spec = "small";
  fs::path bench_out = "bench_out";
  bool no_timing = false, bench_no_equilibrate = false;
  auto* benchcmd = app.add_subcommand("bench", "Run accuracy-table rows over several seeds");
  benchcmd->add_option("--rows", rows_spec, "Rows or groups: small, medium, large, table, rsweep, all")
      ->capture_default_str();
  benchcmd->add_option("--seeds", bopt.seeds, "Instances per row")->capture_default_str()->check(CLI::PositiveNumber);
  benchcmd->add_option("--seed", bopt.base_seed, "First seed")->capture_default_str();
  benchcmd->add_option("--jobs", bopt.jobs, "Parallel cells (env SEPNMF_JOBS)")->capture_default_str();
  benchcmd->add_option("--out", bench_out, "Output directory")->capture_default_str();
  benchcmd->add_option("--t", bopt.solver.step_t, "Constant dual step")->capture_default_str();
  benchcmd->add_option("--delta", bopt.solver.ridge_delta, "Proximal ridge weight")->capture_default_str();
  benchcmd->add_option("--tau", bopt.solver.anchor_tau, "Anchor tolerance")->capture_default_str();
  benchcmd->add_option("--max-iters", bopt.solver.max_iters, "Iteration cap")->capture_default_str();
  benchcmd->add_flag("--no-equilibrate", bench_no_equilibrate, "Use the unscaled augmented system");
  benchcmd->add_flag("--no-timing", no_timing, "Omit wall times (byte-stable output)");

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  if (generate->parsed()) return cmd_generate(gen, out, err);
  if (factorize->parsed()) {
    if (!fac_meta.empty()) fac.meta = fac_meta;
    fac.config.equilibrate = !fac_no_equilibrate;
    fac.config.compress = !fac_no_compress;
    fac.config.polish_weights = !fac_no_polish;
    fac.config.skip_plateaus = !fac_no_skip;
    return cmd_factorize(fac, out, err);
  }
  if (verify->parsed()) {
    if (!ver_weights.empty()) ver.weights = ver_weights;
    if (!ver_meta.empty()) ver.meta = ver_meta;
    if (phi2_opt->count() > 0) ver.phi2_tol = ver_phi2;
    ver.oracle = ver_off ? OracleMode::Off : ver_force ? OracleMode::Force : OracleMode::Auto;
    return cmd_verify(ver, out, err);
  }
  bopt.solver.equilibrate = !bench_no_equilibrate;
  try {
    bopt.solver.validate();
  } catch (const NmfError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return cmd_bench(rows_spec, bopt, bench_out, !no_timing, out, err);
}

}  // namespace sepnmf::cli
