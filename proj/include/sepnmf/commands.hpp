#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sepnmf/datagen.hpp"
#include "sepnmf/prox_solver.hpp"

namespace sepnmf::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailure = 1,
  kInputError = 2,
  kNonConvergence = 3,
};

struct GenerateArgs {
  Index m = 0;
  Index n = 0;
  Index r = 0;
  std::string regime;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  bool shuffle = false;
};

// Writes <out>/X.csv (pre-normalization data) and <out>/meta.json.
int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);

struct FactorizeArgs {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> meta;
  SolverConfig config;
  double dedupe_tol = kDefaultDedupeTol;
  bool timing = false;
};

// Writes <out>/report.json, <out>/anchors.txt and <out>/W.csv.
// Exit 0 when converged, 3 on iteration cap or divergence, 2 on bad input.
int cmd_factorize(const FactorizeArgs& args, std::ostream& out, std::ostream& err);

enum class OracleMode { Auto, Force, Off };

struct VerifyArgs {
  std::filesystem::path input;
  std::filesystem::path report;
  std::optional<std::filesystem::path> weights;  // default: W.csv beside the report
  std::optional<std::filesystem::path> meta;
  OracleMode oracle = OracleMode::Auto;
  Index oracle_max_n = 200;
  std::optional<double> phi2_tol;  // default: 10 * epsilon from the report
  double reconstruction_tol = 1e-6;
};

// Prints one PASS/FAIL/SKIP line per check. Exit 0 iff nothing failed.
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

// Full command-line entry point (argv[0] is the program name).
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace sepnmf::cli
