#pragma once

// Brute-force oracles and the property-suite runner. Oracles build their own
// dense operators from Kronecker products in a private Sym_n basis, and use
// only sym_eig from the core library; they never call the coboundary, adjoint
// or nullspace routines they check.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spdsheaf/euclid.hpp"
#include "spdsheaf/sheaf.hpp"

namespace spdsheaf::verify {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct Verdict {
  std::string name;
  Index trials = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::uint64_t seed = kDefaultSeed;
  std::string detail;
};

/// Residual bound per check. Counting checks (index, holonomy) compare integer
/// dimensions and use 0.
struct Tolerances {
  double isometry = 1e-8;
  double group_laws = 1e-10;
  double roundtrip = 1e-10;
  double cayley = 1e-10;
  double frechet = 1e-5;
  double coboundary_linearity = 1e-9;
  double green = 1e-8;
  double green_adversarial = 1e-6;
  double hodge = 1e-7;
  double index = 0.0;
  double holonomy = 0.0;
  double correspondence = 1e-7;
  double emergence = 0.10;  ///< allowed fraction of failing seeds
  double depth = 0.0;
  double invariance = 1e-7;
  double covgraph = 1e-10;
  double probe = 0.0;

  double get(const std::string& check) const;
  void set(const std::string& check, double value);
};

/// Every check name in suite order.
const std::vector<std::string>& check_names();

struct SuiteConfig {
  std::vector<std::string> checks;  ///< empty = all
  std::uint64_t seed = kDefaultSeed;
  std::vector<Index> stalk_dims;    ///< empty = per-check defaults
  Index max_vertices = 10;
  std::map<std::string, Index> trials;  ///< per-check overrides
  Tolerances tolerances;
  std::optional<std::filesystem::path> dump_dir;
  bool corrupt_map = false;  ///< feed a non-orthogonal map to the isometry check
  unsigned threads = 0;      ///< 0 = SPD_SHEAF_THREADS or hardware concurrency

  Index trials_for(const std::string& check, Index fallback) const;
};

SuiteConfig suite_config_from_json(const std::string& text);
std::string suite_config_to_json(const SuiteConfig& config);

/// Thread cap from SPD_SHEAF_THREADS, else hardware concurrency (at least 1).
unsigned default_thread_count();

// Dense oracles.

/// Orthonormal basis of Sym_n embedded in R^{n²} (columns), oracle-local ordering.
MatrixXd oracle_sym_basis(Index n);
/// log via sym_eig, expressed in oracle_sym_basis coordinates.
VectorXd oracle_log_coords(const Spd& p);
/// Coboundary in oracle coordinates assembled from P^T (M ⊗ M) P blocks.
MatrixXd oracle_coboundary_matrix(const SheafGraph& sheaf);
/// Kernel dimension by a full Jacobi SVD.
Index oracle_kernel_dim(const MatrixXd& a, double rel_tol = 1e-8);

Verdict oracle_green(const SheafGraph& sheaf, Index trials, std::uint64_t seed, double spread = 10.0,
                     double tol = 1e-8);
Verdict oracle_hodge(const SheafGraph& sheaf, double tol = 1e-7);
Verdict oracle_index(const SheafGraph& sheaf);
/// Requires a connected sheaf.
Verdict oracle_holonomy(const SheafGraph& sheaf);
Verdict oracle_correspondence(const EuclidSheaf& sheaf, std::uint64_t seed = kDefaultSeed,
                              double tol = 1e-7);

/// Runs one named check; throws InvalidInput for an unknown name.
Verdict run_check(const std::string& name, const SuiteConfig& config);

struct SuiteResult {
  std::vector<Verdict> verdicts;  ///< in requested check order
  int exit_code = 0;              ///< 0 all passed, 1 otherwise
};

SuiteResult run_suite(const SuiteConfig& config);

std::string report_json(const SuiteResult& result);
std::string report_table(const SuiteResult& result);

}  // namespace spdsheaf::verify
