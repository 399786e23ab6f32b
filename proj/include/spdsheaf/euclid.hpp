#pragma once

// Vector-stalk sheaves, the embedding Φ_ε(x) = x x^T + ε I, and executable
// checks relating Euclidean and SPD global sections.

#include <string>
#include <vector>

#include "spdsheaf/sheaf.hpp"

namespace spdsheaf {

/// Sheaf with stalks R^n and orthogonal restriction maps x ↦ M x. Shares the
/// graph, orientation and map storage of SheafGraph.
class EuclidSheaf {
 public:
  EuclidSheaf() = default;
  explicit EuclidSheaf(SheafGraph structure) : structure_(std::move(structure)) {}

  const SheafGraph& structure() const { return structure_; }
  Index stalk_dim() const { return structure_.stalk_dim(); }
  Index num_vertices() const { return structure_.num_vertices(); }
  Index num_edges() const { return structure_.num_edges(); }

 private:
  SheafGraph structure_;
};

using VecCochain0 = std::vector<VectorXd>;

/// (δx)_e = M_t x_tail - M_h x_head.
std::vector<VectorXd> euclid_coboundary(const EuclidSheaf& sheaf, const VecCochain0& x);

/// (|E| n) × (|V| n) matrix of euclid_coboundary.
MatrixXd euclid_coboundary_matrix(const EuclidSheaf& sheaf);

/// Orthonormal basis (columns, stacked vertex vectors) of ker δ.
MatrixXd euclid_sections(const EuclidSheaf& sheaf, double rel_tol = kRankTolerance);

VecCochain0 unstack_vectors(const VectorXd& coords, Index stalk_dim);

Spd embed_phi(const VectorXd& x, double eps = kEigenFloor);
Cochain0 embed_phi(const VecCochain0& x, double eps = kEigenFloor);

/// SPD sheaf reusing every M as a congruence map.
SheafGraph matched_spd_sheaf(const EuclidSheaf& sheaf);

enum class ConverseStatus {
  kPassed,
  kFailed,
  kNoSpdSection,    ///< δ_G Φ(x) ≠ I, so the converse has nothing to check
  kGaugeClassOnly,  ///< maps do not commute with entrywise |·|
};

std::string to_string(ConverseStatus status);

struct CorrespondenceReport {
  bool forward_passed = false;
  double forward_residual = 0.0;             ///< max over edges of d_LE((δ_G Φ(x))_e, I)
  std::vector<double> edge_residuals;        ///< per-edge d_LE to the identity
  ConverseStatus converse = ConverseStatus::kNoSpdSection;
  double converse_residual = 0.0;            ///< max ||δ_F |x|||_∞ when checked
};

/// True when M is a permutation matrix (entries exactly 0 or 1), the maps for
/// which M|x| = |Mx| and the converse direction is meaningful.
bool commutes_with_abs(const Orth& m);

CorrespondenceReport check_kernel_correspondence(const EuclidSheaf& euclid, const SheafGraph& spd,
                                                 const VecCochain0& x, double eps = kEigenFloor,
                                                 double tol = 1e-7);

struct StrictnessWitness {
  Cochain0 section;
  double max_residual = 0.0;      ///< max over edges of d_LE((δσ)_e, I)
  Index distinct_eigenvalues = 0;  ///< of the witness value at vertex 0
  bool outside_image = false;      ///< more than two distinct eigenvalues
  bool passed = false;
};

/// Transported constant section with spectrum (1, 2, ..., n). Requires trivial
/// holonomy and n >= 3; throws NotApplicable otherwise.
StrictnessWitness strictness_witness(const SheafGraph& sheaf, double tol = 1e-7);

/// Number of distinct eigenvalues, clustering those within rel_tol of each other.
Index distinct_eigenvalue_count(const Spd& p, double rel_tol = 1e-6);

struct IndexJump {
  Index spd_kernel_dim = 0;
  Index euclid_kernel_dim = 0;
  Index components = 0;
  Index expected = 0;  ///< components * n(n-1)/2
};

/// Measured dim ker δ_G - dim ker δ_F on the matched pair.
IndexJump index_jump(const EuclidSheaf& sheaf, double rel_tol = kRankTolerance);

}  // namespace spdsheaf
