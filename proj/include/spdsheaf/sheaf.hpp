#pragma once

// SPD-valued cellular sheaves on graphs with orthogonal-congruence restriction
// maps. Orientation convention: for an edge e = (tail, head),
//
//   (δσ)_e = exp( M_t log(σ_tail) M_t^T - M_h log(σ_head) M_h^T ),
//
// and the incidence index is I(tail, e) = 0, I(head, e) = 1, so the adjoint
// carries sign (-1)^{I(v,e)} = +1 at the tail. With this convention the
// adjoint formula satisfies the Green identity exactly.

#include <cstddef>
#include <utility>
#include <vector>

#include "spdsheaf/nullspace.hpp"
#include "spdsheaf/spd.hpp"

namespace spdsheaf {

struct SheafEdge {
  Index tail = 0;
  Index head = 0;
  Orth map_tail;
  Orth map_head;
};

class SheafGraph {
 public:
  SheafGraph() = default;

  /// Validates vertex indices, self-loops and map dimensions.
  SheafGraph(Index stalk_dim, Index num_vertices, std::vector<SheafEdge> edges);

  /// All restriction maps equal to the identity.
  static SheafGraph with_identity_maps(Index stalk_dim, Index num_vertices,
                                       const std::vector<std::pair<Index, Index>>& edges);

  Index stalk_dim() const { return stalk_dim_; }
  Index num_vertices() const { return num_vertices_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<SheafEdge>& edges() const { return edges_; }
  const SheafEdge& edge(Index e) const { return edges_.at(static_cast<std::size_t>(e)); }

  /// 0 if v is the tail of e, 1 if it is the head. Throws if v is not incident to e.
  int incidence_index(Index v, Index e) const;

  /// Edge indices incident to v, in edge order.
  const std::vector<Index>& incident_edges(Index v) const {
    return incidence_.at(static_cast<std::size_t>(v));
  }

  /// Restriction map of vertex v into edge e.
  const Orth& map(Index v, Index e) const;

  std::vector<std::pair<Index, Index>> edge_pairs() const;

 private:
  Index stalk_dim_ = 0;
  Index num_vertices_ = 0;
  std::vector<SheafEdge> edges_;
  std::vector<std::vector<Index>> incidence_;
};

/// SPD assignment to the cells of one dimension (0: vertices, 1: edges).
template <int Degree>
struct Cochain {
  std::vector<Spd> values;

  Cochain() = default;
  explicit Cochain(std::vector<Spd> v) : values(std::move(v)) {}

  static Cochain identity(Index cells, Index n) {
    return Cochain(std::vector<Spd>(static_cast<std::size_t>(cells), Spd::identity(n)));
  }

  Index size() const { return static_cast<Index>(values.size()); }
  const Spd& operator[](Index i) const { return values[static_cast<std::size_t>(i)]; }
  Spd& operator[](Index i) { return values[static_cast<std::size_t>(i)]; }
};

using Cochain0 = Cochain<0>;
using Cochain1 = Cochain<1>;

/// Cellwise log of a cochain.
template <int Degree>
std::vector<Sym> cochain_log(const Cochain<Degree>& c) {
  std::vector<Sym> out;
  out.reserve(c.values.size());
  for (const auto& v : c.values) out.push_back(spd_log(v));
  return out;
}

template <int Degree>
Cochain<Degree> cochain_exp(const std::vector<Sym>& logs) {
  std::vector<Spd> out;
  out.reserve(logs.size());
  for (const auto& s : logs) out.push_back(sym_exp(s));
  return Cochain<Degree>(std::move(out));
}

/// Cellwise ⊙.
template <int Degree>
Cochain<Degree> cochain_group_op(const Cochain<Degree>& a, const Cochain<Degree>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("cochain_group_op: cell-set mismatch");
  std::vector<Spd> out;
  out.reserve(a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) out.push_back(group_op(a.values[i], b.values[i]));
  return Cochain<Degree>(std::move(out));
}

/// Sum of per-cell pairings <log a_c, log b_c>_F.
template <int Degree>
double cochain_pairing(const Cochain<Degree>& a, const Cochain<Degree>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("cochain_pairing: cell-set mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += pairing(a.values[i], b.values[i]);
  return acc;
}

// Log-domain operators on Sym-valued cochains.
std::vector<Sym> log_coboundary(const SheafGraph& sheaf, const std::vector<Sym>& vertex_logs);
std::vector<Sym> log_adjoint(const SheafGraph& sheaf, const std::vector<Sym>& edge_logs);

Cochain1 coboundary(const SheafGraph& sheaf, const Cochain0& sigma);
Cochain0 adjoint(const SheafGraph& sheaf, const Cochain1& tau);
/// adjoint ∘ coboundary.
Cochain0 laplacian(const SheafGraph& sheaf, const Cochain0& sigma);

/// Dense matrix B with log(δσ) = B log(σ) in stacked sym_vec coordinates.
struct CoboundaryMatrix {
  MatrixXd matrix;  ///< (|E| m) × (|V| m)
  Index block = 0;  ///< m = n(n+1)/2

  VectorXd apply(const VectorXd& vertex_coords) const { return matrix * vertex_coords; }
};

CoboundaryMatrix coboundary_matrix(const SheafGraph& sheaf);

/// Stacked sym_vec coordinates of a Sym-valued cochain, and the inverse.
VectorXd stack_logs(const std::vector<Sym>& logs);
std::vector<Sym> unstack_logs(const VectorXd& coords, Index stalk_dim);

/// Orthonormal basis (columns, stacked log coordinates) of the global sections.
MatrixXd global_sections(const SheafGraph& sheaf, double rel_tol = kRankTolerance);

/// exp of one stacked log-coordinate vector.
Cochain0 section_from_coordinates(const VectorXd& coords, Index stalk_dim);

/// dim ker δ - dim ker δ^T, from the SVD ranks of B and B^T.
long sheaf_index(const SheafGraph& sheaf, double rel_tol = kRankTolerance);

/// Parallel transport of edge e from the tail stalk to the head stalk: M_h^T M_t.
Orth edge_transport(const SheafEdge& edge);

/// Holonomy of every fundamental cycle (one per non-tree edge of a BFS spanning
/// forest), expressed in the stalk of the component root.
std::vector<Orth> holonomy_reps(const SheafGraph& sheaf);

/// Orthonormal basis (columns, sym_vec coordinates) of {A ∈ Sym_n : ρ A ρ^T = A ∀ρ}.
MatrixXd holonomy_fixed_space(const std::vector<Orth>& reps, Index stalk_dim,
                              double rel_tol = kRankTolerance);

/// Connected component label per vertex, labels numbered in order of first vertex.
std::vector<Index> connected_components(Index num_vertices,
                                        const std::vector<std::pair<Index, Index>>& edges);

enum class UpdateRule {
  kLieResidual,   ///< log X_v + Δ_v
  kNeighborMean,  ///< log X_v - Δ_v / (deg v + 1): mean over the closed neighborhood
};

struct DiffusionOptions {
  bool normalize = true;  ///< scale Δ_v by 1 / max(1, spectral radius)
  UpdateRule rule = UpdateRule::kLieResidual;
};

/// Δ_v = log(L σ)_v evaluated without the exp/log round trip; optionally normalized.
std::vector<Sym> diffusion_delta(const SheafGraph& sheaf, const Cochain0& sigma, bool normalize);

/// Applies precomputed Δ to σ under the given update rule.
Cochain0 apply_update(const SheafGraph& sheaf, const Cochain0& sigma, const std::vector<Sym>& delta,
                      UpdateRule rule);

Cochain0 diffusion_step(const SheafGraph& sheaf, const Cochain0& sigma,
                        const DiffusionOptions& options = {});

/// Δ / max(1, spectral radius of Δ).
Sym normalize_update(const Sym& delta);

}  // namespace spdsheaf
