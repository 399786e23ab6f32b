#pragma once

// Seeded random instances: SPD matrices, orthogonal matrices, graphs and
// sheaves. All generators take the engine explicitly.

#include <random>
#include <utility>
#include <vector>

#include "spdsheaf/euclid.hpp"
#include "spdsheaf/sheaf.hpp"

namespace spdsheaf {

using Rng = std::mt19937_64;

MatrixXd random_gaussian(Index rows, Index cols, Rng& rng, double stddev = 1.0);

Sym random_sym(Index n, Rng& rng, double stddev = 1.0);

/// Random SPD matrix with log-uniform eigenvalues in [1, spread] times a
/// random base scale, rotated by a Haar-ish random orthogonal matrix.
Spd random_spd(Index n, Rng& rng, double spread = 10.0);

/// Cayley transform of a random skew matrix with entries of the given scale.
Orth random_orthogonal(Index n, Rng& rng, double scale = 1.0);

/// Random rotation in SO(3).
Eigen::Matrix3d random_rotation3(Rng& rng);

/// Erdős–Rényi edges (u < v, tail = u) with probability p.
std::vector<std::pair<Index, Index>> random_graph_edges(Index num_vertices, double p, Rng& rng);

/// Random spanning tree on the vertices plus extra G(n, p) edges, so the graph is connected.
std::vector<std::pair<Index, Index>> random_connected_edges(Index num_vertices, double p, Rng& rng);

/// Random maps on the given edges with random orientation flips.
SheafGraph random_sheaf(Index stalk_dim, Index num_vertices,
                        const std::vector<std::pair<Index, Index>>& edges, Rng& rng,
                        double map_scale = 1.0);

/// Sheaf whose maps come from a random gauge (M_t = M_h g_h g_t^T style), so every
/// cycle has trivial holonomy but the maps are not the identity.
SheafGraph random_trivial_holonomy_sheaf(Index stalk_dim, Index num_vertices,
                                         const std::vector<std::pair<Index, Index>>& edges,
                                         Rng& rng);

Cochain0 random_cochain0(Index num_vertices, Index n, Rng& rng, double spread = 10.0);
Cochain1 random_cochain1(Index num_edges, Index n, Rng& rng, double spread = 10.0);

}  // namespace spdsheaf
