#pragma once

// Time-frequency covariance graphs: one SPD node per (time, frequency)
// segment, edges between segments that are local in the time-frequency plane
// and close under the affine-invariant metric, with RBF weights.

#include <cstdint>
#include <vector>

#include "spdsheaf/sheaf.hpp"

namespace spdsheaf {

struct Segment {
  MatrixXd data;  ///< channels × samples, already band-pass filtered
  double t_mid = 0.0;  ///< seconds
  double f_mid = 0.0;  ///< Hz
};

struct TFGraphConfig {
  double eps1 = 1.0;       ///< time window width (s)
  double eps2 = 4.0;       ///< frequency window height (Hz)
  double eps = 1.0;        ///< threshold on squared AIRM distance
  double t_bw = 1.0;       ///< RBF bandwidth
  double shrinkage = 1e-3;
  bool normalize_by_samples = false;  ///< use X X^T / T instead of X X^T

  void validate() const;
};

/// X X^T (optionally / T) plus shrinkage * tr(S)/n * I.
Spd segment_covariance(const Segment& seg, double shrinkage = 1e-3, bool normalize_by_samples = false);

struct TFGraph {
  SheafGraph graph;             ///< identity restriction maps; tail = earlier segment
  Cochain0 nodes;               ///< segment covariances in input order
  std::vector<double> weights;  ///< per edge, exp(-d²/t_bw)
  MatrixXd adjacency;           ///< symmetric |V|×|V|, 0 for non-edges
};

/// Edges are sorted by (tail t_mid, tail f_mid, head t_mid, head f_mid, indices).
TFGraph build_tf_graph(const std::vector<Segment>& segments, const TFGraphConfig& cfg);

/// Seeded synthetic recording: `times` × `bands` segments on a regular grid
/// (t step 0.5 s from 0, f step 4 Hz from 6 Hz). Each band mixes white noise
/// through its own slowly varying channel mixing matrix.
std::vector<Segment> synthetic_segments(Index times, Index bands, Index channels, Index samples,
                                        std::uint64_t seed);

}  // namespace spdsheaf
