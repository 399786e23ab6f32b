#pragma once

// Geometric diffusion stream: coordinate lifting, equivariant local frames,
// learned Cayley restriction maps, layered SPD sheaf convolution, pooling and
// effective-rank diagnostics.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spdsheaf/random.hpp"
#include "spdsheaf/sheaf.hpp"

namespace spdsheaf {

struct GraphTopology {
  Index num_vertices = 0;
  std::vector<std::pair<Index, Index>> edges;  ///< (tail, head)
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::pair<Index, Index>> edges;

  GraphTopology topology() const { return {static_cast<Index>(points.size()), edges}; }
};

/// Pairs closer than `radius`, oriented from lower to higher index.
std::vector<std::pair<Index, Index>> radius_graph(const std::vector<Eigen::Vector3d>& points,
                                                  double radius);
/// Symmetrized k-nearest-neighbour graph, oriented from lower to higher index.
std::vector<std::pair<Index, Index>> knn_graph(const std::vector<Eigen::Vector3d>& points, Index k);

inline constexpr double kDirectionEps = 1e-8;

/// X_v = û û^T + eps_spd I with û = (p_v - centroid) / (||p_v - centroid|| + eps_dir).
Cochain0 lift_coordinates(const PointCloud& cloud, double eps_dir = kDirectionEps,
                          double eps_spd = kEigenFloor);

struct LocalFrame {
  Orth frame;             ///< columns v1, v2, v3
  bool fallback = false;  ///< degenerate geometry; frame is not rotation-equivariant
};

std::vector<LocalFrame> local_frames(const PointCloud& cloud);

/// M_v^T X_v M_v.
Cochain0 canonicalize(const Cochain0& sigma, const std::vector<LocalFrame>& frames);

/// vec_upper(log X_v) with sqrt(2)-scaled off-diagonals.
std::vector<VectorXd> node_features(const Cochain0& sigma);

/// One-hidden-layer perceptron [h_tail ‖ h_head] → two heads of n(n-1)/2 skew parameters.
struct SheafMlp {
  MatrixXd hidden_weight;
  VectorXd hidden_bias;
  MatrixXd tail_weight;
  VectorXd tail_bias;
  MatrixXd head_weight;
  VectorXd head_bias;
};

inline constexpr Index kDefaultHiddenWidth = 32;

struct LayerParams {
  Index stalk_dim = 3;
  MatrixXd isometry_seed;  ///< W; the layer isometry is the sign-fixed Q of W = QR
  SheafMlp mlp;

  /// W = I and all perceptron weights zero: every map is the identity.
  static LayerParams identity(Index stalk_dim, Index hidden = kDefaultHiddenWidth);
  static LayerParams random(Index stalk_dim, Rng& rng, Index hidden = kDefaultHiddenWidth);

  void validate() const;
};

/// (M_tail→e, M_head→e) for an edge from its endpoint features.
std::pair<Orth, Orth> sheaf_learner(const LayerParams& params, const VectorXd& h_tail,
                                    const VectorXd& h_head);

struct IsometryResult {
  Orth q;
  bool perturbed = false;  ///< W was numerically rank-deficient and was perturbed
};

/// W = QR, Q · sign(diag R).
IsometryResult learnable_isometry(const MatrixXd& w);

struct LayerOptions {
  bool identity_maps = false;
  UpdateRule rule = UpdateRule::kLieResidual;
  bool normalize = true;
  bool apply_tg_re_eig = true;
  double tg_delta = 0.1;
};

struct RankRow {
  Index layer = 0;
  double mean_erank = 0.0;
  double mean_lambda2 = 0.0;
  double min_pairwise_lem = 0.0;  ///< +inf with fewer than two vertices
  std::vector<double> node_eranks;
};

struct RankTrace {
  std::vector<RankRow> rows;

  /// Columns layer, mean_erank, mean_lambda2, min_pairwise_lem.
  std::string to_csv() const;
};

RankRow rank_row(Index layer, const Cochain0& sigma);

struct LayerOutput {
  Cochain0 sigma;
  RankRow row;
};

/// Isometry, learned-map Laplacian update and TgReEig. `layer` labels the trace row.
LayerOutput spd_sheaf_layer(const GraphTopology& topology, const Cochain0& sigma,
                            const LayerParams& params, const LayerOptions& options = {},
                            Index layer = 1);

struct StreamRun {
  std::vector<Cochain0> states;  ///< states[0] is the input
  RankTrace trace;
};

StreamRun run_stream(const GraphTopology& topology, const Cochain0& input,
                     const std::vector<LayerParams>& layers, const LayerOptions& options = {});

/// Recomputes the trace from the stored states.
RankTrace rank_trace(const StreamRun& run);

/// sym_vec(log of the power-Euclidean mean).
VectorXd pooled_descriptor(const Cochain0& sigma, double theta = 0.5);

/// Lift, optionally canonicalize in local frames.
Cochain0 geometric_input(const PointCloud& cloud, bool canonicalize_frames);

/// Lift → canonicalize → layers → pooled descriptor.
VectorXd invariant_descriptor(const PointCloud& cloud, const std::vector<LayerParams>& layers,
                              double theta = 0.5);

std::vector<LayerParams> random_layers(Index count, Index stalk_dim, std::uint64_t seed);

/// Gaussian cloud with per-axis standard deviations.
std::vector<Eigen::Vector3d> random_cloud(Index count, const Eigen::Vector3d& stddev, Rng& rng);

struct DepthResult {
  RankTrace heterogeneous;  ///< learned random maps per layer, Lie residual update
  RankTrace control;        ///< identity maps, neighbourhood-mean update
};

/// Both runs start from the same uncanonicalized lift of `cloud`.
DepthResult depth_experiment(const PointCloud& cloud, Index layers, std::uint64_t seed);

/// The fixed 10-node instance used for depth experiments.
PointCloud depth_instance(std::uint64_t seed);

}  // namespace spdsheaf
