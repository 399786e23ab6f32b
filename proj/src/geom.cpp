#include "spdsheaf/geom.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>

#include "spdsheaf/symvec.hpp"

namespace spdsheaf {

namespace {

Eigen::Vector3d centroid(const std::vector<Eigen::Vector3d>& points) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : points) c += p;
  return points.empty() ? c : Eigen::Vector3d(c / static_cast<double>(points.size()));
}

void require_finite(const PointCloud& cloud) {
  for (const auto& p : cloud.points) {
    if (!p.allFinite()) throw InvalidInput("point cloud has non-finite coordinates");
  }
}

Eigen::Vector3d least_aligned_axis(const Eigen::Vector3d& v) {
  Index axis = 0;
  v.cwiseAbs().minCoeff(&axis);
  return Eigen::Vector3d::Unit(axis);
}

}  // namespace

std::vector<std::pair<Index, Index>> radius_graph(const std::vector<Eigen::Vector3d>& points,
                                                  double radius) {
  std::vector<std::pair<Index, Index>> edges;
  const auto n = static_cast<Index>(points.size());
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if ((points[static_cast<std::size_t>(u)] - points[static_cast<std::size_t>(v)]).norm() < radius) {
        edges.emplace_back(u, v);
      }
    }
  }
  return edges;
}

std::vector<std::pair<Index, Index>> knn_graph(const std::vector<Eigen::Vector3d>& points, Index k) {
  const auto n = static_cast<Index>(points.size());
  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  for (Index u = 0; u < n; ++u) {
    std::vector<std::pair<double, Index>> dist;
    for (Index v = 0; v < n; ++v) {
      if (v != u) {
        dist.emplace_back((points[static_cast<std::size_t>(u)] - points[static_cast<std::size_t>(v)]).norm(), v);
      }
    }
    std::sort(dist.begin(), dist.end());
    for (Index i = 0; i < std::min<Index>(k, static_cast<Index>(dist.size())); ++i) {
      const Index v = dist[static_cast<std::size_t>(i)].second;
      adj[static_cast<std::size_t>(std::min(u, v))][static_cast<std::size_t>(std::max(u, v))] = true;
    }
  }
  std::vector<std::pair<Index, Index>> edges;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) edges.emplace_back(u, v);
    }
  }
  return edges;
}

Cochain0 lift_coordinates(const PointCloud& cloud, double eps_dir, double eps_spd) {
  if (cloud.points.empty()) throw InvalidInput("lift_coordinates: empty point cloud");
  if (!(eps_spd > 0.0) || !(eps_dir >= 0.0)) throw InvalidInput("lift_coordinates: bad eps");
  require_finite(cloud);
  const Eigen::Vector3d c = centroid(cloud.points);
  std::vector<Spd> out;
  out.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d u = p - c;
    const Eigen::Vector3d dir = u / (u.norm() + eps_dir);
    out.emplace_back(MatrixXd(dir * dir.transpose() + eps_spd * Eigen::Matrix3d::Identity()));
  }
  return Cochain0(std::move(out));
}

std::vector<LocalFrame> local_frames(const PointCloud& cloud) {
  require_finite(cloud);
  const auto n = static_cast<Index>(cloud.points.size());
  const Eigen::Vector3d c = centroid(cloud.points);
  double scale = 0.0;
  for (const auto& p : cloud.points) scale = std::max(scale, (p - c).norm());
  const double tiny = 1e-12 * std::max(scale, 1.0);

  std::vector<Eigen::Vector3d> aggregate(static_cast<std::size_t>(n), Eigen::Vector3d::Zero());
  for (const auto& [a, b] : cloud.edges) {
    const Eigen::Vector3d d = cloud.points[static_cast<std::size_t>(b)] - cloud.points[static_cast<std::size_t>(a)];
    const double len = d.norm();
    if (len <= tiny) continue;
    aggregate[static_cast<std::size_t>(a)] += d / len;
    aggregate[static_cast<std::size_t>(b)] -= d / len;
  }

  std::vector<LocalFrame> frames;
  frames.reserve(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) {
    bool fallback = false;
    const Eigen::Vector3d u = cloud.points[static_cast<std::size_t>(v)] - c;
    const Eigen::Vector3d& agg = aggregate[static_cast<std::size_t>(v)];
    Eigen::Vector3d v1;
    if (u.norm() > tiny) {
      v1 = u.normalized();
    } else {
      fallback = true;
      v1 = agg.norm() > 1e-12 ? agg.normalized() : Eigen::Vector3d::UnitX();
    }
    Eigen::Vector3d v2 = agg - agg.dot(v1) * v1;
    if (!(v2.norm() > 1e-6 * std::max(agg.norm(), 1e-300)) || agg.norm() <= 1e-12) {
      fallback = true;
      const Eigen::Vector3d axis = least_aligned_axis(v1);
      v2 = axis - axis.dot(v1) * v1;
    }
    v2.normalize();
    const Eigen::Vector3d v3 = v1.cross(v2);
    MatrixXd m(3, 3);
    m.col(0) = v1;
    m.col(1) = v2;
    m.col(2) = v3;
    frames.push_back({Orth(m), fallback});
  }
  return frames;
}

Cochain0 canonicalize(const Cochain0& sigma, const std::vector<LocalFrame>& frames) {
  if (static_cast<Index>(frames.size()) != sigma.size()) {
    throw DimensionMismatch("canonicalize: one frame per vertex required");
  }
  std::vector<Spd> out;
  out.reserve(sigma.values.size());
  for (std::size_t v = 0; v < frames.size(); ++v) {
    out.push_back(congruence(frames[v].frame.transpose(), sigma.values[v]));
  }
  return Cochain0(std::move(out));
}

std::vector<VectorXd> node_features(const Cochain0& sigma) {
  std::vector<VectorXd> out;
  out.reserve(sigma.values.size());
  for (const auto& x : sigma.values) out.push_back(sym_vec(spd_log(x)));
  return out;
}

LayerParams LayerParams::identity(Index stalk_dim, Index hidden) {
  LayerParams p;
  p.stalk_dim = stalk_dim;
  const Index in = 2 * sym_dim(stalk_dim);
  const Index out = stalk_dim * (stalk_dim - 1) / 2;
  p.isometry_seed = MatrixXd::Identity(stalk_dim, stalk_dim);
  p.mlp.hidden_weight = MatrixXd::Zero(hidden, in);
  p.mlp.hidden_bias = VectorXd::Zero(hidden);
  p.mlp.tail_weight = MatrixXd::Zero(out, hidden);
  p.mlp.tail_bias = VectorXd::Zero(out);
  p.mlp.head_weight = MatrixXd::Zero(out, hidden);
  p.mlp.head_bias = VectorXd::Zero(out);
  return p;
}

LayerParams LayerParams::random(Index stalk_dim, Rng& rng, Index hidden) {
  LayerParams p;
  p.stalk_dim = stalk_dim;
  const Index in = 2 * sym_dim(stalk_dim);
  const Index out = stalk_dim * (stalk_dim - 1) / 2;
  p.isometry_seed = random_gaussian(stalk_dim, stalk_dim, rng);
  p.mlp.hidden_weight = random_gaussian(hidden, in, rng, 1.0 / std::sqrt(double(in)));
  p.mlp.hidden_bias = random_gaussian(hidden, 1, rng, 0.5);
  p.mlp.tail_weight = random_gaussian(out, hidden, rng, 1.0 / std::sqrt(double(hidden)));
  p.mlp.tail_bias = random_gaussian(out, 1, rng, 0.5);
  p.mlp.head_weight = random_gaussian(out, hidden, rng, 1.0 / std::sqrt(double(hidden)));
  p.mlp.head_bias = random_gaussian(out, 1, rng, 0.5);
  return p;
}

void LayerParams::validate() const {
  const Index in = 2 * sym_dim(stalk_dim);
  const Index out = stalk_dim * (stalk_dim - 1) / 2;
  const Index hidden = mlp.hidden_weight.rows();
  const bool shapes_ok = isometry_seed.rows() == stalk_dim && isometry_seed.cols() == stalk_dim &&
                         mlp.hidden_weight.cols() == in && mlp.hidden_bias.size() == hidden &&
                         mlp.tail_weight.rows() == out && mlp.tail_weight.cols() == hidden &&
                         mlp.tail_bias.size() == out && mlp.head_weight.rows() == out &&
                         mlp.head_weight.cols() == hidden && mlp.head_bias.size() == out;
  if (!shapes_ok) throw DimensionMismatch("LayerParams: inconsistent parameter shapes");
  const bool finite = isometry_seed.allFinite() && mlp.hidden_weight.allFinite() &&
                      mlp.hidden_bias.allFinite() && mlp.tail_weight.allFinite() &&
                      mlp.tail_bias.allFinite() && mlp.head_weight.allFinite() &&
                      mlp.head_bias.allFinite();
  if (!finite) throw InvalidInput("LayerParams: non-finite parameters");
}

std::pair<Orth, Orth> sheaf_learner(const LayerParams& params, const VectorXd& h_tail,
                                    const VectorXd& h_head) {
  const auto& mlp = params.mlp;
  if (h_tail.size() + h_head.size() != mlp.hidden_weight.cols() || h_tail.size() != h_head.size()) {
    throw DimensionMismatch("sheaf_learner: feature dimension does not match parameters");
  }
  VectorXd input(h_tail.size() + h_head.size());
  input << h_tail, h_head;
  const VectorXd hidden = (mlp.hidden_weight * input + mlp.hidden_bias).array().tanh().matrix();
  const VectorXd s_tail = mlp.tail_weight * hidden + mlp.tail_bias;
  const VectorXd s_head = mlp.head_weight * hidden + mlp.head_bias;
  const Index n = params.stalk_dim;
  return {cayley<double>(skew_from_params<double>(s_tail, n)),
          cayley<double>(skew_from_params<double>(s_head, n))};
}

IsometryResult learnable_isometry(const MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() == 0 || !w.allFinite()) {
    throw InvalidInput("learnable_isometry: expected a finite square matrix");
  }
  const Index n = w.rows();
  MatrixXd current = w;
  bool perturbed = false;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::HouseholderQR<MatrixXd> qr(current);
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    const double floor = 1e-12 * std::max(1.0, current.norm());
    if (r.diagonal().cwiseAbs().minCoeff() > floor) {
      MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
      for (Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
      }
      return {Orth(q), perturbed};
    }
    perturbed = true;
    current += std::pow(10.0, attempt - 6) * std::max(1.0, w.norm()) * MatrixXd::Identity(n, n);
  }
  throw ParameterizationError("learnable_isometry: seed matrix is rank-deficient");
}

RankRow rank_row(Index layer, const Cochain0& sigma) {
  RankRow row;
  row.layer = layer;
  const auto count = static_cast<double>(sigma.values.size());
  for (const auto& x : sigma.values) {
    const VectorXd ev = sym_eig(x.matrix()).eigenvalues;
    const double e = erank_from_eigenvalues<double>(ev);
    row.node_eranks.push_back(e);
    row.mean_erank += e / count;
    row.mean_lambda2 += (ev.size() > 1 ? ev(1) : ev(0)) / count;
  }
  const auto logs = cochain_log(sigma);
  row.min_pairwise_lem = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < logs.size(); ++a) {
    for (std::size_t b = a + 1; b < logs.size(); ++b) {
      row.min_pairwise_lem =
          std::min(row.min_pairwise_lem, (logs[a].matrix() - logs[b].matrix()).norm());
    }
  }
  return row;
}

std::string RankTrace::to_csv() const {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "layer,mean_erank,mean_lambda2,min_pairwise_lem\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.layer << ',' << r.mean_erank << ',' << r.mean_lambda2 << ',' << r.min_pairwise_lem << '\n';
  }
  return out.str();
}

LayerOutput spd_sheaf_layer(const GraphTopology& topology, const Cochain0& sigma,
                            const LayerParams& params, const LayerOptions& options, Index layer) {
  params.validate();
  if (sigma.size() != topology.num_vertices) {
    throw DimensionMismatch("spd_sheaf_layer: cochain does not match topology");
  }
  const Index n = params.stalk_dim;
  const Orth q = learnable_isometry(params.isometry_seed).q;

  std::vector<Spd> rotated;
  rotated.reserve(sigma.values.size());
  for (const auto& x : sigma.values) {
    if (x.dim() != n) throw DimensionMismatch("spd_sheaf_layer: stalk dimension mismatch");
    rotated.push_back(congruence(q, x));
  }
  const Cochain0 sigma_rotated(std::move(rotated));

  // Maps are regenerated from the current features at every layer.
  const auto features = node_features(sigma);
  std::vector<SheafEdge> edges;
  edges.reserve(topology.edges.size());
  for (const auto& [t, h] : topology.edges) {
    if (options.identity_maps) {
      edges.push_back({t, h, Orth::identity(n), Orth::identity(n)});
    } else {
      auto [mt, mh] = sheaf_learner(params, features[static_cast<std::size_t>(t)],
                                    features[static_cast<std::size_t>(h)]);
      edges.push_back({t, h, std::move(mt), std::move(mh)});
    }
  }
  const SheafGraph sheaf(n, topology.num_vertices, std::move(edges));

  const auto delta = diffusion_delta(sheaf, sigma_rotated, options.normalize);
  Cochain0 out = apply_update(sheaf, sigma, delta, options.rule);
  if (options.apply_tg_re_eig) {
    for (auto& x : out.values) x = tg_re_eig(x, options.tg_delta);
  }
  RankRow row = rank_row(layer, out);
  return {std::move(out), std::move(row)};
}

StreamRun run_stream(const GraphTopology& topology, const Cochain0& input,
                     const std::vector<LayerParams>& layers, const LayerOptions& options) {
  StreamRun run;
  run.states.push_back(input);
  run.trace.rows.push_back(rank_row(0, input));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto out = spd_sheaf_layer(topology, run.states.back(), layers[l], options, static_cast<Index>(l + 1));
    run.states.push_back(std::move(out.sigma));
    run.trace.rows.push_back(std::move(out.row));
  }
  return run;
}

RankTrace rank_trace(const StreamRun& run) {
  RankTrace trace;
  for (std::size_t l = 0; l < run.states.size(); ++l) {
    trace.rows.push_back(rank_row(static_cast<Index>(l), run.states[l]));
  }
  return trace;
}

VectorXd pooled_descriptor(const Cochain0& sigma, double theta) {
  return sym_vec(spd_log(power_euclidean_mean<double>(sigma.values, theta)));
}

Cochain0 geometric_input(const PointCloud& cloud, bool canonicalize_frames) {
  Cochain0 lifted = lift_coordinates(cloud);
  if (!canonicalize_frames) return lifted;
  return canonicalize(lifted, local_frames(cloud));
}

VectorXd invariant_descriptor(const PointCloud& cloud, const std::vector<LayerParams>& layers,
                              double theta) {
  const auto run = run_stream(cloud.topology(), geometric_input(cloud, true), layers);
  return pooled_descriptor(run.states.back(), theta);
}

std::vector<LayerParams> random_layers(Index count, Index stalk_dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LayerParams> out;
  for (Index l = 0; l < count; ++l) out.push_back(LayerParams::random(stalk_dim, rng));
  return out;
}

std::vector<Eigen::Vector3d> random_cloud(Index count, const Eigen::Vector3d& stddev, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    pts.emplace_back(stddev.x() * unit(rng), stddev.y() * unit(rng), stddev.z() * unit(rng));
  }
  return pts;
}

PointCloud depth_instance(std::uint64_t seed) {
  Rng rng(seed);
  PointCloud cloud;
  cloud.points = random_cloud(10, Eigen::Vector3d::Constant(1.0), rng);
  cloud.edges = knn_graph(cloud.points, 4);
  return cloud;
}

DepthResult depth_experiment(const PointCloud& cloud, Index layers, std::uint64_t seed) {
  const GraphTopology topo = cloud.topology();
  const Cochain0 input = geometric_input(cloud, false);

  DepthResult result;
  result.heterogeneous = run_stream(topo, input, random_layers(layers, 3, seed)).trace;

  LayerOptions control;
  control.identity_maps = true;
  control.rule = UpdateRule::kNeighborMean;
  control.normalize = false;
  const std::vector<LayerParams> identity(static_cast<std::size_t>(layers), LayerParams::identity(3));
  result.control = run_stream(topo, input, identity, control).trace;
  return result;
}

}  // namespace spdsheaf
