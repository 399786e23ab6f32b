#include "spdsheaf/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "spdsheaf/covgraph.hpp"
#include "spdsheaf/geom.hpp"
#include "spdsheaf/io.hpp"
#include "spdsheaf/probe.hpp"
#include "spdsheaf/random.hpp"
#include "spdsheaf/symvec.hpp"

namespace spdsheaf::verify {

namespace {

constexpr double kFailed = std::numeric_limits<double>::max();

// FNV-1a, so per-check streams do not depend on suite order.
std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Rng check_rng(const std::string& name, std::uint64_t seed) {
  const std::uint64_t h = name_hash(name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

Index pick(Rng& rng, const std::vector<Index>& values) {
  return values[static_cast<std::size_t>(uniform_index(rng, 0, static_cast<Index>(values.size()) - 1))];
}

MatrixXd oracle_log(const MatrixXd& p) {
  const auto d = sym_eig(p);
  return d.eigenvectors * d.eigenvalues.array().log().matrix().asDiagonal() * d.eigenvectors.transpose();
}

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return k;
}

VectorXd stacked_log_coords(const std::vector<Spd>& values) {
  if (values.empty()) return VectorXd(0);
  const Index m = sym_dim(values.front().dim());
  VectorXd out(m * static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out.segment(static_cast<Index>(i) * m, m) = oracle_log_coords(values[i]);
  return out;
}

Index components_of(Index nv, const std::vector<SheafEdge>& edges) {
  std::vector<Index> parent(static_cast<std::size_t>(nv));
  std::iota(parent.begin(), parent.end(), Index{0});
  std::function<Index(Index)> find = [&](Index v) {
    auto& p = parent[static_cast<std::size_t>(v)];
    return p == v ? v : (p = find(p));
  };
  Index count = nv;
  for (const auto& e : edges) {
    const Index a = find(e.tail);
    const Index b = find(e.head);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --count;
    }
  }
  return count;
}

MatrixXd oracle_euclid_matrix(const SheafGraph& g) {
  const Index n = g.stalk_dim();
  MatrixXd d = MatrixXd::Zero(g.num_edges() * n, g.num_vertices() * n);
  for (Index e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edge(e);
    d.block(e * n, edge.tail * n, n, n) += edge.map_tail.matrix();
    d.block(e * n, edge.head * n, n, n) -= edge.map_head.matrix();
  }
  return d;
}

MatrixXd oracle_kernel_basis(const MatrixXd& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) return MatrixXd::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double cut = rel_tol * (s.size() > 0 ? s(0) : 0.0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) rank += (s(i) > cut && s(i) > 0.0) ? 1 : 0;
  return svd.matrixV().rightCols(a.cols() - rank);
}

Verdict make(const std::string& name, Index trials, double residual, double tol, std::uint64_t seed,
             std::string detail = {}) {
  Verdict v;
  v.name = name;
  v.trials = trials;
  v.max_residual = std::isfinite(residual) ? residual : kFailed;
  v.tolerance = tol;
  v.passed = v.max_residual <= tol;
  v.seed = seed;
  v.detail = std::move(detail);
  return v;
}

std::vector<Index> dims_or(const SuiteConfig& cfg, std::vector<Index> fallback) {
  return cfg.stalk_dims.empty() ? fallback : cfg.stalk_dims;
}

void dump_sheaf(const SuiteConfig& cfg, const std::string& check, Index trial, const SheafGraph& sheaf) {
  if (!cfg.dump_dir) return;
  const auto path = *cfg.dump_dir / (check + "-" + std::to_string(trial) + ".json");
  io::write_text_file(path, io::sheaf_to_json(sheaf).dump(2) + "\n");
}

SheafGraph random_instance(Rng& rng, Index n, Index max_vertices, bool connected) {
  const Index nv = uniform_index(rng, 2, std::max<Index>(2, max_vertices));
  const auto edges = connected ? random_connected_edges(nv, 0.3, rng) : random_graph_edges(nv, 0.35, rng);
  return random_sheaf(n, nv, edges, rng);
}

// Individual checks.

Verdict check_isometry(const SuiteConfig& cfg) {
  const std::string name = "isometry";
  Rng rng = check_rng(name, cfg.seed);
  const Index trials = cfg.trials_for(name, 200);
  double worst = 0.0;
  Index count = 0;
  for (Index n : dims_or(cfg, {2, 3, 5})) {
    for (Index t = 0; t < trials; ++t, ++count) {
      const Spd x = random_spd(n, rng);
      const Spd y = random_spd(n, rng);
      const Orth m = random_orthogonal(n, rng, 2.0);
      Spd mx;
      Spd my;
      if (cfg.corrupt_map) {
        const MatrixXd bad = m.matrix() + 0.25 * random_gaussian(n, n, rng);
        mx = Spd(bad * x.matrix() * bad.transpose());
        my = Spd(bad * y.matrix() * bad.transpose());
      } else {
        mx = congruence(m, x);
        my = congruence(m, y);
      }
      const double r = std::max(std::abs(dist_airm(mx, my) - dist_airm(x, y)),
                                std::abs(dist_lem(mx, my) - dist_lem(x, y)));
      if (r > cfg.tolerances.isometry && cfg.dump_dir && worst <= cfg.tolerances.isometry) {
        io::Json j{{"n", n}, {"x", io::matrix_to_json(x.matrix())}, {"y", io::matrix_to_json(y.matrix())},
                   {"mx", io::matrix_to_json(mx.matrix())}, {"my", io::matrix_to_json(my.matrix())}};
        io::write_text_file(*cfg.dump_dir / (name + "-" + std::to_string(count) + ".json"), j.dump(2) + "\n");
      }
      worst = std::max(worst, r);
    }
  }
  return make(name, count, worst, cfg.tolerances.isometry, cfg.seed,
              cfg.corrupt_map ? "non-orthogonal map injected" : "AIRM and LEM");
}

Verdict check_group_laws(const SuiteConfig& cfg) {
  const std::string name = "group_laws";
  Rng rng = check_rng(name, cfg.seed);
  const Index trials = cfg.trials_for(name, 100);
  double worst = 0.0;
  Index count = 0;
  for (Index n : dims_or(cfg, {2, 3, 5})) {
    for (Index t = 0; t < trials; ++t, ++count) {
      const Spd p = random_spd(n, rng);
      const Spd q = random_spd(n, rng);
      const Spd r = random_spd(n, rng);
      const Spd id = Spd::identity(n);
      worst = std::max({worst, dist_lem(group_op(p, q), group_op(q, p)),
                        dist_lem(group_op(group_op(p, q), r), group_op(p, group_op(q, r))),
                        dist_lem(group_op(p, id), p), dist_lem(group_op(p, group_inv(p)), id)});
    }
  }
  return make(name, count, worst, cfg.tolerances.group_laws, cfg.seed, "commutativity, associativity, identity, inverse");
}

Verdict check_roundtrip(const SuiteConfig& cfg) {
  const std::string name = "roundtrip";
  Rng rng = check_rng(name, cfg.seed);
  const Index trials = cfg.trials_for(name, 100);
  double worst = 0.0;
  Index count = 0;
  for (Index n : dims_or(cfg, {2, 3, 5})) {
    for (Index t = 0; t < trials; ++t, ++count) {
      const Spd p = random_spd(n, rng);
      const double rel = (sym_exp(spd_log(p)).matrix() - p.matrix()).norm() / p.matrix().norm();
      const Sym s = random_sym(n, rng);
      const double vec = (sym_unvec<double>(sym_vec(s), n).matrix() - s.matrix()).norm();
      const double up = (from_log_upper<double>(log_upper(p)).matrix() - p.matrix()).norm() / p.matrix().norm();
      worst = std::max({worst, rel, vec, up});
    }
  }
  return make(name, count, worst, cfg.tolerances.roundtrip, cfg.seed, "exp(log P), sym_vec, log_upper");
}

Verdict check_cayley(const SuiteConfig& cfg) {
  const std::string name = "cayley";
  Rng rng = check_rng(name, cfg.seed);
  const Index trials = cfg.trials_for(name, 100);
  double worst = 0.0;
  Index count = 0;
  for (Index n : dims_or(cfg, {2, 3, 5})) {
    for (Index t = 0; t < trials; ++t, ++count) {
      const MatrixXd a = random_gaussian(n, n, rng, 2.0);
      const MatrixXd s = a - a.transpose();
      const MatrixXd q = cayley<double>(s).matrix();
      const MatrixXd id = MatrixXd::Identity(n, n);
      // Independent form: (I + S/2)(I - S/2)^{-1}; the factors commute.
      const MatrixXd alt = (id + 0.5 * s) * (id - 0.5 * s).inverse();
      const double det_gap = std::abs(q.determinant() - 1.0);
      worst = std::max({worst, (q.transpose() * q - id).norm(), (q - alt).norm(), det_gap});
    }
  }
  return make(name, count, worst, cfg.tolerances.cayley, cfg.seed, "orthogonality, determinant, commuted form");
}

Verdict check_frechet(const SuiteConfig& cfg) {
  const std::string name = "frechet";
  Rng rng = check_rng(name, cfg.seed);
  const Index trials = cfg.trials_for(name, 100);
  const double gaps[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (Index t = 0; t < trials; ++t) {
    const Index n = cfg.stalk_dims.empty() ? 2 + t % 3 : pick(rng, cfg.stalk_dims);
    VectorXd ev(n);
    for (Index i = 0; i < n; ++i) ev(i) = std::exp(3.0 * unit(rng) - 1.5);
    if (n >= 2) ev(1) = ev(0) * (1.0 + gaps[t % 6]);
    const MatrixXd q = random_orthogonal(n, rng, 2.0).matrix();
    const Spd p(q * ev.asDiagonal() * q.transpose());
    const Sym v = random_sym(n, rng);
    const MatrixXd analytic = frechet_log(p, v).matrix();
    const double h = 1e-5 * ev.minCoeff();
    const MatrixXd fd = (oracle_log(p.matrix() + h * v.matrix()) - oracle_log(p.matrix() - h * v.matrix())) / (2.0 * h);
    worst = std::max(worst, (analytic - fd).norm() / std::max(fd.norm(), 1e-300));
  }
  return make(name, trials, worst, cfg.tolerances.frechet, cfg.seed, "relative error vs central differences, gaps to 1e-6");
}

Verdict check_coboundary_linearity(const SuiteConfig& cfg) {
  const std::string name = "coboundary_linearity";
  Rng rng = check_rng(name, cfg.seed);
  const Index trials = cfg.trials_for(name, 100);
  const auto dims = dims_or(cfg, {1, 2, 3});
  double worst = 0.0;
  for (Index t = 0; t < trials; ++t) {
    const SheafGraph sheaf = random_instance(rng, pick(rng, dims), cfg.max_vertices, false);
    const Index n = sheaf.stalk_dim();
    const Cochain0 a = random_cochain0(sheaf.num_vertices(), n, rng);
    const Cochain0 b = random_cochain0(sheaf.num_vertices(), n, rng);
    const Cochain1 lhs = coboundary(sheaf, cochain_group_op(a, b));
    const Cochain1 rhs = cochain_group_op(coboundary(sheaf, a), coboundary(sheaf, b));
    double r = 0.0;
    for (Index e = 0; e < sheaf.num_edges(); ++e) r = std::max(r, dist_lem(lhs[e], rhs[e]));
    if (r > cfg.tolerances.coboundary_linearity) dump_sheaf(cfg, name, t, sheaf);
    worst = std::max(worst, r);
  }
  return make(name, trials, worst, cfg.tolerances.coboundary_linearity, cfg.seed, "per-edge LEM");
}

Verdict green_suite(const SuiteConfig& cfg, const std::string& name, double spread, double tol, Index sheaves) {
  Rng rng = check_rng(name, cfg.seed);
  const Index count = cfg.trials_for(name, sheaves);
  const auto dims = dims_or(cfg, {1, 2, 3});
  double worst = 0.0;
  for (Index s = 0; s < count; ++s) {
    const SheafGraph sheaf = random_instance(rng, pick(rng, dims), cfg.max_vertices, false);
    const Verdict v = oracle_green(sheaf, 100, rng(), spread, tol);
    if (!v.passed) dump_sheaf(cfg, name, s, sheaf);
    worst = std::max(worst, v.max_residual);
  }
  return make(name, count * 100, worst, tol, cfg.seed,
              std::to_string(count) + " sheaves x 100 cochain pairs, spread " + std::to_string(static_cast<long>(spread)));
}

Verdict check_hodge(const SuiteConfig& cfg) {
  const std::string name = "hodge";
  Rng rng = check_rng(name, cfg.seed);
  const Index count = cfg.trials_for(name, 50);
  const auto dims = dims_or(cfg, {1, 2, 3});
  double worst = 0.0;
  for (Index s = 0; s < count; ++s) {
    // Every third instance has gauge-trivial maps so the kernel is nonzero.
    SheafGraph sheaf;
    if (s % 3 == 0) {
      const Index nv = uniform_index(rng, 2, std::max<Index>(2, cfg.max_vertices));
      sheaf = random_trivial_holonomy_sheaf(pick(rng, dims), nv, random_graph_edges(nv, 0.35, rng), rng);
    } else {
      sheaf = random_instance(rng, pick(rng, dims), cfg.max_vertices, false);
    }
    const Verdict v = oracle_hodge(sheaf, cfg.tolerances.hodge);
    if (!v.passed) dump_sheaf(cfg, name, s, sheaf);
    worst = std::max(worst, v.max_residual);
  }
  return make(name, count, worst, cfg.tolerances.hodge, cfg.seed, "dim ker B = dim ker B^T B, L(section) = I");
}

Verdict check_index(const SuiteConfig& cfg) {
  const std::string name = "index";
  Rng rng = check_rng(name, cfg.seed);
  const Index count = cfg.trials_for(name, 50);
  const auto dims = dims_or(cfg, {2, 3});
  double worst = 0.0;
  for (Index s = 0; s < count; ++s) {
    const SheafGraph sheaf = random_instance(rng, pick(rng, dims), cfg.max_vertices, false);
    const Verdict v = oracle_index(sheaf);
    if (!v.passed) dump_sheaf(cfg, name, s, sheaf);
    worst = std::max(worst, v.max_residual);
  }
  return make(name, count, worst, cfg.tolerances.index, cfg.seed, "(|V| - |E|) n(n+1)/2");
}

Verdict check_holonomy(const SuiteConfig& cfg) {
  const std::string name = "holonomy";
  Rng rng = check_rng(name, cfg.seed);
  const Index count = cfg.trials_for(name, 50);
  const auto dims = dims_or(cfg, {2, 3});
  double worst = 0.0;
  Index nontrivial = 0;
  for (Index s = 0; s < count; ++s) {
    const Index n = pick(rng, dims);
    const Index nv = uniform_index(rng, 3, std::max<Index>(3, cfg.max_vertices));
    auto edges = random_connected_edges(nv, 0.25, rng);
    if (static_cast<Index>(edges.size()) < nv) {
      // Close at least one cycle.
      for (Index u = 0; u < nv && static_cast<Index>(edges.size()) < nv; ++u) {
        for (Index w = u + 2; w < nv; ++w) {
          if (std::find(edges.begin(), edges.end(), std::make_pair(u, w)) == edges.end()) {
            edges.emplace_back(u, w);
            break;
          }
        }
      }
    }
    const SheafGraph sheaf = s % 4 == 3 ? random_trivial_holonomy_sheaf(n, nv, edges, rng)
                                        : random_sheaf(n, nv, edges, rng);
    for (const auto& rep : holonomy_reps(sheaf)) {
      if ((rep.matrix() - MatrixXd::Identity(n, n)).norm() > 1e-6) {
        ++nontrivial;
        break;
      }
    }
    const Verdict v = oracle_holonomy(sheaf);
    if (!v.passed) dump_sheaf(cfg, name, s, sheaf);
    worst = std::max(worst, v.max_residual);
  }
  const Index required = std::min<Index>(10, count);
  std::string detail = std::to_string(nontrivial) + " instances with nontrivial cycle holonomy";
  if (nontrivial < required) {
    worst = std::max(worst, 1.0);
    detail += " (need " + std::to_string(required) + ")";
  }
  return make(name, count, worst, cfg.tolerances.holonomy, cfg.seed, detail);
}

Verdict check_correspondence(const SuiteConfig& cfg) {
  const std::string name = "correspondence";
  Rng rng = check_rng(name, cfg.seed);
  const Index count = cfg.trials_for(name, 50);
  const auto dims = dims_or(cfg, {1, 2, 3, 4});
  double worst = 0.0;
  std::string notes;
  for (Index s = 0; s < count; ++s) {
    const Index n = cfg.stalk_dims.empty() && s % 2 == 0 ? 3 : pick(rng, dims);
    const Index nv = uniform_index(rng, 2, std::max<Index>(2, cfg.max_vertices));
    SheafGraph g;
    switch (s % 3) {
      case 0: g = random_trivial_holonomy_sheaf(n, nv, random_connected_edges(nv, 0.3, rng), rng); break;
      case 1: g = random_sheaf(n, nv, random_connected_edges(nv, 0.0, rng), rng); break;
      default: g = random_sheaf(n, nv, random_graph_edges(nv, 0.35, rng), rng); break;
    }
    const Verdict v = oracle_correspondence(EuclidSheaf(g), rng(), cfg.tolerances.correspondence);
    if (!v.passed) {
      dump_sheaf(cfg, name, s, g);
      notes += " [" + std::to_string(s) + ": " + v.detail + "]";
    }
    worst = std::max(worst, v.max_residual);
  }

  // Frustrated 2-cycle on R^1: x0 = x1 and x0 = -x1.
  const Orth one = Orth::identity(1);
  const Orth minus(MatrixXd::Constant(1, 1, -1.0));
  const SheafGraph frustrated(1, 2, {{0, 1, one, one}, {0, 1, one, minus}});
  const Index euclid_dim = oracle_kernel_dim(oracle_euclid_matrix(frustrated));
  const Index spd_dim = oracle_kernel_dim(oracle_coboundary_matrix(frustrated));
  if (euclid_dim != 0 || spd_dim < 1) {
    worst = std::max(worst, 1.0);
    notes += " frustrated 2-cycle: euclid " + std::to_string(euclid_dim) + ", spd " + std::to_string(spd_dim);
  }
  return make(name, count + 1, worst, cfg.tolerances.correspondence, cfg.seed,
              "forward inclusion, strictness witness, frustrated 2-cycle" + notes);
}

Verdict check_emergence(const SuiteConfig& cfg) {
  const std::string name = "emergence";
  Rng rng = check_rng(name, cfg.seed);
  const Index seeds = cfg.trials_for(name, 100);
  Index failures = 0;
  double worst_initial = 0.0;
  double min_gain = std::numeric_limits<double>::infinity();
  for (Index s = 0; s < seeds; ++s) {
    PointCloud cloud;
    cloud.points = random_cloud(uniform_index(rng, 8, 20), Eigen::Vector3d::Ones(), rng);
    cloud.edges = radius_graph(cloud.points, 1.5);
    const auto layers = random_layers(1, 3, rng());
    const StreamRun run = run_stream(cloud.topology(), lift_coordinates(cloud), layers);
    const double e0 = run.trace.rows[0].mean_erank;
    const double gain = run.trace.rows[1].mean_erank - e0;
    worst_initial = std::max(worst_initial, e0);
    min_gain = std::min(min_gain, gain);
    if (!(e0 <= 1.05 && gain >= 0.15)) ++failures;
  }
  std::ostringstream d;
  d << "max layer-0 erank " << worst_initial << ", min gain " << min_gain;
  return make(name, seeds, static_cast<double>(failures) / static_cast<double>(seeds), cfg.tolerances.emergence,
              cfg.seed, d.str());
}

Verdict check_depth(const SuiteConfig& cfg) {
  const std::string name = "depth";
  const Index layers = cfg.trials_for(name, 32);
  const PointCloud cloud = depth_instance(cfg.seed);
  const DepthResult r = depth_experiment(cloud, layers, cfg.seed);
  const double het = r.heterogeneous.rows.back().min_pairwise_lem;
  const double ctl = r.control.rows.back().min_pairwise_lem;
  const double residual = std::max(0.0, 0.01 - het) + std::max(0.0, ctl - 1e-3);
  std::ostringstream d;
  d << "layer " << layers << ": heterogeneous min LEM " << het << ", identity control " << ctl;
  return make(name, layers, residual, cfg.tolerances.depth, cfg.seed, d.str());
}

Verdict check_invariance(const SuiteConfig& cfg) {
  const std::string name = "invariance";
  Rng rng = check_rng(name, cfg.seed);
  const Index trials = cfg.trials_for(name, 100);
  PointCloud cloud;
  cloud.points = random_cloud(12, Eigen::Vector3d(1.0, 0.7, 0.4), rng);
  cloud.edges = knn_graph(cloud.points, 4);
  const auto layers = random_layers(2, 3, rng());
  const VectorXd base = invariant_descriptor(cloud, layers);
  std::normal_distribution<double> shift(0.0, 5.0);
  double worst = 0.0;
  for (Index t = 0; t < trials; ++t) {
    const Eigen::Matrix3d rot = random_rotation3(rng);
    const Eigen::Vector3d offset(shift(rng), shift(rng), shift(rng));
    PointCloud moved = cloud;
    for (auto& p : moved.points) p = rot * p + offset;
    worst = std::max(worst, (invariant_descriptor(moved, layers) - base).cwiseAbs().maxCoeff());
  }
  return make(name, trials, worst, cfg.tolerances.invariance, cfg.seed, "pooled descriptor under rigid motions");
}

Verdict check_covgraph(const SuiteConfig& cfg) {
  const std::string name = "covgraph";
  const auto segments = synthetic_segments(5, 4, 4, 256, cfg.seed);
  const TFGraphConfig tf;
  const TFGraph g = build_tf_graph(segments, tf);

  // Brute force: covariances from scratch, AIRM from the generalized eigenproblem.
  const auto nv = static_cast<Index>(segments.size());
  std::vector<MatrixXd> cov;
  for (const auto& s : segments) {
    MatrixXd c = s.data * s.data.transpose();
    c += tf.shrinkage * c.trace() / static_cast<double>(c.rows()) * MatrixXd::Identity(c.rows(), c.rows());
    cov.push_back(c);
  }
  std::map<std::pair<Index, Index>, double> expected;
  for (Index i = 0; i < nv; ++i) {
    for (Index j = 0; j < nv; ++j) {
      if (i == j) continue;
      const auto& si = segments[static_cast<std::size_t>(i)];
      const auto& sj = segments[static_cast<std::size_t>(j)];
      const double dt = sj.t_mid - si.t_mid;
      if (dt < 0.0 || dt > tf.eps1 || std::abs(si.f_mid - sj.f_mid) > tf.eps2) continue;
      if (dt == 0.0 && j < i) continue;
      Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(cov[static_cast<std::size_t>(j)],
                                                             cov[static_cast<std::size_t>(i)]);
      const double d2 = ges.eigenvalues().array().log().square().sum();
      if (d2 < tf.eps) expected[{i, j}] = std::exp(-d2 / tf.t_bw);
    }
  }
  double worst = 0.0;
  Index mismatched = 0;
  std::map<std::pair<Index, Index>, double> got;
  for (Index e = 0; e < g.graph.num_edges(); ++e) {
    got[{g.graph.edge(e).tail, g.graph.edge(e).head}] = g.weights[static_cast<std::size_t>(e)];
  }
  for (const auto& [key, w] : expected) {
    const auto it = got.find(key);
    if (it == got.end()) {
      ++mismatched;
    } else {
      worst = std::max(worst, std::abs(it->second - w));
    }
  }
  for (const auto& [key, w] : got) mismatched += expected.count(key) == 0 ? 1 : 0;
  std::ostringstream d;
  d << nv << " segments, " << expected.size() << " brute-force edges, " << g.graph.num_edges() << " built";
  if (mismatched > 0) d << ", " << mismatched << " mismatched";
  return make(name, nv * (nv - 1) / 2, worst + static_cast<double>(mismatched), cfg.tolerances.covgraph, cfg.seed,
              d.str());
}

Verdict check_probe(const SuiteConfig& cfg) {
  const std::string name = "probe";
  PlanarityTask task;
  task.seed = cfg.seed;
  const int repeats = static_cast<int>(cfg.trials_for(name, 3));
  const ProbeReport real = run_planarity_probe(task, repeats);
  task.shuffle_labels = true;
  const ProbeReport shuffled = run_planarity_probe(task, repeats);
  const double residual = std::max(0.0, 0.90 - real.mean_test) + std::max(0.0, std::abs(shuffled.mean_test - 0.5) - 0.1);
  std::ostringstream d;
  d << "test accuracy " << real.mean_test << " +/- " << real.sd_test << ", shuffled " << shuffled.mean_test;
  return make(name, repeats, residual, cfg.tolerances.probe, cfg.seed, d.str());
}

using CheckFn = Verdict (*)(const SuiteConfig&);

Verdict check_green(const SuiteConfig& cfg) { return green_suite(cfg, "green", 10.0, cfg.tolerances.green, 50); }
Verdict check_green_adversarial(const SuiteConfig& cfg) {
  return green_suite(cfg, "green_adversarial", 1e3, cfg.tolerances.green_adversarial, 20);
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"isometry", check_isometry},
      {"group_laws", check_group_laws},
      {"roundtrip", check_roundtrip},
      {"cayley", check_cayley},
      {"frechet", check_frechet},
      {"coboundary_linearity", check_coboundary_linearity},
      {"green", check_green},
      {"green_adversarial", check_green_adversarial},
      {"hodge", check_hodge},
      {"index", check_index},
      {"holonomy", check_holonomy},
      {"correspondence", check_correspondence},
      {"emergence", check_emergence},
      {"depth", check_depth},
      {"invariance", check_invariance},
      {"covgraph", check_covgraph},
      {"probe", check_probe},
  };
  return checks;
}

double* tolerance_slot(Tolerances& t, const std::string& check) {
  static const std::map<std::string, double Tolerances::*> slots = {
      {"isometry", &Tolerances::isometry},
      {"group_laws", &Tolerances::group_laws},
      {"roundtrip", &Tolerances::roundtrip},
      {"cayley", &Tolerances::cayley},
      {"frechet", &Tolerances::frechet},
      {"coboundary_linearity", &Tolerances::coboundary_linearity},
      {"green", &Tolerances::green},
      {"green_adversarial", &Tolerances::green_adversarial},
      {"hodge", &Tolerances::hodge},
      {"index", &Tolerances::index},
      {"holonomy", &Tolerances::holonomy},
      {"correspondence", &Tolerances::correspondence},
      {"emergence", &Tolerances::emergence},
      {"depth", &Tolerances::depth},
      {"invariance", &Tolerances::invariance},
      {"covgraph", &Tolerances::covgraph},
      {"probe", &Tolerances::probe},
  };
  const auto it = slots.find(check);
  if (it == slots.end()) throw InvalidInput("unknown check \"" + check + "\"");
  return &(t.*(it->second));
}

}  // namespace

double Tolerances::get(const std::string& check) const {
  Tolerances copy = *this;
  return *tolerance_slot(copy, check);
}

void Tolerances::set(const std::string& check, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw InvalidInput("tolerance must be finite and non-negative");
  *tolerance_slot(*this, check) = value;
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

Index SuiteConfig::trials_for(const std::string& check, Index fallback) const {
  const auto it = trials.find(check);
  return it == trials.end() ? fallback : it->second;
}

SuiteConfig suite_config_from_json(const std::string& text) {
  const io::Json j = io::parse_json(text);
  if (!j.is_object()) throw InvalidInput("verify config: expected a JSON object");
  SuiteConfig cfg;
  static const std::vector<std::string> known = {"checks", "seed", "n", "max_vertices", "trials",
                                                 "tolerances", "dump_dir", "corrupt_map", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidInput("verify config: unknown key \"" + key + "\"");
    }
  }
  try {
    if (j.contains("checks")) cfg.checks = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n")) {
      for (const auto& v : j.at("n")) cfg.stalk_dims.push_back(v.get<Index>());
    }
    if (j.contains("max_vertices")) cfg.max_vertices = j.at("max_vertices").get<Index>();
    if (j.contains("trials")) {
      for (const auto& [k, v] : j.at("trials").items()) cfg.trials[k] = v.get<Index>();
    }
    if (j.contains("tolerances")) {
      for (const auto& [k, v] : j.at("tolerances").items()) cfg.tolerances.set(k, v.get<double>());
    }
    if (j.contains("dump_dir")) cfg.dump_dir = j.at("dump_dir").get<std::string>();
    if (j.contains("corrupt_map")) cfg.corrupt_map = j.at("corrupt_map").get<bool>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("verify config: ") + e.what());
  }
  for (const auto& c : cfg.checks) {
    if (std::find(check_names().begin(), check_names().end(), c) == check_names().end()) {
      throw InvalidInput("unknown check \"" + c + "\"");
    }
  }
  for (const auto& [k, v] : cfg.trials) {
    if (std::find(check_names().begin(), check_names().end(), k) == check_names().end()) {
      throw InvalidInput("unknown check \"" + k + "\" in trials");
    }
    if (v < 1) throw InvalidInput("trials must be positive");
  }
  for (Index n : cfg.stalk_dims) {
    if (n < 1 || n > 8) throw InvalidInput("stalk dimensions must lie in [1, 8]");
  }
  if (cfg.max_vertices < 2 || cfg.max_vertices > 12) throw InvalidInput("max_vertices must lie in [2, 12]");
  return cfg;
}

std::string suite_config_to_json(const SuiteConfig& cfg) {
  io::Json j;
  j["checks"] = cfg.checks.empty() ? check_names() : cfg.checks;
  j["seed"] = cfg.seed;
  j["n"] = cfg.stalk_dims;
  j["max_vertices"] = cfg.max_vertices;
  j["trials"] = io::Json::object();
  for (const auto& [k, v] : cfg.trials) j["trials"][k] = v;
  io::Json tol = io::Json::object();
  for (const auto& name : check_names()) tol[name] = cfg.tolerances.get(name);
  j["tolerances"] = tol;
  if (cfg.dump_dir) j["dump_dir"] = cfg.dump_dir->string();
  j["corrupt_map"] = cfg.corrupt_map;
  return j.dump(2) + "\n";
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("SPD_SHEAF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MatrixXd oracle_sym_basis(Index n) {
  MatrixXd basis = MatrixXd::Zero(n * n, sym_dim(n));
  const double r = 1.0 / std::sqrt(2.0);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i, ++k) {
      if (i == j) {
        basis(j * n + i, k) = 1.0;
      } else {
        basis(j * n + i, k) = r;
        basis(i * n + j, k) = r;
      }
    }
  }
  return basis;
}

VectorXd oracle_log_coords(const Spd& p) {
  const Index n = p.dim();
  const MatrixXd l = oracle_log(p.matrix());
  return oracle_sym_basis(n).transpose() * Eigen::Map<const VectorXd>(l.data(), n * n);
}

MatrixXd oracle_coboundary_matrix(const SheafGraph& sheaf) {
  const Index n = sheaf.stalk_dim();
  const Index m = sym_dim(n);
  const MatrixXd p = oracle_sym_basis(n);
  MatrixXd b = MatrixXd::Zero(sheaf.num_edges() * m, sheaf.num_vertices() * m);
  for (Index e = 0; e < sheaf.num_edges(); ++e) {
    const auto& edge = sheaf.edge(e);
    const MatrixXd& mt = edge.map_tail.matrix();
    const MatrixXd& mh = edge.map_head.matrix();
    b.block(e * m, edge.tail * m, m, m) += p.transpose() * kron(mt, mt) * p;
    b.block(e * m, edge.head * m, m, m) -= p.transpose() * kron(mh, mh) * p;
  }
  return b;
}

Index oracle_kernel_dim(const MatrixXd& a, double rel_tol) {
  return oracle_kernel_basis(a, rel_tol).cols();
}

Verdict oracle_green(const SheafGraph& sheaf, Index trials, std::uint64_t seed, double spread, double tol) {
  Rng rng(seed);
  const MatrixXd b = oracle_coboundary_matrix(sheaf);
  const Index n = sheaf.stalk_dim();
  double worst = 0.0;
  for (Index t = 0; t < trials; ++t) {
    const Cochain0 sigma = random_cochain0(sheaf.num_vertices(), n, rng, spread);
    const Cochain1 tau = random_cochain1(sheaf.num_edges(), n, rng, spread);
    const VectorXd s = stacked_log_coords(sigma.values);
    const VectorXd tv = stacked_log_coords(tau.values);
    const double dense = sheaf.num_edges() == 0 ? 0.0 : tv.dot(b * s);
    const double lhs = cochain_pairing(coboundary(sheaf, sigma), tau);
    const double rhs = cochain_pairing(sigma, adjoint(sheaf, tau));
    worst = std::max({worst, std::abs(lhs - rhs), std::abs(lhs - dense), std::abs(rhs - dense)});
  }
  return make("green", trials, worst, tol, seed);
}

Verdict oracle_hodge(const SheafGraph& sheaf, double tol) {
  const MatrixXd b = oracle_coboundary_matrix(sheaf);
  const Index ker_b = oracle_kernel_dim(b);
  // Singular values of B^T B are squared; the threshold is squared accordingly.
  const Index ker_l = oracle_kernel_dim(b.transpose() * b, 1e-12);
  const MatrixXd basis = global_sections(sheaf);
  double worst = std::abs(static_cast<double>(ker_b - ker_l));
  worst = std::max(worst, std::abs(static_cast<double>(ker_b - basis.cols())));
  const Spd id = Spd::identity(sheaf.stalk_dim());
  for (Index k = 0; k < basis.cols(); ++k) {
    const Cochain0 section = section_from_coordinates(basis.col(k), sheaf.stalk_dim());
    const Cochain0 lap = laplacian(sheaf, section);
    for (const auto& v : lap.values) worst = std::max(worst, dist_lem(v, id));
    if (b.rows() > 0) worst = std::max(worst, (b * stacked_log_coords(section.values)).norm());
  }
  return make("hodge", 1, worst, tol, 0,
              "ker B " + std::to_string(ker_b) + ", ker B^T B " + std::to_string(ker_l));
}

Verdict oracle_index(const SheafGraph& sheaf) {
  const MatrixXd b = oracle_coboundary_matrix(sheaf);
  const Index m = sym_dim(sheaf.stalk_dim());
  const Index measured = oracle_kernel_dim(b) - oracle_kernel_dim(b.transpose());
  const Index expected = (sheaf.num_vertices() - sheaf.num_edges()) * m;
  const long primary = sheaf_index(sheaf);
  const double residual = std::max(std::abs(static_cast<double>(measured - expected)),
                                   std::abs(static_cast<double>(primary - expected)));
  return make("index", 1, residual, 0.0, 0, "expected " + std::to_string(expected) + ", measured " +
                                                std::to_string(measured) + ", library " + std::to_string(primary));
}

Verdict oracle_holonomy(const SheafGraph& sheaf) {
  if (components_of(sheaf.num_vertices(), sheaf.edges()) != 1) {
    throw InvalidInput("oracle_holonomy: sheaf graph must be connected");
  }
  const Index ker = oracle_kernel_dim(oracle_coboundary_matrix(sheaf));
  const Index fixed = holonomy_fixed_space(holonomy_reps(sheaf), sheaf.stalk_dim()).cols();
  return make("holonomy", 1, std::abs(static_cast<double>(ker - fixed)), 0.0, 0,
              "ker " + std::to_string(ker) + ", fixed " + std::to_string(fixed));
}

Verdict oracle_correspondence(const EuclidSheaf& sheaf, std::uint64_t seed, double tol) {
  Rng rng(seed);
  const SheafGraph& g = sheaf.structure();
  const Index n = g.stalk_dim();
  const Index m = sym_dim(n);
  const MatrixXd d = oracle_euclid_matrix(g);
  const MatrixXd euclid_basis = oracle_kernel_basis(d, 1e-8);
  const MatrixXd b = oracle_coboundary_matrix(g);
  const SheafGraph matched = matched_spd_sheaf(sheaf);
  double worst = 0.0;
  std::string detail;

  if (euclid_basis.cols() != euclid_sections(sheaf).cols()) {
    worst = std::max(worst, 1.0);
    detail += "euclidean kernel dimension disagrees; ";
  }
  std::vector<VectorXd> samples;
  for (Index k = 0; k < euclid_basis.cols(); ++k) samples.push_back(euclid_basis.col(k) * std::sqrt(static_cast<double>(g.num_vertices())));
  for (int r = 0; r < 3 && euclid_basis.cols() > 0; ++r) {
    samples.push_back(euclid_basis * random_gaussian(euclid_basis.cols(), 1, rng).col(0));
  }
  for (const auto& x : samples) {
    std::vector<Spd> phi;
    VecCochain0 xs;
    for (Index v = 0; v < g.num_vertices(); ++v) {
      const VectorXd xv = x.segment(v * n, n);
      xs.push_back(xv);
      phi.emplace_back(xv * xv.transpose() + kEigenFloor * MatrixXd::Identity(n, n));
    }
    if (b.rows() > 0) worst = std::max(worst, (b * stacked_log_coords(phi)).norm());
    worst = std::max(worst, check_kernel_correspondence(sheaf, matched, xs, kEigenFloor, tol).forward_residual);
  }

  const Index comps = components_of(g.num_vertices(), g.edges());
  const Index spd_kernel = oracle_kernel_dim(b);
  const bool trivial_holonomy = spd_kernel == comps * m;
  if (trivial_holonomy) {
    const Index jump = spd_kernel - euclid_basis.cols();
    if (jump != comps * n * (n - 1) / 2) {
      worst = std::max(worst, 1.0);
      detail += "index jump " + std::to_string(jump) + "; ";
    }
    if (n >= 3) {
      const StrictnessWitness w = strictness_witness(matched, tol);
      double res = b.rows() > 0 ? (b * stacked_log_coords(w.section.values)).norm() : 0.0;
      const auto ev = sym_eig(w.section[0].matrix()).eigenvalues;
      Index distinct = 1;
      for (Index i = 1; i < ev.size(); ++i) distinct += (ev(i - 1) - ev(i) > 1e-6 * ev(0)) ? 1 : 0;
      worst = std::max(worst, res);
      if (!w.passed || distinct < 3) {
        worst = std::max(worst, 1.0);
        detail += "strictness witness rejected; ";
      }
    }
  }
  return make("correspondence", static_cast<Index>(samples.size()), worst, tol, seed,
              detail.empty() ? "ok" : detail);
}

Verdict run_check(const std::string& name, const SuiteConfig& config) {
  for (const auto& [n, fn] : registry()) {
    if (n == name) return fn(config);
  }
  throw InvalidInput("unknown check \"" + name + "\"");
}

SuiteResult run_suite(const SuiteConfig& config) {
  const std::vector<std::string> names = config.checks.empty() ? check_names() : config.checks;
  for (const auto& name : names) {
    if (std::find(check_names().begin(), check_names().end(), name) == check_names().end()) {
      throw InvalidInput("unknown check \"" + name + "\"");
    }
  }
  SuiteResult result;
  result.verdicts.resize(names.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads == 0 ? default_thread_count() : config.threads,
                                                           static_cast<unsigned>(names.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < names.size(); i = next++) {
      try {
        result.verdicts[i] = run_check(names[i], config);
      } catch (const std::exception& e) {
        result.verdicts[i] = make(names[i], 0, kFailed, config.tolerances.get(names[i]), config.seed,
                                  std::string("error: ") + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  result.exit_code = std::all_of(result.verdicts.begin(), result.verdicts.end(),
                                 [](const Verdict& v) { return v.passed; })
                         ? 0
                         : 1;
  return result;
}

std::string report_json(const SuiteResult& result) {
  io::Json arr = io::Json::array();
  for (const auto& v : result.verdicts) {
    arr.push_back({{"check", v.name},
                   {"trials", v.trials},
                   {"max_residual", v.max_residual},
                   {"tolerance", v.tolerance},
                   {"passed", v.passed},
                   {"seed", v.seed},
                   {"detail", v.detail}});
  }
  const bool all = result.exit_code == 0;
  return io::Json{{"passed", all}, {"verdicts", arr}}.dump(2) + "\n";
}

std::string report_table(const SuiteResult& result) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::left << std::setw(22) << "check" << std::setw(8) << "result" << std::right << std::setw(8)
      << "trials" << std::setw(14) << "residual" << std::setw(12) << "tolerance" << "  detail\n";
  for (const auto& v : result.verdicts) {
    out << std::left << std::setw(22) << v.name << std::setw(8) << (v.passed ? "PASS" : "FAIL") << std::right
        << std::setw(8) << v.trials << std::setw(14) << std::setprecision(3) << std::scientific << v.max_residual
        << std::setw(12) << std::setprecision(1) << v.tolerance << std::defaultfloat << "  " << v.detail << "\n";
  }
  return out.str();
}

}  // namespace spdsheaf::verify
