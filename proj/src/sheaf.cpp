#include "spdsheaf/sheaf.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "spdsheaf/symvec.hpp"

namespace spdsheaf {

SheafGraph::SheafGraph(Index stalk_dim, Index num_vertices, std::vector<SheafEdge> edges)
    : stalk_dim_(stalk_dim), num_vertices_(num_vertices), edges_(std::move(edges)) {
  if (stalk_dim_ < 1) throw InvalidInput("SheafGraph: stalk dimension must be positive");
  if (num_vertices_ < 0) throw InvalidInput("SheafGraph: negative vertex count");
  incidence_.assign(static_cast<std::size_t>(num_vertices_), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    const std::string where = "SheafGraph: edge " + std::to_string(e);
    if (edge.tail < 0 || edge.tail >= num_vertices_ || edge.head < 0 || edge.head >= num_vertices_) {
      throw InvalidInput(where + " references a missing vertex");
    }
    if (edge.tail == edge.head) throw InvalidInput(where + " is a self-loop");
    if (edge.map_tail.dim() != stalk_dim_ || edge.map_head.dim() != stalk_dim_) {
      throw DimensionMismatch(where + " has restriction maps of the wrong dimension");
    }
    incidence_[static_cast<std::size_t>(edge.tail)].push_back(static_cast<Index>(e));
    incidence_[static_cast<std::size_t>(edge.head)].push_back(static_cast<Index>(e));
  }
}

SheafGraph SheafGraph::with_identity_maps(Index stalk_dim, Index num_vertices,
                                          const std::vector<std::pair<Index, Index>>& edges) {
  std::vector<SheafEdge> out;
  out.reserve(edges.size());
  const Orth id = Orth::identity(stalk_dim);
  for (const auto& [t, h] : edges) out.push_back({t, h, id, id});
  return SheafGraph(stalk_dim, num_vertices, std::move(out));
}

int SheafGraph::incidence_index(Index v, Index e) const {
  const auto& edge = this->edge(e);
  if (edge.tail == v) return 0;
  if (edge.head == v) return 1;
  throw InvalidInput("incidence_index: vertex is not incident to edge");
}

const Orth& SheafGraph::map(Index v, Index e) const {
  return incidence_index(v, e) == 0 ? edge(e).map_tail : edge(e).map_head;
}

std::vector<std::pair<Index, Index>> SheafGraph::edge_pairs() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.emplace_back(e.tail, e.head);
  return out;
}

std::vector<Sym> log_coboundary(const SheafGraph& sheaf, const std::vector<Sym>& vertex_logs) {
  if (static_cast<Index>(vertex_logs.size()) != sheaf.num_vertices()) {
    throw InvalidInput("coboundary: cochain does not assign a value to every vertex");
  }
  std::vector<Sym> out;
  out.reserve(sheaf.edges().size());
  for (const auto& e : sheaf.edges()) {
    const auto& zt = vertex_logs[static_cast<std::size_t>(e.tail)];
    const auto& zh = vertex_logs[static_cast<std::size_t>(e.head)];
    if (zt.dim() != sheaf.stalk_dim() || zh.dim() != sheaf.stalk_dim()) {
      throw DimensionMismatch("coboundary: stalk dimension mismatch");
    }
    out.push_back(congruence(e.map_tail, zt) - congruence(e.map_head, zh));
  }
  return out;
}

std::vector<Sym> log_adjoint(const SheafGraph& sheaf, const std::vector<Sym>& edge_logs) {
  if (static_cast<Index>(edge_logs.size()) != sheaf.num_edges()) {
    throw InvalidInput("adjoint: cochain does not assign a value to every edge");
  }
  const Index n = sheaf.stalk_dim();
  std::vector<Sym> out(static_cast<std::size_t>(sheaf.num_vertices()), Sym::zero(n));
  // Fixed edge order keeps the reduction deterministic.
  for (Index e = 0; e < sheaf.num_edges(); ++e) {
    const auto& edge = sheaf.edge(e);
    const auto& t = edge_logs[static_cast<std::size_t>(e)];
    if (t.dim() != n) throw DimensionMismatch("adjoint: stalk dimension mismatch");
    out[static_cast<std::size_t>(edge.tail)] += congruence(edge.map_tail.transpose(), t);
    out[static_cast<std::size_t>(edge.head)] += -congruence(edge.map_head.transpose(), t);
  }
  return out;
}

Cochain1 coboundary(const SheafGraph& sheaf, const Cochain0& sigma) {
  if (sigma.size() != sheaf.num_vertices()) {
    throw InvalidInput("coboundary: cochain does not assign a value to every vertex");
  }
  return cochain_exp<1>(log_coboundary(sheaf, cochain_log(sigma)));
}

Cochain0 adjoint(const SheafGraph& sheaf, const Cochain1& tau) {
  if (tau.size() != sheaf.num_edges()) {
    throw InvalidInput("adjoint: cochain does not assign a value to every edge");
  }
  return cochain_exp<0>(log_adjoint(sheaf, cochain_log(tau)));
}

Cochain0 laplacian(const SheafGraph& sheaf, const Cochain0& sigma) {
  return adjoint(sheaf, coboundary(sheaf, sigma));
}

CoboundaryMatrix coboundary_matrix(const SheafGraph& sheaf) {
  const Index m = sym_dim(sheaf.stalk_dim());
  CoboundaryMatrix out;
  out.block = m;
  out.matrix = MatrixXd::Zero(sheaf.num_edges() * m, sheaf.num_vertices() * m);
  for (Index e = 0; e < sheaf.num_edges(); ++e) {
    const auto& edge = sheaf.edge(e);
    out.matrix.block(e * m, edge.tail * m, m, m) = conjugation_operator(edge.map_tail.matrix());
    out.matrix.block(e * m, edge.head * m, m, m) = -conjugation_operator(edge.map_head.matrix());
  }
  return out;
}

VectorXd stack_logs(const std::vector<Sym>& logs) {
  if (logs.empty()) return VectorXd(0);
  const Index m = sym_dim(logs.front().dim());
  VectorXd out(static_cast<Index>(logs.size()) * m);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out.segment(static_cast<Index>(i) * m, m) = sym_vec(logs[i]);
  }
  return out;
}

std::vector<Sym> unstack_logs(const VectorXd& coords, Index stalk_dim) {
  const Index m = sym_dim(stalk_dim);
  if (coords.size() % m != 0) throw DimensionMismatch("unstack_logs: length is not a multiple of m");
  std::vector<Sym> out;
  out.reserve(static_cast<std::size_t>(coords.size() / m));
  for (Index i = 0; i < coords.size() / m; ++i) {
    out.push_back(sym_unvec<double>(coords.segment(i * m, m), stalk_dim));
  }
  return out;
}

MatrixXd global_sections(const SheafGraph& sheaf, double rel_tol) {
  return nullspace(coboundary_matrix(sheaf).matrix, rel_tol);
}

Cochain0 section_from_coordinates(const VectorXd& coords, Index stalk_dim) {
  return cochain_exp<0>(unstack_logs(coords, stalk_dim));
}

long sheaf_index(const SheafGraph& sheaf, double rel_tol) {
  const MatrixXd b = coboundary_matrix(sheaf).matrix;
  const Index rank_b = numerical_rank(b, rel_tol);
  const Index rank_bt = numerical_rank(b.transpose(), rel_tol);
  const long ker_b = static_cast<long>(b.cols() - rank_b);
  const long ker_bt = static_cast<long>(b.rows() - rank_bt);
  return ker_b - ker_bt;
}

Orth edge_transport(const SheafEdge& edge) { return edge.map_head.transpose() * edge.map_tail; }

std::vector<Index> connected_components(Index num_vertices,
                                        const std::vector<std::pair<Index, Index>>& edges) {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(num_vertices));
  for (const auto& [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<Index> label(static_cast<std::size_t>(num_vertices), -1);
  Index next = 0;
  for (Index root = 0; root < num_vertices; ++root) {
    if (label[static_cast<std::size_t>(root)] >= 0) continue;
    std::queue<Index> queue;
    queue.push(root);
    label[static_cast<std::size_t>(root)] = next;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop();
      for (Index u : adj[static_cast<std::size_t>(v)]) {
        if (label[static_cast<std::size_t>(u)] < 0) {
          label[static_cast<std::size_t>(u)] = next;
          queue.push(u);
        }
      }
    }
    ++next;
  }
  return label;
}

std::vector<Orth> holonomy_reps(const SheafGraph& sheaf) {
  const Index nv = sheaf.num_vertices();
  const Index n = sheaf.stalk_dim();
  // gauge[v] transports the component-root stalk to the stalk at v along the tree.
  std::vector<Orth> gauge(static_cast<std::size_t>(nv), Orth::identity(n));
  std::vector<bool> seen(static_cast<std::size_t>(nv), false);
  std::vector<bool> tree_edge(static_cast<std::size_t>(sheaf.num_edges()), false);

  for (Index root = 0; root < nv; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    seen[static_cast<std::size_t>(root)] = true;
    std::queue<Index> queue;
    queue.push(root);
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop();
      for (Index e : sheaf.incident_edges(v)) {
        const auto& edge = sheaf.edge(e);
        const bool from_tail = edge.tail == v;
        const Index u = from_tail ? edge.head : edge.tail;
        if (seen[static_cast<std::size_t>(u)]) continue;
        seen[static_cast<std::size_t>(u)] = true;
        tree_edge[static_cast<std::size_t>(e)] = true;
        const Orth t = edge_transport(edge);
        gauge[static_cast<std::size_t>(u)] =
            (from_tail ? t : t.transpose()) * gauge[static_cast<std::size_t>(v)];
        queue.push(u);
      }
    }
  }

  std::vector<Orth> reps;
  for (Index e = 0; e < sheaf.num_edges(); ++e) {
    if (tree_edge[static_cast<std::size_t>(e)]) continue;
    const auto& edge = sheaf.edge(e);
    reps.push_back(gauge[static_cast<std::size_t>(edge.head)].transpose() * edge_transport(edge) *
                   gauge[static_cast<std::size_t>(edge.tail)]);
  }
  return reps;
}

MatrixXd holonomy_fixed_space(const std::vector<Orth>& reps, Index stalk_dim, double rel_tol) {
  const Index m = sym_dim(stalk_dim);
  if (reps.empty()) return MatrixXd::Identity(m, m);
  MatrixXd stacked(static_cast<Index>(reps.size()) * m, m);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].dim() != stalk_dim) throw DimensionMismatch("holonomy_fixed_space: dimension mismatch");
    stacked.block(static_cast<Index>(i) * m, 0, m, m) =
        conjugation_operator(reps[i].matrix()) - MatrixXd::Identity(m, m);
  }
  return nullspace(stacked, rel_tol, 1.0);
}

Sym normalize_update(const Sym& delta) {
  const auto d = sym_eig(delta);
  const double radius = d.eigenvalues.cwiseAbs().maxCoeff();
  if (radius <= 1.0) return delta;
  return delta * (1.0 / radius);
}

std::vector<Sym> diffusion_delta(const SheafGraph& sheaf, const Cochain0& sigma, bool normalize) {
  if (sigma.size() != sheaf.num_vertices()) {
    throw InvalidInput("diffusion: cochain does not assign a value to every vertex");
  }
  auto delta = log_adjoint(sheaf, log_coboundary(sheaf, cochain_log(sigma)));
  if (normalize) {
    for (auto& d : delta) d = normalize_update(d);
  }
  return delta;
}

Cochain0 apply_update(const SheafGraph& sheaf, const Cochain0& sigma, const std::vector<Sym>& delta,
                      UpdateRule rule) {
  if (sigma.size() != sheaf.num_vertices() || static_cast<Index>(delta.size()) != sigma.size()) {
    throw DimensionMismatch("apply_update: size mismatch");
  }
  std::vector<Spd> out;
  out.reserve(sigma.values.size());
  for (Index v = 0; v < sigma.size(); ++v) {
    const Sym& d = delta[static_cast<std::size_t>(v)];
    const Sym z = spd_log(sigma[v]);
    if (rule == UpdateRule::kLieResidual) {
      out.push_back(sym_exp(z + d));
    } else {
      const double degree = static_cast<double>(sheaf.incident_edges(v).size());
      out.push_back(sym_exp(z - d * (1.0 / (degree + 1.0))));
    }
  }
  return Cochain0(std::move(out));
}

Cochain0 diffusion_step(const SheafGraph& sheaf, const Cochain0& sigma, const DiffusionOptions& options) {
  return apply_update(sheaf, sigma, diffusion_delta(sheaf, sigma, options.normalize), options.rule);
}

}  // namespace spdsheaf
