#include "spdsheaf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spdsheaf {

MatrixXd random_gaussian(Index rows, Index cols, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

Sym random_sym(Index n, Rng& rng, double stddev) {
  return Sym(random_gaussian(n, n, rng, stddev));
}

Orth random_orthogonal(Index n, Rng& rng, double scale) {
  const MatrixXd a = random_gaussian(n, n, rng, scale);
  return cayley<double>(a - a.transpose());
}

Spd random_spd(Index n, Rng& rng, double spread) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_spread = std::log(std::max(spread, 1.0));
  const double base = std::exp(unit(rng) * 2.0 - 1.0);
  VectorXd ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = base * std::exp(unit(rng) * log_spread);
  // Pin the extremes so the requested spread is actually realized.
  if (n >= 2) {
    ev(0) = base;
    ev(1) = base * std::max(spread, 1.0);
  }
  const MatrixXd q = random_orthogonal(n, rng, 2.0).matrix();
  return Spd(q * ev.asDiagonal() * q.transpose());
}

Eigen::Matrix3d random_rotation3(Rng& rng) {
  Eigen::Matrix3d q = random_orthogonal(3, rng, 2.0).matrix();
  return q;  // Cayley images have determinant +1.
}

std::vector<std::pair<Index, Index>> random_graph_edges(Index num_vertices, double p, Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<Index, Index>> edges;
  for (Index u = 0; u < num_vertices; ++u) {
    for (Index v = u + 1; v < num_vertices; ++v) {
      if (coin(rng)) edges.emplace_back(u, v);
    }
  }
  return edges;
}

std::vector<std::pair<Index, Index>> random_connected_edges(Index num_vertices, double p, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(num_vertices));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 1; i < num_vertices; ++i) {
    std::uniform_int_distribution<Index> pick(0, i - 1);
    const Index a = order[static_cast<std::size_t>(pick(rng))];
    const Index b = order[static_cast<std::size_t>(i)];
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::bernoulli_distribution coin(p);
  for (Index u = 0; u < num_vertices; ++u) {
    for (Index v = u + 1; v < num_vertices; ++v) {
      const bool present = std::find(edges.begin(), edges.end(), std::make_pair(u, v)) != edges.end();
      if (!present && coin(rng)) edges.emplace_back(u, v);
    }
  }
  return edges;
}

SheafGraph random_sheaf(Index stalk_dim, Index num_vertices,
                        const std::vector<std::pair<Index, Index>>& edges, Rng& rng,
                        double map_scale) {
  std::bernoulli_distribution flip(0.5);
  std::vector<SheafEdge> out;
  out.reserve(edges.size());
  for (auto [t, h] : edges) {
    if (flip(rng)) std::swap(t, h);
    Orth mt = random_orthogonal(stalk_dim, rng, map_scale);
    Orth mh = random_orthogonal(stalk_dim, rng, map_scale);
    out.push_back({t, h, std::move(mt), std::move(mh)});
  }
  return SheafGraph(stalk_dim, num_vertices, std::move(out));
}

SheafGraph random_trivial_holonomy_sheaf(Index stalk_dim, Index num_vertices,
                                         const std::vector<std::pair<Index, Index>>& edges,
                                         Rng& rng) {
  // Vertex gauges g_v and edge frames k_e: M_t = k_e g_t^T, M_h = k_e g_h^T gives
  // transport M_h^T M_t = g_h g_t^T, a coboundary, hence trivial holonomy.
  std::vector<Orth> gauge;
  for (Index v = 0; v < num_vertices; ++v) gauge.push_back(random_orthogonal(stalk_dim, rng, 1.0));
  std::vector<SheafEdge> out;
  for (const auto& [t, h] : edges) {
    const Orth k = random_orthogonal(stalk_dim, rng, 1.0);
    out.push_back({t, h, k * gauge[static_cast<std::size_t>(t)].transpose(),
                   k * gauge[static_cast<std::size_t>(h)].transpose()});
  }
  return SheafGraph(stalk_dim, num_vertices, std::move(out));
}

Cochain0 random_cochain0(Index num_vertices, Index n, Rng& rng, double spread) {
  std::vector<Spd> v;
  for (Index i = 0; i < num_vertices; ++i) v.push_back(random_spd(n, rng, spread));
  return Cochain0(std::move(v));
}

Cochain1 random_cochain1(Index num_edges, Index n, Rng& rng, double spread) {
  std::vector<Spd> v;
  for (Index i = 0; i < num_edges; ++i) v.push_back(random_spd(n, rng, spread));
  return Cochain1(std::move(v));
}

}  // namespace spdsheaf
