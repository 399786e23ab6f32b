#include "spdsheaf/covgraph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

namespace spdsheaf {

void TFGraphConfig::validate() const {
  const bool ok = eps1 >= 0.0 && eps2 >= 0.0 && eps > 0.0 && t_bw > 0.0 && shrinkage >= 0.0 &&
                  std::isfinite(eps1) && std::isfinite(eps2) && std::isfinite(eps) &&
                  std::isfinite(t_bw) && std::isfinite(shrinkage);
  if (!ok) throw InvalidInput("TFGraphConfig: parameters out of range");
}

Spd segment_covariance(const Segment& seg, double shrinkage, bool normalize_by_samples) {
  const MatrixXd& x = seg.data;
  if (x.rows() < 1 || x.cols() < 1) throw InvalidInput("segment_covariance: empty segment");
  if (!x.allFinite()) throw InvalidInput("segment_covariance: non-finite samples");
  if (!(shrinkage >= 0.0)) throw InvalidInput("segment_covariance: negative shrinkage");
  MatrixXd s = x * x.transpose();
  if (normalize_by_samples) s /= static_cast<double>(x.cols());
  const auto n = static_cast<double>(x.rows());
  s += (shrinkage * s.trace() / n) * MatrixXd::Identity(x.rows(), x.rows());
  s = (s + s.transpose().eval()) * 0.5;
  try {
    return Spd(s);
  } catch (const DomainError&) {
    throw DomainError("segment_covariance: covariance is not positive definite; increase shrinkage");
  }
}

TFGraph build_tf_graph(const std::vector<Segment>& segments, const TFGraphConfig& cfg) {
  cfg.validate();
  if (segments.empty()) throw InvalidInput("build_tf_graph: no segments");
  const auto nv = static_cast<Index>(segments.size());

  std::vector<Spd> cov;
  cov.reserve(segments.size());
  for (const auto& s : segments) cov.push_back(segment_covariance(s, cfg.shrinkage, cfg.normalize_by_samples));
  const Index n = cov.front().dim();
  for (const auto& c : cov) {
    if (c.dim() != n) throw DimensionMismatch("build_tf_graph: segments have different channel counts");
  }

  struct Candidate {
    Index tail, head;
    double weight;
  };
  std::vector<Candidate> found;
  for (Index i = 0; i < nv; ++i) {
    for (Index j = i + 1; j < nv; ++j) {
      const auto& si = segments[static_cast<std::size_t>(i)];
      const auto& sj = segments[static_cast<std::size_t>(j)];
      if (std::abs(si.f_mid - sj.f_mid) > cfg.eps2) continue;
      // One-sided temporal window: the tail is the earlier segment.
      const double dt = si.t_mid - sj.t_mid;
      Index tail = -1;
      Index head = -1;
      if (dt >= 0.0 && dt <= cfg.eps1) {
        tail = j;
        head = i;
        if (dt == 0.0) std::swap(tail, head);  // simultaneous: lower index first
      } else if (-dt >= 0.0 && -dt <= cfg.eps1) {
        tail = i;
        head = j;
      } else {
        continue;
      }
      const double d = dist_airm(cov[static_cast<std::size_t>(i)], cov[static_cast<std::size_t>(j)]);
      const double d2 = d * d;
      if (!(d2 < cfg.eps)) continue;
      found.push_back({tail, head, std::exp(-d2 / cfg.t_bw)});
    }
  }

  auto key = [&](const Candidate& c) {
    const auto& t = segments[static_cast<std::size_t>(c.tail)];
    const auto& h = segments[static_cast<std::size_t>(c.head)];
    return std::make_tuple(t.t_mid, t.f_mid, h.t_mid, h.f_mid, c.tail, c.head);
  };
  std::sort(found.begin(), found.end(), [&](const Candidate& a, const Candidate& b) { return key(a) < key(b); });

  TFGraph out;
  std::vector<std::pair<Index, Index>> edges;
  out.adjacency = MatrixXd::Zero(nv, nv);
  for (const auto& c : found) {
    edges.emplace_back(c.tail, c.head);
    out.weights.push_back(c.weight);
    out.adjacency(c.tail, c.head) = c.weight;
    out.adjacency(c.head, c.tail) = c.weight;
  }
  out.graph = SheafGraph::with_identity_maps(n, nv, edges);
  out.nodes = Cochain0(std::move(cov));
  return out;
}

std::vector<Segment> synthetic_segments(Index times, Index bands, Index channels, Index samples,
                                        std::uint64_t seed) {
  if (times < 1 || bands < 1 || channels < 1 || samples < 1) {
    throw InvalidInput("synthetic_segments: sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Index r, Index c) {
    MatrixXd m(r, c);
    for (Index i = 0; i < r; ++i) {
      for (Index j = 0; j < c; ++j) m(i, j) = normal(rng);
    }
    return m;
  };
  std::vector<MatrixXd> base;
  std::vector<MatrixXd> drift;
  for (Index b = 0; b < bands; ++b) {
    base.push_back(MatrixXd::Identity(channels, channels) + 0.35 * gaussian(channels, channels));
    drift.push_back(0.05 * gaussian(channels, channels));
  }
  std::vector<Segment> out;
  for (Index t = 0; t < times; ++t) {
    for (Index b = 0; b < bands; ++b) {
      const auto k = static_cast<std::size_t>(b);
      const MatrixXd mix = base[k] + static_cast<double>(t) * drift[k];
      Segment seg;
      seg.t_mid = 0.5 * static_cast<double>(t);
      seg.f_mid = 6.0 + 4.0 * static_cast<double>(b);
      seg.data = mix * gaussian(channels, samples) / std::sqrt(static_cast<double>(samples));
      out.push_back(std::move(seg));
    }
  }
  return out;
}

}  // namespace spdsheaf
