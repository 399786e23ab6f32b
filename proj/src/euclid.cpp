#include "spdsheaf/euclid.hpp"

#include <algorithm>
#include <cmath>

#include "spdsheaf/symvec.hpp"

namespace spdsheaf {

std::vector<VectorXd> euclid_coboundary(const EuclidSheaf& sheaf, const VecCochain0& x) {
  const auto& g = sheaf.structure();
  if (static_cast<Index>(x.size()) != g.num_vertices()) {
    throw InvalidInput("euclid_coboundary: cochain does not assign a value to every vertex");
  }
  std::vector<VectorXd> out;
  out.reserve(g.edges().size());
  for (const auto& e : g.edges()) {
    const auto& xt = x[static_cast<std::size_t>(e.tail)];
    const auto& xh = x[static_cast<std::size_t>(e.head)];
    if (xt.size() != g.stalk_dim() || xh.size() != g.stalk_dim()) {
      throw DimensionMismatch("euclid_coboundary: stalk dimension mismatch");
    }
    out.push_back(e.map_tail.matrix() * xt - e.map_head.matrix() * xh);
  }
  return out;
}

MatrixXd euclid_coboundary_matrix(const EuclidSheaf& sheaf) {
  const auto& g = sheaf.structure();
  const Index n = g.stalk_dim();
  MatrixXd b = MatrixXd::Zero(g.num_edges() * n, g.num_vertices() * n);
  for (Index e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edge(e);
    b.block(e * n, edge.tail * n, n, n) = edge.map_tail.matrix();
    b.block(e * n, edge.head * n, n, n) = -edge.map_head.matrix();
  }
  return b;
}

MatrixXd euclid_sections(const EuclidSheaf& sheaf, double rel_tol) {
  return nullspace(euclid_coboundary_matrix(sheaf), rel_tol);
}

VecCochain0 unstack_vectors(const VectorXd& coords, Index stalk_dim) {
  if (coords.size() % stalk_dim != 0) throw DimensionMismatch("unstack_vectors: bad length");
  VecCochain0 out;
  for (Index i = 0; i < coords.size() / stalk_dim; ++i) {
    out.push_back(coords.segment(i * stalk_dim, stalk_dim));
  }
  return out;
}

Spd embed_phi(const VectorXd& x, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("embed_phi: eps must be positive");
  if (x.size() == 0 || !x.allFinite()) throw InvalidInput("embed_phi: invalid vector");
  const Index n = x.size();
  return Spd(x * x.transpose() + eps * MatrixXd::Identity(n, n));
}

Cochain0 embed_phi(const VecCochain0& x, double eps) {
  std::vector<Spd> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(embed_phi(v, eps));
  return Cochain0(std::move(out));
}

SheafGraph matched_spd_sheaf(const EuclidSheaf& sheaf) { return sheaf.structure(); }

std::string to_string(ConverseStatus status) {
  switch (status) {
    case ConverseStatus::kPassed:
      return "passed";
    case ConverseStatus::kFailed:
      return "failed";
    case ConverseStatus::kNoSpdSection:
      return "no_spd_section";
    case ConverseStatus::kGaugeClassOnly:
      return "gauge_class_only";
  }
  return "unknown";
}

bool commutes_with_abs(const Orth& m) {
  const auto& a = m.matrix();
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) != 0.0 && a(i, j) != 1.0) return false;
    }
  }
  return true;
}

CorrespondenceReport check_kernel_correspondence(const EuclidSheaf& euclid, const SheafGraph& spd,
                                                 const VecCochain0& x, double eps, double tol) {
  if (euclid.num_vertices() != spd.num_vertices() || euclid.num_edges() != spd.num_edges() ||
      euclid.stalk_dim() != spd.stalk_dim()) {
    throw DimensionMismatch("check_kernel_correspondence: sheaves are not matched");
  }
  CorrespondenceReport report;
  const auto edge_logs = log_coboundary(spd, cochain_log(embed_phi(x, eps)));
  for (const auto& l : edge_logs) {
    const double r = l.matrix().norm();
    report.edge_residuals.push_back(r);
    report.forward_residual = std::max(report.forward_residual, r);
  }
  report.forward_passed = report.forward_residual <= tol;

  if (!report.forward_passed) {
    report.converse = ConverseStatus::kNoSpdSection;
    return report;
  }
  const auto& g = euclid.structure();
  const bool applicable = std::all_of(g.edges().begin(), g.edges().end(), [](const SheafEdge& e) {
    return commutes_with_abs(e.map_tail) && commutes_with_abs(e.map_head);
  });
  if (!applicable) {
    report.converse = ConverseStatus::kGaugeClassOnly;
    return report;
  }
  VecCochain0 abs_x;
  abs_x.reserve(x.size());
  for (const auto& v : x) abs_x.push_back(v.cwiseAbs());
  for (const auto& d : euclid_coboundary(euclid, abs_x)) {
    report.converse_residual = std::max(report.converse_residual, d.cwiseAbs().maxCoeff());
  }
  report.converse = report.converse_residual <= tol ? ConverseStatus::kPassed : ConverseStatus::kFailed;
  return report;
}

Index distinct_eigenvalue_count(const Spd& p, double rel_tol) {
  const VectorXd ev = sym_eig(p.matrix()).eigenvalues;
  Index count = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (i == 0 || std::abs(ev(i - 1) - ev(i)) > rel_tol * std::max(std::abs(ev(i - 1)), 1e-300)) {
      ++count;
    }
  }
  return count;
}

StrictnessWitness strictness_witness(const SheafGraph& sheaf, double tol) {
  const Index n = sheaf.stalk_dim();
  if (n < 3) throw NotApplicable("strictness_witness: requires stalk dimension n >= 3");
  for (const auto& rep : holonomy_reps(sheaf)) {
    if ((rep.matrix() - MatrixXd::Identity(n, n)).norm() > 1e-9) {
      throw NotApplicable("strictness_witness: sheaf has nontrivial holonomy");
    }
  }
  // Constant section in the gauge of a spanning forest; with identity maps
  // every vertex carries P itself.
  VectorXd spectrum = VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
  const Sym base_log(MatrixXd(spectrum.array().log().matrix().asDiagonal()));

  const Index nv = sheaf.num_vertices();
  std::vector<Sym> logs(static_cast<std::size_t>(nv), Sym::zero(n));
  std::vector<bool> seen(static_cast<std::size_t>(nv), false);
  for (Index root = 0; root < nv; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    seen[static_cast<std::size_t>(root)] = true;
    logs[static_cast<std::size_t>(root)] = base_log;
    std::vector<Index> stack{root};
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index e : sheaf.incident_edges(v)) {
        const auto& edge = sheaf.edge(e);
        const bool from_tail = edge.tail == v;
        const Index u = from_tail ? edge.head : edge.tail;
        if (seen[static_cast<std::size_t>(u)]) continue;
        seen[static_cast<std::size_t>(u)] = true;
        const Orth t = edge_transport(edge);
        logs[static_cast<std::size_t>(u)] =
            congruence(from_tail ? t : t.transpose(), logs[static_cast<std::size_t>(v)]);
        stack.push_back(u);
      }
    }
  }

  StrictnessWitness w;
  w.section = cochain_exp<0>(logs);
  for (const auto& l : log_coboundary(sheaf, logs)) {
    w.max_residual = std::max(w.max_residual, l.matrix().norm());
  }
  w.distinct_eigenvalues = nv > 0 ? distinct_eigenvalue_count(w.section[0]) : 0;
  w.outside_image = w.distinct_eigenvalues > 2;
  w.passed = w.max_residual <= tol && w.outside_image;
  return w;
}

IndexJump index_jump(const EuclidSheaf& sheaf, double rel_tol) {
  IndexJump out;
  const Index n = sheaf.stalk_dim();
  out.spd_kernel_dim = global_sections(matched_spd_sheaf(sheaf), rel_tol).cols();
  out.euclid_kernel_dim = euclid_sections(sheaf, rel_tol).cols();
  const auto labels = connected_components(sheaf.num_vertices(), sheaf.structure().edge_pairs());
  out.components = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  out.expected = out.components * n * (n - 1) / 2;
  return out;
}

}  // namespace spdsheaf
