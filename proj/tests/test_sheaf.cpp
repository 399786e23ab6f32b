#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "spdsheaf/errors.hpp"
#include "spdsheaf/random.hpp"
#include "spdsheaf/sheaf.hpp"
#include "spdsheaf/symvec.hpp"

using namespace spdsheaf;

namespace {

MatrixXd diag(std::initializer_list<double> values) {
  VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v.asDiagonal();
}

MatrixXd rotation2(double angle) {
  MatrixXd r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

// Dense coboundary in sym_vec coordinates, built column by column from the congruence action.
MatrixXd dense_b(const SheafGraph& g) {
  const Index n = g.stalk_dim();
  const Index m = sym_dim(n);
  MatrixXd b = MatrixXd::Zero(g.num_edges() * m, g.num_vertices() * m);
  for (Index e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edge(e);
    for (Index k = 0; k < m; ++k) {
      const MatrixXd basis = sym_unvec<double>(VectorXd::Unit(m, k), n).matrix();
      const MatrixXd t = edge.map_tail.matrix() * basis * edge.map_tail.matrix().transpose();
      const MatrixXd h = edge.map_head.matrix() * basis * edge.map_head.matrix().transpose();
      b.block(e * m, edge.tail * m + k, m, 1) += sym_vec(Sym(t));
      b.block(e * m, edge.head * m + k, m, 1) -= sym_vec(Sym(h));
    }
  }
  return b;
}

Index dense_kernel_dim(const MatrixXd& a, Index cols) {
  if (a.rows() == 0) return cols;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-8 * s(0) ? 1 : 0;
  return cols - rank;
}

VectorXd stacked_logs(const Cochain0& c) { return stack_logs(cochain_log(c)); }

SheafGraph random_instance(Rng& rng, Index n) {
  const Index nv = 2 + static_cast<Index>(rng() % 7);
  return random_sheaf(n, nv, random_graph_edges(nv, 0.4, rng), rng);
}

}  // namespace

TEST(SheafGraph, Validation) {
  const Orth i2 = Orth::identity(2);
  EXPECT_THROW(SheafGraph(2, 2, {{0, 0, i2, i2}}), InvalidInput);
  EXPECT_THROW(SheafGraph(2, 2, {{0, 2, i2, i2}}), InvalidInput);
  EXPECT_THROW(SheafGraph(2, 2, {{0, 1, i2, Orth::identity(3)}}), DimensionMismatch);
  EXPECT_THROW(SheafGraph(0, 2, {}), InvalidInput);
  const SheafGraph g(2, 3, {{0, 1, i2, i2}, {2, 1, i2, i2}});
  EXPECT_EQ(g.incidence_index(0, 0), 0);
  EXPECT_EQ(g.incidence_index(1, 0), 1);
  EXPECT_EQ(g.incident_edges(1).size(), 2u);
  EXPECT_THROW(g.incidence_index(2, 0), InvalidInput);
}

TEST(Coboundary, ConstantOnIdentityMapsIsIdentity) {
  Rng rng(1);
  const auto g = SheafGraph::with_identity_maps(3, 4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  const Spd p = random_spd(3, rng);
  const Cochain1 out = coboundary(g, Cochain0(std::vector<Spd>(4, p)));
  for (const auto& v : out.values) EXPECT_LE(dist_lem(v, Spd::identity(3)), 1e-13);
}

TEST(Coboundary, SingleEdgeTailPositive) {
  const auto g = SheafGraph::with_identity_maps(2, 2, {{0, 1}});
  const Cochain0 sigma({Spd(diag({std::exp(1.0), 1})), Spd::identity(2)});
  EXPECT_LE((coboundary(g, sigma)[0].matrix() - diag({std::exp(1.0), 1})).norm(), 1e-14);
}

TEST(Coboundary, MatchesDenseOperator) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const SheafGraph g = random_instance(rng, 1 + t % 3);
    const Cochain0 sigma = random_cochain0(g.num_vertices(), g.stalk_dim(), rng);
    const VectorXd expected = dense_b(g) * stacked_logs(sigma);
    const VectorXd got = stack_logs(cochain_log(coboundary(g, sigma)));
    EXPECT_LE((expected - got).norm(), 1e-9);
    EXPECT_LE((coboundary_matrix(g).matrix - dense_b(g)).norm(), 1e-12);
  }
}

TEST(Coboundary, GroupHomomorphism) {
  Rng rng(3);
  const SheafGraph g = random_sheaf(3, 5, random_connected_edges(5, 0.5, rng), rng);
  const Cochain0 a = random_cochain0(5, 3, rng);
  const Cochain0 b = random_cochain0(5, 3, rng);
  const Cochain1 lhs = coboundary(g, cochain_group_op(a, b));
  const Cochain1 rhs = cochain_group_op(coboundary(g, a), coboundary(g, b));
  for (Index e = 0; e < g.num_edges(); ++e) EXPECT_LE(dist_lem(lhs[e], rhs[e]), 1e-9);
}

TEST(Coboundary, RejectsWrongSize) {
  const auto g = SheafGraph::with_identity_maps(2, 3, {{0, 1}});
  EXPECT_THROW(coboundary(g, Cochain0::identity(2, 2)), InvalidInput);
  EXPECT_THROW(coboundary(g, Cochain0::identity(3, 3)), DimensionMismatch);
}

TEST(Adjoint, IdentityInIdentityOut) {
  Rng rng(4);
  const SheafGraph g = random_sheaf(2, 4, {{0, 1}, {1, 2}}, rng);
  const Cochain0 out = adjoint(g, Cochain1::identity(2, 2));
  for (const auto& v : out.values) EXPECT_LE(dist_lem(v, Spd::identity(2)), 1e-14);
  // Vertex 3 has no incident edge: empty product.
  EXPECT_LE((out[3].matrix() - MatrixXd::Identity(2, 2)).norm(), 0.0);
}

TEST(Adjoint, GreenIdentity) {
  Rng rng(5);
  for (int s = 0; s < 10; ++s) {
    const SheafGraph g = random_instance(rng, 3);
    for (int t = 0; t < 100; ++t) {
      const Cochain0 sigma = random_cochain0(g.num_vertices(), 3, rng);
      const Cochain1 tau = random_cochain1(g.num_edges(), 3, rng);
      const double lhs = cochain_pairing(coboundary(g, sigma), tau);
      const double rhs = cochain_pairing(sigma, adjoint(g, tau));
      EXPECT_LE(std::abs(lhs - rhs), 1e-8);
    }
  }
}

TEST(Adjoint, MatchesTransposeOfDenseOperator) {
  Rng rng(6);
  const SheafGraph g = random_instance(rng, 2);
  const Cochain1 tau = random_cochain1(g.num_edges(), 2, rng);
  const VectorXd expected = dense_b(g).transpose() * stack_logs(cochain_log(tau));
  EXPECT_LE((stacked_logs(adjoint(g, tau)) - expected).norm(), 1e-9);
}

TEST(Laplacian, GlobalSectionMapsToIdentity) {
  Rng rng(7);
  const SheafGraph g = random_trivial_holonomy_sheaf(3, 5, random_connected_edges(5, 0.5, rng), rng);
  const MatrixXd basis = global_sections(g);
  ASSERT_EQ(basis.cols(), sym_dim(3));
  const Cochain0 section = section_from_coordinates(basis * VectorXd::LinSpaced(6, -1.0, 2.0), 3);
  for (const auto& v : laplacian(g, section).values) EXPECT_LE(dist_lem(v, Spd::identity(3)), 1e-7);
}

TEST(Laplacian, TwoNodeHandComputation) {
  const auto g = SheafGraph::with_identity_maps(2, 2, {{0, 1}});
  const Cochain0 sigma({Spd(diag({std::exp(1.0), 1})), Spd::identity(2)});
  const auto logs = cochain_log(laplacian(g, sigma));
  EXPECT_LE((logs[0].matrix() - diag({1, 0})).norm(), 1e-14);
  EXPECT_LE((logs[1].matrix() - diag({-1, 0})).norm(), 1e-14);
}

TEST(Laplacian, MatchesGramOperator) {
  Rng rng(8);
  const SheafGraph g = random_instance(rng, 3);
  const Cochain0 sigma = random_cochain0(g.num_vertices(), 3, rng);
  const MatrixXd b = dense_b(g);
  EXPECT_LE((stacked_logs(laplacian(g, sigma)) - b.transpose() * b * stacked_logs(sigma)).norm(), 1e-9);
}

TEST(CochainPairing, Examples) {
  Rng rng(9);
  const Cochain0 a = random_cochain0(4, 2, rng);
  const Cochain0 b = random_cochain0(4, 2, rng);
  const Cochain0 c = random_cochain0(4, 2, rng);
  EXPECT_EQ(cochain_pairing(a, Cochain0::identity(4, 2)), 0.0);
  double self = 0.0;
  for (const auto& l : cochain_log(a)) self += l.matrix().squaredNorm();
  EXPECT_NEAR(cochain_pairing(a, a), self, 1e-10);
  EXPECT_NEAR(cochain_pairing(a, cochain_group_op(b, c)), cochain_pairing(a, b) + cochain_pairing(a, c), 1e-9);
}

TEST(CoboundaryMatrix, IdentityMapsGiveSignedIncidence) {
  const auto g = SheafGraph::with_identity_maps(2, 3, {{0, 1}, {2, 1}});
  const auto b = coboundary_matrix(g);
  ASSERT_EQ(b.block, 3);
  MatrixXd incidence(2, 3);
  incidence << 1, -1, 0, 0, -1, 1;
  MatrixXd expected = MatrixXd::Zero(6, 9);
  for (Index e = 0; e < 2; ++e)
    for (Index v = 0; v < 3; ++v) expected.block(e * 3, v * 3, 3, 3) = incidence(e, v) * MatrixXd::Identity(3, 3);
  EXPECT_EQ(b.matrix, expected);
}

TEST(CoboundaryMatrix, RotatedHeadBlock) {
  const Orth r(rotation2(0.7));
  const SheafGraph g(2, 2, {{0, 1, Orth::identity(2), r}});
  const MatrixXd head = coboundary_matrix(g).matrix.block(0, 3, 3, 3);
  for (Index k = 0; k < 3; ++k) {
    const MatrixXd e = sym_unvec<double>(VectorXd::Unit(3, k), 2).matrix();
    const VectorXd image = sym_vec(Sym(r.matrix() * e * r.matrix().transpose()));
    EXPECT_LE((head.col(k) + image).norm(), 1e-14);
  }
}

TEST(CoboundaryMatrix, NoEdges) {
  const auto b = coboundary_matrix(SheafGraph::with_identity_maps(3, 4, {}));
  EXPECT_EQ(b.matrix.rows(), 0);
  EXPECT_EQ(b.matrix.cols(), 24);
}

TEST(GlobalSections, Examples) {
  EXPECT_EQ(global_sections(SheafGraph::with_identity_maps(3, 1, {})).cols(), 6);
  EXPECT_EQ(global_sections(SheafGraph::with_identity_maps(3, 4, {{0, 1}, {1, 2}, {1, 3}})).cols(), 6);
  const SheafGraph rot(2, 3, {{0, 1, Orth::identity(2), Orth::identity(2)},
                              {1, 2, Orth::identity(2), Orth::identity(2)},
                              {2, 0, Orth(rotation2(M_PI / 2)), Orth::identity(2)}});
  const MatrixXd basis = global_sections(rot);
  ASSERT_EQ(basis.cols(), 1);
  // Only the identity direction is fixed by a quarter-turn: log σ_v ∝ I at every vertex.
  for (const auto& l : unstack_logs(basis.col(0), 2)) {
    EXPECT_NEAR(l.matrix()(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(l.matrix()(0, 0), l.matrix()(1, 1), 1e-12);
  }
}

TEST(GlobalSections, MatchesDenseKernel) {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const SheafGraph g = t % 2 ? random_instance(rng, 2)
                               : random_trivial_holonomy_sheaf(2, 4, random_graph_edges(4, 0.5, rng), rng);
    const MatrixXd basis = global_sections(g);
    EXPECT_EQ(basis.cols(), dense_kernel_dim(dense_b(g), g.num_vertices() * 3));
    if (basis.cols() > 0 && g.num_edges() > 0) {
      EXPECT_LE((dense_b(g) * basis).norm(), 1e-9);
    }
  }
}

TEST(SheafIndex, Examples) {
  EXPECT_EQ(sheaf_index(SheafGraph::with_identity_maps(3, 2, {{0, 1}})), 6);
  EXPECT_EQ(sheaf_index(SheafGraph::with_identity_maps(2, 3, {{0, 1}, {1, 2}, {0, 2}})), 0);
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const Index nv = 2 + t % 7;
    const SheafGraph g = random_sheaf(2 + t % 2, nv, random_connected_edges(nv, 0.4, rng), rng);
    EXPECT_EQ(sheaf_index(g), (g.num_vertices() - g.num_edges()) * sym_dim(g.stalk_dim()));
  }
}

TEST(Holonomy, TreeHasNoCycles) {
  Rng rng(12);
  const SheafGraph g = random_sheaf(3, 5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}}, rng);
  EXPECT_TRUE(holonomy_reps(g).empty());
}

TEST(Holonomy, IdentityCycle) {
  const auto reps = holonomy_reps(SheafGraph::with_identity_maps(2, 3, {{0, 1}, {1, 2}, {2, 0}}));
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_LE((reps[0].matrix() - MatrixXd::Identity(2, 2)).norm(), 1e-15);
}

TEST(Holonomy, RotationOnOneEdge) {
  const double angle = 0.9;
  const SheafGraph g(2, 3, {{0, 1, Orth::identity(2), Orth::identity(2)},
                            {1, 2, Orth::identity(2), Orth::identity(2)},
                            {2, 0, Orth(rotation2(angle)), Orth::identity(2)}});
  const auto reps = holonomy_reps(g);
  ASSERT_EQ(reps.size(), 1u);
  // Conjugates of a plane rotation share its trace and determinant.
  EXPECT_NEAR(reps[0].matrix().trace(), 2 * std::cos(angle), 1e-14);
  EXPECT_NEAR(reps[0].matrix().determinant(), 1.0, 1e-14);
}

TEST(HolonomyFixedSpace, Examples) {
  EXPECT_EQ(holonomy_fixed_space({}, 3).cols(), 6);
  Rng rng(13);
  const std::vector<Orth> generic = {random_orthogonal(3, rng, 2.0), random_orthogonal(3, rng, 2.0)};
  const MatrixXd fixed = holonomy_fixed_space(generic, 3);
  ASSERT_EQ(fixed.cols(), 1);
  const VectorXd id = sym_vec(Sym::identity(3)).normalized();
  EXPECT_NEAR(std::abs(fixed.col(0).dot(id)), 1.0, 1e-12);
  const MatrixXd flip = holonomy_fixed_space({Orth(diag({1, -1}))}, 2);
  ASSERT_EQ(flip.cols(), 2);
  for (Index k = 0; k < 2; ++k) EXPECT_NEAR(sym_unvec<double>(flip.col(k), 2).matrix()(0, 1), 0.0, 1e-14);
}

TEST(Holonomy, FixedSpaceEqualsKernelOnConnectedSheaves) {
  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    const Index nv = 3 + t % 5;
    const SheafGraph g = random_sheaf(2 + t % 2, nv, random_connected_edges(nv, 0.4, rng), rng);
    EXPECT_EQ(global_sections(g).cols(), holonomy_fixed_space(holonomy_reps(g), g.stalk_dim()).cols());
  }
}

TEST(ConnectedComponents, Labels) {
  const auto labels = connected_components(6, {{0, 1}, {3, 4}, {4, 5}});
  EXPECT_EQ(labels, (std::vector<Index>{0, 0, 1, 2, 2, 2}));
}

TEST(Diffusion, GlobalSectionIsFixed) {
  Rng rng(15);
  const SheafGraph g = random_trivial_holonomy_sheaf(3, 4, random_connected_edges(4, 0.5, rng), rng);
  const Cochain0 section = section_from_coordinates(global_sections(g).col(0), 3);
  for (const auto& d : diffusion_delta(g, section, false)) EXPECT_LE(d.matrix().norm(), 1e-9);
  const Cochain0 out = diffusion_step(g, section);
  for (Index v = 0; v < 4; ++v) EXPECT_LE(dist_lem(out[v], section[v]), 1e-9);
}

TEST(Diffusion, TwoNodeHandComputation) {
  const auto g = SheafGraph::with_identity_maps(2, 2, {{0, 1}});
  const Cochain0 sigma({Spd(diag({std::exp(1.0), 1})), Spd::identity(2)});
  const auto delta = diffusion_delta(g, sigma, false);
  EXPECT_LE((delta[0].matrix() - diag({1, 0})).norm(), 1e-14);
  EXPECT_LE((delta[1].matrix() - diag({-1, 0})).norm(), 1e-14);
  const auto out = cochain_log(diffusion_step(g, sigma, {false, UpdateRule::kLieResidual}));
  EXPECT_LE((out[0].matrix() - diag({2, 0})).norm(), 1e-14);
  EXPECT_LE((out[1].matrix() - diag({-1, 0})).norm(), 1e-14);
  const auto mean = cochain_log(diffusion_step(g, sigma, {false, UpdateRule::kNeighborMean}));
  EXPECT_LE((mean[0].matrix() - diag({0.5, 0})).norm(), 1e-14);
  EXPECT_LE((mean[1].matrix() - diag({0.5, 0})).norm(), 1e-14);
}

TEST(Diffusion, NormalizedUpdateHasUnitSpectralRadius) {
  Rng rng(16);
  const SheafGraph g = random_sheaf(3, 6, random_connected_edges(6, 0.6, rng), rng);
  const Cochain0 sigma = random_cochain0(6, 3, rng, 1e3);
  for (const auto& d : diffusion_delta(g, sigma, true)) {
    EXPECT_LE(sym_eig(d).eigenvalues.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
  }
}
