#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "spdsheaf/errors.hpp"
#include "spdsheaf/euclid.hpp"
#include "spdsheaf/random.hpp"

using namespace spdsheaf;

namespace {

Index dense_kernel_dim(const MatrixXd& a) {
  if (a.rows() == 0) return a.cols();
  Eigen::FullPivLU<MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  return a.cols() - lu.rank();
}

EuclidSheaf frustrated_two_cycle() {
  const Orth one = Orth::identity(1);
  const Orth minus(MatrixXd::Constant(1, 1, -1.0));
  return EuclidSheaf(SheafGraph(1, 2, {{0, 1, one, one}, {0, 1, one, minus}}));
}

}  // namespace

TEST(EuclidCoboundary, Examples) {
  const EuclidSheaf tree(SheafGraph::with_identity_maps(3, 3, {{0, 1}, {1, 2}}));
  const VectorXd c = VectorXd::LinSpaced(3, 1, 3);
  for (const auto& d : euclid_coboundary(tree, {c, c, c})) EXPECT_EQ(d.norm(), 0.0);
  const EuclidSheaf edge(SheafGraph::with_identity_maps(2, 2, {{0, 1}}));
  const auto out = euclid_coboundary(edge, {VectorXd::Unit(2, 0), VectorXd::Zero(2)});
  EXPECT_EQ(out[0], VectorXd::Unit(2, 0));
}

TEST(EuclidCoboundary, MatchesIncidenceOracle) {
  Rng rng(1);
  const EuclidSheaf s(random_sheaf(3, 5, random_connected_edges(5, 0.5, rng), rng));
  VecCochain0 x;
  VectorXd stacked(15);
  for (Index v = 0; v < 5; ++v) {
    x.push_back(random_gaussian(3, 1, rng));
    stacked.segment(v * 3, 3) = x.back();
  }
  // Row block e: +M_t at the tail column block, -M_h at the head column block.
  const auto& g = s.structure();
  MatrixXd b = MatrixXd::Zero(g.num_edges() * 3, 15);
  for (Index e = 0; e < g.num_edges(); ++e) {
    b.block(e * 3, g.edge(e).tail * 3, 3, 3) += g.edge(e).map_tail.matrix();
    b.block(e * 3, g.edge(e).head * 3, 3, 3) -= g.edge(e).map_head.matrix();
  }
  const auto out = euclid_coboundary(s, x);
  for (Index e = 0; e < g.num_edges(); ++e) {
    EXPECT_LE((out[static_cast<std::size_t>(e)] - (b * stacked).segment(e * 3, 3)).norm(), 1e-14);
  }
}

TEST(EuclidSections, Examples) {
  EXPECT_EQ(euclid_sections(EuclidSheaf(SheafGraph::with_identity_maps(3, 4, {{0, 1}, {1, 2}, {1, 3}}))).cols(), 3);
  EXPECT_EQ(euclid_sections(frustrated_two_cycle()).cols(), 0);
  EXPECT_EQ(euclid_sections(EuclidSheaf(SheafGraph::with_identity_maps(2, 3, {}))).cols(), 6);
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const EuclidSheaf s(random_sheaf(2, 4, random_graph_edges(4, 0.5, rng), rng));
    EXPECT_EQ(euclid_sections(s).cols(), dense_kernel_dim(euclid_coboundary_matrix(s)));
  }
}

TEST(EmbedPhi, Examples) {
  EXPECT_LE((embed_phi(VectorXd::Zero(3)).matrix() - 1e-4 * MatrixXd::Identity(3, 3)).norm(), 1e-18);
  Eigen::Vector3d d(1 + 1e-4, 1e-4, 1e-4);
  EXPECT_LE((embed_phi(VectorXd::Unit(3, 0), 1e-4).matrix() - MatrixXd(d.asDiagonal())).norm(), 1e-16);
  const double p1 = (1 + 1e-4) / (1 + 3e-4);
  const double p2 = 1e-4 / (1 + 3e-4);
  const double expected = std::exp(-p1 * std::log(p1) - 2 * p2 * std::log(p2));
  EXPECT_NEAR(erank(embed_phi(VectorXd::Unit(3, 1))), expected, 1e-12);
  EXPECT_LE(expected, 1.05);
  EXPECT_THROW(embed_phi(VectorXd::Zero(2), 0.0), InvalidInput);
}

TEST(EmbedPhi, SpectrumHasAtMostTwoValues) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = random_gaussian(4, 1, rng);
    const Spd p = embed_phi(x);
    EXPECT_LE(distinct_eigenvalue_count(p), 2);
    const auto ev = sym_eig<double>(p.matrix()).eigenvalues;
    EXPECT_NEAR(ev(0), x.squaredNorm() + 1e-4, 1e-12);
    EXPECT_NEAR(ev(3), 1e-4, 1e-12);
  }
}

TEST(MatchedSheaf, Equivariance) {
  Rng rng(4);
  const EuclidSheaf id(SheafGraph::with_identity_maps(2, 3, {{0, 1}, {1, 2}}));
  const SheafGraph spd = matched_spd_sheaf(id);
  for (const auto& e : spd.edges()) EXPECT_EQ(e.map_tail.matrix(), MatrixXd::Identity(2, 2));
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = random_gaussian(3, 1, rng);
    const Orth m = random_orthogonal(3, rng, 2.0);
    EXPECT_LE((embed_phi(VectorXd(m.matrix() * x)).matrix() - congruence(m, embed_phi(x)).matrix()).norm(), 1e-10);
    const Spd sigma = random_spd(3, rng);
    const VectorXd a = random_gaussian(3, 1, rng);
    const VectorXd b = random_gaussian(3, 1, rng);
    const double lhs = a.dot(congruence(m, sigma).matrix() * b);
    const double rhs = (m.matrix().transpose() * a).dot(sigma.matrix() * (m.matrix().transpose() * b));
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(KernelCorrespondence, ConstantSectionOnTree) {
  const EuclidSheaf tree(SheafGraph::with_identity_maps(3, 4, {{0, 1}, {1, 2}, {2, 3}}));
  const VectorXd c(Eigen::Vector3d(1, -2, 0.5));
  const auto report = check_kernel_correspondence(tree, matched_spd_sheaf(tree), {c, c, c, c});
  EXPECT_TRUE(report.forward_passed);
  for (double r : report.edge_residuals) EXPECT_LE(r, 1e-12);
  EXPECT_EQ(report.converse, ConverseStatus::kPassed);
}

TEST(KernelCorrespondence, FrustratedTwoCycle) {
  const EuclidSheaf s = frustrated_two_cycle();
  const VectorXd one = VectorXd::Ones(1);
  // (1, 1) is not a Euclidean section: the second edge gives 1 - (-1) = 2.
  EXPECT_NEAR(euclid_coboundary(s, {one, one})[1](0), 2.0, 0.0);
  const auto report = check_kernel_correspondence(s, matched_spd_sheaf(s), {one, one});
  EXPECT_TRUE(report.forward_passed);
  EXPECT_EQ(global_sections(matched_spd_sheaf(s)).cols(), 1);
}

TEST(KernelCorrespondence, RandomSectionsPass) {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const SheafGraph g = random_trivial_holonomy_sheaf(3, 5, random_connected_edges(5, 0.4, rng), rng);
    const EuclidSheaf s(g);
    const MatrixXd basis = euclid_sections(s);
    ASSERT_EQ(basis.cols(), 3);
    const VecCochain0 x = unstack_vectors(basis * random_gaussian(3, 1, rng), 3);
    const auto report = check_kernel_correspondence(s, matched_spd_sheaf(s), x);
    EXPECT_TRUE(report.forward_passed);
    EXPECT_LE(report.forward_residual, 1e-7);
    EXPECT_EQ(report.converse, ConverseStatus::kGaugeClassOnly);
  }
}

TEST(StrictnessWitness, IdentityPath) {
  const SheafGraph path = SheafGraph::with_identity_maps(3, 3, {{0, 1}, {1, 2}});
  const auto w = strictness_witness(path);
  EXPECT_TRUE(w.passed);
  EXPECT_EQ(w.distinct_eigenvalues, 3);
  for (const auto& v : w.section.values) {
    EXPECT_LE((v.matrix() - MatrixXd(Eigen::Vector3d(1, 2, 3).asDiagonal())).norm(), 1e-14);
  }
}

TEST(StrictnessWitness, GaugeSheafAndPreconditions) {
  Rng rng(6);
  const SheafGraph g = random_trivial_holonomy_sheaf(4, 6, random_connected_edges(6, 0.5, rng), rng);
  const auto w = strictness_witness(g);
  EXPECT_TRUE(w.passed);
  EXPECT_LE(w.max_residual, 1e-9);
  EXPECT_THROW(strictness_witness(SheafGraph::with_identity_maps(2, 2, {{0, 1}})), NotApplicable);
  const SheafGraph twisted = random_sheaf(3, 3, {{0, 1}, {1, 2}, {0, 2}}, rng);
  EXPECT_THROW(strictness_witness(twisted), NotApplicable);
}

TEST(IndexJump, IdentityTree) {
  for (Index n = 1; n <= 4; ++n) {
    const EuclidSheaf tree(SheafGraph::with_identity_maps(n, 4, {{0, 1}, {1, 2}, {1, 3}}));
    const auto jump = index_jump(tree);
    EXPECT_EQ(jump.spd_kernel_dim - jump.euclid_kernel_dim, n * (n - 1) / 2);
    EXPECT_EQ(jump.expected, n * (n - 1) / 2);
  }
  const EuclidSheaf forest(SheafGraph::with_identity_maps(3, 4, {{0, 1}, {2, 3}}));
  const auto jump = index_jump(forest);
  EXPECT_EQ(jump.components, 2);
  EXPECT_EQ(jump.spd_kernel_dim - jump.euclid_kernel_dim, 6);
}
