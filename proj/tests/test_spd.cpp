#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "spdsheaf/errors.hpp"
#include "spdsheaf/random.hpp"
#include "spdsheaf/spd.hpp"
#include "spdsheaf/symvec.hpp"

using namespace spdsheaf;

namespace {

MatrixXd diag(std::initializer_list<double> values) {
  VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v.asDiagonal();
}

// Matrix log via an independent eigensolver path (Eigen's complex-free solver on the raw matrix).
MatrixXd reference_log(const MatrixXd& p) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(p);
  return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

TEST(SymEig, IdentityHasUnitSpectrum) {
  const auto d = sym_eig<double>(MatrixXd::Identity(3, 3));
  EXPECT_TRUE(d.eigenvalues.isApprox(VectorXd::Ones(3)));
}

TEST(SymEig, DiagonalSortedDescending) {
  const auto d = sym_eig<double>(diag({1, 3, 2}));
  EXPECT_DOUBLE_EQ(d.eigenvalues(0), 3.0);
  EXPECT_DOUBLE_EQ(d.eigenvalues(1), 2.0);
  EXPECT_DOUBLE_EQ(d.eigenvalues(2), 1.0);
  EXPECT_NEAR(std::abs(d.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(d.eigenvectors(2, 1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(d.eigenvectors(0, 2)), 1.0, 1e-15);
}

TEST(SymEig, RandomReconstruction) {
  Rng rng(1);
  const Sym s = random_sym(5, rng);
  const auto d = sym_eig(s);
  EXPECT_LE((d.reconstruct() - s.matrix()).norm(), 1e-10);
}

TEST(SpdMatrix, RejectsIndefinite) {
  EXPECT_THROW(Spd(diag({1.0, -1.0})), DomainError);
  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(Spd{bad}, InvalidInput);
}

TEST(SpdLog, Examples) {
  EXPECT_LE(spd_log(Spd::identity(3)).matrix().norm(), 1e-15);
  const Spd p(diag({std::exp(1.0), 1, 1}));
  EXPECT_LE((spd_log(p).matrix() - diag({1, 0, 0})).norm(), 1e-15);
}

TEST(SpdLog, RoundTrip) {
  Rng rng(2);
  const Spd p = random_spd(4, rng);
  const Spd raw(p.matrix());
  EXPECT_LE((sym_exp(spd_log(raw)).matrix() - raw.matrix()).norm() / raw.matrix().norm(), 1e-9);
  EXPECT_LE((spd_log(raw).matrix() - reference_log(raw.matrix())).norm(), 1e-10);
}

TEST(SymExp, Examples) {
  EXPECT_LE((sym_exp(Sym::zero(3)).matrix() - MatrixXd::Identity(3, 3)).norm(), 1e-15);
  EXPECT_LE((sym_exp(Sym(diag({1, 0, 0}))).matrix() - diag({std::exp(1.0), 1, 1})).norm(), 1e-14);
}

TEST(SymExp, RandomRoundTripAndOverflow) {
  Rng rng(3);
  const Sym s = random_sym(4, rng);
  const Spd e = sym_exp(s);
  EXPECT_LE((reference_log(e.matrix()) - s.matrix()).norm(), 1e-10);
  EXPECT_THROW(sym_exp(Sym(diag({800.0, 0.0}))), OverflowError);
}

TEST(GroupOp, Examples) {
  Rng rng(4);
  const Spd p = random_spd(3, rng);
  EXPECT_LE(dist_lem(group_op(p, Spd::identity(3)), p), 1e-12);
  const Spd ab = group_op(Spd(diag({2, 3})), Spd(diag({5, 7})));
  EXPECT_LE((ab.matrix() - diag({10, 21})).norm(), 1e-12);
  const Spd q = random_spd(3, rng);
  const MatrixXd lhs = reference_log(group_op(p, q).matrix());
  EXPECT_LE((lhs - reference_log(p.matrix()) - reference_log(q.matrix())).norm(), 1e-9);
  EXPECT_THROW(group_op(p, Spd::identity(2)), DimensionMismatch);
}

TEST(GroupInv, Examples) {
  EXPECT_LE((group_inv(Spd::identity(2)).matrix() - MatrixXd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE((group_inv(Spd(diag({2, 0.5}))).matrix() - diag({0.5, 2})).norm(), 1e-14);
  Rng rng(5);
  const Spd p = random_spd(4, rng);
  EXPECT_LE(dist_lem(group_op(p, group_inv(p)), Spd::identity(4)), 1e-12);
}

TEST(SpdPower, Examples) {
  Rng rng(6);
  const Spd p = random_spd(3, rng);
  EXPECT_EQ(spd_power(p, 1.0).matrix(), p.matrix());
  EXPECT_LE((spd_power(Spd(diag({4, 1})), 0.5).matrix() - diag({2, 1})).norm(), 1e-14);
  EXPECT_LE((spd_power(spd_power(p, 0.3), 1.0 / 0.3).matrix() - p.matrix()).norm() / p.matrix().norm(), 1e-9);
}

TEST(DistAirm, Examples) {
  Rng rng(7);
  const Spd x = random_spd(3, rng);
  EXPECT_LE(dist_airm(x, x), 1e-12);
  EXPECT_NEAR(dist_airm(Spd::identity(3), Spd(diag({std::exp(2.0), 1, 1}))), 2.0, 1e-12);
  const Spd y = random_spd(3, rng);
  const Orth m = random_orthogonal(3, rng, 2.0);
  EXPECT_LE(std::abs(dist_airm(congruence(m, x), congruence(m, y)) - dist_airm(x, y)), 1e-8);
  // Symmetric and matches the generalized eigenvalue formula.
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(y.matrix(), x.matrix());
  const double ref = std::sqrt(ges.eigenvalues().array().log().square().sum());
  EXPECT_NEAR(dist_airm(x, y), ref, 1e-10);
  EXPECT_NEAR(dist_airm(y, x), ref, 1e-10);
}

TEST(DistLem, Examples) {
  Rng rng(8);
  const Spd x = random_spd(2, rng);
  EXPECT_EQ(dist_lem(x, x), 0.0);
  EXPECT_NEAR(dist_lem(Spd::identity(2), Spd(diag({std::exp(1.0), std::exp(1.0)}))), std::sqrt(2.0), 1e-14);
  const Spd y = random_spd(2, rng);
  const Orth m = random_orthogonal(2, rng);
  EXPECT_LE(std::abs(dist_lem(congruence(m, x), congruence(m, y)) - dist_lem(x, y)), 1e-8);
}

TEST(Pairing, Examples) {
  Rng rng(9);
  const Spd x = random_spd(3, rng);
  EXPECT_EQ(pairing(Spd::identity(3), x), 0.0);
  EXPECT_NEAR(pairing(x, x), reference_log(x.matrix()).squaredNorm(), 1e-10);
  const Spd y1 = random_spd(3, rng);
  const Spd y2 = random_spd(3, rng);
  EXPECT_NEAR(pairing(x, group_op(y1, y2)), pairing(x, y1) + pairing(x, y2), 1e-9);
}

TEST(Congruence, Examples) {
  Rng rng(10);
  const Spd p = random_spd(3, rng);
  EXPECT_LE((congruence(Orth::identity(3), p).matrix() - p.matrix()).norm(), 1e-14);
  MatrixXd perm = MatrixXd::Zero(3, 3);
  perm(0, 2) = perm(1, 0) = perm(2, 1) = 1.0;
  const Spd d(diag({1, 2, 3}));
  EXPECT_LE((congruence(Orth(perm), d).matrix() - diag({3, 1, 2})).norm(), 1e-15);
  EXPECT_THROW(Orth(MatrixXd::Constant(2, 2, 1.0)), InvalidInput);
}

TEST(Cayley, ZeroIsIdentity) {
  EXPECT_EQ(cayley<double>(MatrixXd::Zero(3, 3)).matrix(), MatrixXd::Identity(3, 3));
}

TEST(Cayley, QuarterTurn) {
  MatrixXd s(2, 2);
  s << 0, 2, -2, 0;
  // (I - S/2)^{-1} (I + S/2) with S/2 = [[0, 1], [-1, 0]] is [[0, 1], [-1, 0]].
  MatrixXd expected(2, 2);
  expected << 0, 1, -1, 0;
  EXPECT_LE((cayley<double>(s).matrix() - expected).norm(), 1e-15);
}

TEST(Cayley, RandomOrthogonal) {
  Rng rng(11);
  const MatrixXd a = random_gaussian(3, 3, rng, 3.0);
  const MatrixXd q = cayley<double>(a - a.transpose()).matrix();
  EXPECT_LE((q.transpose() * q - MatrixXd::Identity(3, 3)).norm(), 1e-10);
  EXPECT_NEAR(q.determinant(), 1.0, 1e-10);
  EXPECT_THROW(cayley<double>(a), InvalidInput);
}

TEST(SkewFromParams, LowerTriangleRowMajor) {
  VectorXd p(3);
  p << 1, 2, 3;
  const MatrixXd s = skew_from_params<double>(p, 3);
  EXPECT_DOUBLE_EQ(s(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(2, 0), 2.0);
  EXPECT_DOUBLE_EQ(s(2, 1), 3.0);
  EXPECT_LE((s + s.transpose()).norm(), 0.0);
}

TEST(FrechetLog, AtIdentity) {
  Rng rng(12);
  const Sym v = random_sym(3, rng);
  EXPECT_LE((frechet_log(Spd::identity(3), v).matrix() - v.matrix()).norm(), 1e-14);
}

TEST(FrechetLog, DiagonalComponentwise) {
  const Spd p(diag({2, 5, 0.25}));
  const Sym v(diag({1, -3, 0.5}));
  EXPECT_LE((frechet_log(p, v).matrix() - diag({0.5, -0.6, 2.0})).norm(), 1e-14);
}

TEST(FrechetLog, CentralDifferences) {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const Spd p(random_spd(3, rng).matrix());
    const Sym v = random_sym(3, rng);
    const double h = 1e-5;
    const MatrixXd fd =
        (reference_log(p.matrix() + h * v.matrix()) - reference_log(p.matrix() - h * v.matrix())) / (2 * h);
    EXPECT_LE((frechet_log(p, v).matrix() - fd).norm() / fd.norm(), 1e-5);
  }
}

TEST(TgReEig, AboveOneUnchanged) {
  const Spd out = tg_re_eig(Spd(diag({2, 3})));
  EXPECT_LE((out.matrix() - diag({2, 3})).norm(), 1e-14);
}

TEST(TgReEig, FloorsByDescendingIndex) {
  const auto ev = sym_eig<double>(tg_re_eig(Spd(diag({0.5, 0.1}))).matrix()).eigenvalues;
  // 0.5 is first in descending order, 0.1 second.
  EXPECT_NEAR(ev(0), std::exp(0.2), 1e-14);
  EXPECT_NEAR(ev(1), std::exp(0.1), 1e-14);
}

TEST(TgReEig, Mixed) {
  const auto ev = sym_eig<double>(tg_re_eig(Spd(diag({3, 0.5}))).matrix()).eigenvalues;
  EXPECT_NEAR(ev(0), 3.0, 1e-14);
  EXPECT_NEAR(ev(1), std::exp(0.2), 1e-14);
}

TEST(TgReEig, IllConditionedInput) {
  const Spd p = sym_exp(Sym(diag({60.0, -60.0, 0.5})));
  const auto ev = sym_eig<double>(spd_log(tg_re_eig(p)).matrix()).eigenvalues;
  EXPECT_NEAR(ev(0), 60.0, 1e-12);
  EXPECT_NEAR(ev(1), 0.5, 1e-12);
  EXPECT_NEAR(ev(2), 0.3, 1e-12);
}

TEST(Erank, Examples) {
  EXPECT_NEAR(erank(Spd::identity(3)), 3.0, 1e-14);
  EXPECT_NEAR(erank(Spd(diag({1, 1e-9, 1e-9}))), 1.0, 1e-6);
  EXPECT_NEAR(erank_from_eigenvalues<double>(Eigen::Vector3d(1, 1, 0)), 2.0, 1e-14);
  const double h = -2 * 0.25 * std::log(0.25) - 0.5 * std::log(0.5);
  EXPECT_NEAR(erank(Spd(diag({2, 1, 1}))), std::exp(h), 1e-14);
}

TEST(ClampSpd, Examples) {
  const Spd c = clamp_spd(Sym(diag({1, -0.5})), 1e-4);
  EXPECT_LE((c.matrix() - diag({1, 1e-4})).norm(), 1e-15);
  Rng rng(14);
  const Spd p = random_spd(3, rng);
  EXPECT_EQ(clamp_spd(Sym(p.matrix())).matrix(), Sym(p.matrix()).matrix());
  const Sym s = random_sym(4, rng);
  const auto ev = sym_eig<double>(clamp_spd(s, 0.05).matrix()).eigenvalues;
  const auto orig = sym_eig(s).eigenvalues;
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(ev(i), std::max(orig(i), 0.05), 1e-12);
  EXPECT_THROW(clamp_spd(s, 0.0), InvalidInput);
}

TEST(PowerEuclideanMean, Examples) {
  Rng rng(15);
  const Spd p = random_spd(3, rng);
  const std::vector<Spd> same(4, p);
  EXPECT_LE((power_euclidean_mean<double>(same, 0.5).matrix() - p.matrix()).norm() / p.matrix().norm(), 1e-12);
  const std::vector<Spd> two = {Spd(diag({4})), Spd(diag({16}))};
  EXPECT_NEAR(power_euclidean_mean<double>(two, 0.5).matrix()(0, 0), 9.0, 1e-13);
  const std::vector<Spd> xs = {random_spd(3, rng), random_spd(3, rng), random_spd(3, rng)};
  const MatrixXd mean = (xs[0].matrix() + xs[1].matrix() + xs[2].matrix()) / 3.0;
  EXPECT_LE((power_euclidean_mean<double>(xs, 1.0).matrix() - mean).norm(), 1e-12);
  EXPECT_THROW(power_euclidean_mean<double>(xs, 1.5), InvalidInput);
  EXPECT_THROW(power_euclidean_mean<double>(std::vector<Spd>{}, 0.5), InvalidInput);
}

TEST(SymVec, ScaledPairingAndRoundTrip) {
  Rng rng(16);
  const Sym a = random_sym(4, rng);
  const Sym b = random_sym(4, rng);
  EXPECT_EQ(sym_vec(a).size(), sym_dim(4));
  EXPECT_NEAR(sym_vec(a).dot(sym_vec(b)), (a.matrix().array() * b.matrix().array()).sum(), 1e-12);
  EXPECT_LE((sym_unvec<double>(sym_vec(a), 4).matrix() - a.matrix()).norm(), 1e-15);
  EXPECT_EQ(sym_dim(13), 91);
}

TEST(SymVec, LogUpperRoundTrip) {
  Rng rng(17);
  const Spd p = random_spd(3, rng);
  const VectorXd v = log_upper(p);
  ASSERT_EQ(v.size(), 6);
  const MatrixXd l = reference_log(p.matrix());
  EXPECT_NEAR(v(1), l(0, 1), 1e-12);
  EXPECT_NEAR(v(3), l(1, 1), 1e-12);
  EXPECT_LE((from_log_upper<double>(v).matrix() - p.matrix()).norm() / p.matrix().norm(), 1e-12);
}

TEST(SymVec, ConjugationOperatorMatchesAction) {
  Rng rng(18);
  const Orth m = random_orthogonal(3, rng, 2.0);
  const MatrixXd op = conjugation_operator<double>(m.matrix());
  for (Index k = 0; k < sym_dim(3); ++k) {
    const Sym e = sym_unvec<double>(VectorXd::Unit(sym_dim(3), k), 3);
    const MatrixXd image = m.matrix() * e.matrix() * m.matrix().transpose();
    EXPECT_LE((op.col(k) - sym_vec(Sym(image))).norm(), 1e-13);
  }
}
