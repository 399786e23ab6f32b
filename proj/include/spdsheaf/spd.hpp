#pragma once

// Dense small-matrix SPD geometry: spectral calculus, the log-Euclidean Lie
// group operation, AIRM/LEM distances, the identity-tangent pairing and
// orthogonal parameterizations. Every function is a pure template on the
// scalar type; the library instantiates it with double.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include "spdsheaf/errors.hpp"

namespace spdsheaf {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Default eigenvalue floor used by clamping, lifting and the embedding.
inline constexpr double kEigenFloor = 1e-4;
/// Orthogonality tolerance ||M^T M - I||_F accepted by OrthMatrix.
inline constexpr double kOrthTolerance = 1e-10;

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Scalar>
void require_square(const Mat<Scalar>& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidInput(std::string(what) + ": expected a non-empty square matrix, got " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!all_finite(m)) throw InvalidInput(std::string(what) + ": non-finite entries");
}

}  // namespace detail

/// Element of Sym_n: tangent vectors at I_n and logarithms of SPD matrices.
template <typename Scalar>
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Symmetrizes the input as (A + A^T) / 2.
  explicit SymMatrix(const Mat<Scalar>& m) : m_(m) {
    detail::require_square(m_, "SymMatrix");
    m_ = (m_ + m_.transpose().eval()) * Scalar(0.5);
  }

  static SymMatrix zero(Index n) { return SymMatrix(Mat<Scalar>::Zero(n, n)); }
  static SymMatrix identity(Index n) { return SymMatrix(Mat<Scalar>::Identity(n, n)); }

  Index dim() const { return m_.rows(); }
  const Mat<Scalar>& matrix() const { return m_; }

  SymMatrix operator+(const SymMatrix& o) const { return SymMatrix(m_ + o.m_, Trusted{}); }
  SymMatrix operator-(const SymMatrix& o) const { return SymMatrix(m_ - o.m_, Trusted{}); }
  SymMatrix operator-() const { return SymMatrix(-m_, Trusted{}); }
  SymMatrix operator*(Scalar s) const { return SymMatrix(m_ * s, Trusted{}); }
  SymMatrix& operator+=(const SymMatrix& o) {
    m_ += o.m_;
    return *this;
  }

 private:
  struct Trusted {};
  SymMatrix(Mat<Scalar> m, Trusted) : m_(std::move(m)) {}

  Mat<Scalar> m_;
};

/// Point of SPD_n. Construction symmetrizes and rejects matrices without a
/// Cholesky factorization. Values produced by sym_exp (and their orthogonal
/// congruences) also carry their exact logarithm, which spd_log returns.
template <typename Scalar>
class SpdMatrix {
 public:
  SpdMatrix() = default;

  explicit SpdMatrix(const Mat<Scalar>& m) : m_(m) {
    detail::require_square(m_, "SpdMatrix");
    m_ = (m_ + m_.transpose().eval()) * Scalar(0.5);
    Eigen::LLT<Mat<Scalar>> llt(m_);
    if (llt.info() != Eigen::Success) {
      throw DomainError("SpdMatrix: matrix is not positive definite");
    }
  }

  /// exp(log) given both factors; `log` must be symmetric.
  static SpdMatrix from_exp_log(Mat<Scalar> matrix, Mat<Scalar> log) {
    SpdMatrix p;
    p.m_ = std::move(matrix);
    p.log_ = std::move(log);
    return p;
  }

  static SpdMatrix identity(Index n) {
    return from_exp_log(Mat<Scalar>::Identity(n, n), Mat<Scalar>::Zero(n, n));
  }

  Index dim() const { return m_.rows(); }
  const Mat<Scalar>& matrix() const { return m_; }

  bool has_log() const { return log_.size() > 0; }
  const Mat<Scalar>& cached_log() const { return log_; }

 private:
  Mat<Scalar> m_;
  Mat<Scalar> log_;
};

/// Element of O(n).
template <typename Scalar>
class OrthMatrix {
 public:
  OrthMatrix() = default;

  explicit OrthMatrix(const Mat<Scalar>& m) : m_(m) {
    detail::require_square(m_, "OrthMatrix");
    const Scalar err = orthogonality_error(m_);
    if (!(err <= Scalar(kOrthTolerance))) {
      throw InvalidInput("OrthMatrix: ||M^T M - I||_F = " + std::to_string(double(err)) +
                         " exceeds tolerance");
    }
  }

  static OrthMatrix identity(Index n) { return OrthMatrix(Mat<Scalar>::Identity(n, n)); }

  static Scalar orthogonality_error(const Mat<Scalar>& m) {
    return (m.transpose() * m - Mat<Scalar>::Identity(m.rows(), m.cols())).norm();
  }

  Index dim() const { return m_.rows(); }
  const Mat<Scalar>& matrix() const { return m_; }
  OrthMatrix transpose() const { return OrthMatrix(m_.transpose().eval(), Trusted{}); }
  OrthMatrix operator*(const OrthMatrix& o) const { return OrthMatrix(m_ * o.m_, Trusted{}); }

 private:
  struct Trusted {};
  OrthMatrix(Mat<Scalar> m, Trusted) : m_(std::move(m)) {}

  Mat<Scalar> m_;
};

/// Eigenvalues sorted descending with matching orthonormal eigenvector columns.
template <typename Scalar>
struct SpectralDecomp {
  Vec<Scalar> eigenvalues;
  Mat<Scalar> eigenvectors;

  Mat<Scalar> reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  }
};

template <typename Scalar>
SpectralDecomp<Scalar> sym_eig(const Mat<Scalar>& s) {
  detail::require_square(s, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(s);
  if (solver.info() != Eigen::Success) throw InvalidInput("sym_eig: eigensolver failed");
  // Eigen returns ascending order.
  SpectralDecomp<Scalar> out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

template <typename Scalar>
SpectralDecomp<Scalar> sym_eig(const SymMatrix<Scalar>& s) {
  return sym_eig<Scalar>(s.matrix());
}

/// V f(Λ) V^T for a scalar function f applied to each eigenvalue.
template <typename Scalar, typename F>
Mat<Scalar> spectral_apply(const SpectralDecomp<Scalar>& d, F&& f) {
  Vec<Scalar> mapped = d.eigenvalues.unaryExpr(std::forward<F>(f));
  return d.eigenvectors * mapped.asDiagonal() * d.eigenvectors.transpose();
}

template <typename Scalar>
SymMatrix<Scalar> spd_log(const SpdMatrix<Scalar>& p) {
  if (p.has_log()) return SymMatrix<Scalar>(p.cached_log());
  const auto d = sym_eig<Scalar>(p.matrix());
  if (!(d.eigenvalues.minCoeff() > Scalar(0))) {
    throw DomainError("spd_log: non-positive eigenvalue");
  }
  return SymMatrix<Scalar>(spectral_apply(d, [](Scalar x) { return std::log(x); }));
}

template <typename Scalar>
SpdMatrix<Scalar> sym_exp(const SymMatrix<Scalar>& s) {
  const auto d = sym_eig(s);
  if (d.eigenvalues.maxCoeff() >= std::log(std::numeric_limits<Scalar>::max())) {
    throw OverflowError("sym_exp: eigenvalue too large, exp overflows");
  }
  Mat<Scalar> e = spectral_apply(d, [](Scalar x) { return std::exp(x); });
  e = (e + e.transpose().eval()) * Scalar(0.5);
  return SpdMatrix<Scalar>::from_exp_log(std::move(e), s.matrix());
}

/// P ⊙ Q = exp(log P + log Q).
template <typename Scalar>
SpdMatrix<Scalar> group_op(const SpdMatrix<Scalar>& p, const SpdMatrix<Scalar>& q) {
  if (p.dim() != q.dim()) throw DimensionMismatch("group_op: dimension mismatch");
  return sym_exp(spd_log(p) + spd_log(q));
}

template <typename Scalar>
SpdMatrix<Scalar> group_inv(const SpdMatrix<Scalar>& p) {
  return sym_exp(-spd_log(p));
}

template <typename Scalar>
SpdMatrix<Scalar> spd_power(const SpdMatrix<Scalar>& p, Scalar theta) {
  if (!std::isfinite(double(theta))) throw InvalidInput("spd_power: theta must be finite");
  if (theta == Scalar(1)) return p;
  const auto d = sym_eig<Scalar>(p.matrix());
  return SpdMatrix<Scalar>(spectral_apply(d, [theta](Scalar x) { return std::pow(x, theta); }));
}

/// Affine-invariant distance ||log(X^{-1/2} Y X^{-1/2})||_F.
template <typename Scalar>
Scalar dist_airm(const SpdMatrix<Scalar>& x, const SpdMatrix<Scalar>& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("dist_airm: dimension mismatch");
  const auto dx = sym_eig<Scalar>(x.matrix());
  const Mat<Scalar> inv_sqrt =
      spectral_apply(dx, [](Scalar v) { return Scalar(1) / std::sqrt(v); });
  Mat<Scalar> z = inv_sqrt * y.matrix() * inv_sqrt;
  z = (z + z.transpose().eval()) * Scalar(0.5);
  const auto dz = sym_eig<Scalar>(z);
  Scalar acc = 0;
  for (Index i = 0; i < dz.eigenvalues.size(); ++i) {
    const Scalar l = std::log(dz.eigenvalues(i));
    acc += l * l;
  }
  return std::sqrt(acc);
}

/// Log-Euclidean distance ||log X - log Y||_F.
template <typename Scalar>
Scalar dist_lem(const SpdMatrix<Scalar>& x, const SpdMatrix<Scalar>& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("dist_lem: dimension mismatch");
  return (spd_log(x).matrix() - spd_log(y).matrix()).norm();
}

template <typename Scalar>
Scalar frobenius_inner(const SymMatrix<Scalar>& a, const SymMatrix<Scalar>& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("frobenius_inner: dimension mismatch");
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

/// <X, Y> = <log X, log Y>_F, the pairing induced at the identity.
template <typename Scalar>
Scalar pairing(const SpdMatrix<Scalar>& x, const SpdMatrix<Scalar>& y) {
  return frobenius_inner(spd_log(x), spd_log(y));
}

/// M P M^T.
template <typename Scalar>
SpdMatrix<Scalar> congruence(const OrthMatrix<Scalar>& m, const SpdMatrix<Scalar>& p) {
  if (m.dim() != p.dim()) throw DimensionMismatch("congruence: dimension mismatch");
  Mat<Scalar> c = m.matrix() * p.matrix() * m.matrix().transpose();
  c = (c + c.transpose().eval()) * Scalar(0.5);
  if (!p.has_log()) return SpdMatrix<Scalar>(c);
  const Mat<Scalar> l = m.matrix() * p.cached_log() * m.matrix().transpose();
  return SpdMatrix<Scalar>::from_exp_log(std::move(c), (l + l.transpose()) * Scalar(0.5));
}

/// M S M^T on the tangent side; log(M P M^T) = M (log P) M^T.
template <typename Scalar>
SymMatrix<Scalar> congruence(const OrthMatrix<Scalar>& m, const SymMatrix<Scalar>& s) {
  if (m.dim() != s.dim()) throw DimensionMismatch("congruence: dimension mismatch");
  return SymMatrix<Scalar>(m.matrix() * s.matrix() * m.matrix().transpose());
}

/// Scaled Cayley transform (I - S/2)^{-1} (I + S/2) of a skew-symmetric S.
template <typename Scalar>
OrthMatrix<Scalar> cayley(const Mat<Scalar>& s) {
  detail::require_square(s, "cayley");
  const Scalar skew_err = (s + s.transpose()).norm();
  if (!(skew_err <= Scalar(1e-12) * std::max(Scalar(1), s.norm()))) {
    throw InvalidInput("cayley: argument is not skew-symmetric");
  }
  const Index n = s.rows();
  const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  const Mat<Scalar> half = s * Scalar(0.5);
  Eigen::PartialPivLU<Mat<Scalar>> lu(id - half);
  const Scalar rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<Scalar>::epsilon())) {
    throw ParameterizationError("cayley: I - S/2 is singular");
  }
  return OrthMatrix<Scalar>(lu.solve(id + half));
}

/// Skew matrix L - L^T from the strictly lower triangle filled row-major
/// with n(n-1)/2 parameters.
template <typename Scalar>
Mat<Scalar> skew_from_params(const Vec<Scalar>& params, Index n) {
  if (params.size() != n * (n - 1) / 2) {
    throw DimensionMismatch("skew_from_params: expected n(n-1)/2 parameters");
  }
  Mat<Scalar> l = Mat<Scalar>::Zero(n, n);
  Index k = 0;
  for (Index i = 1; i < n; ++i) {
    for (Index j = 0; j < i; ++j) l(i, j) = params(k++);
  }
  return l - l.transpose();
}

namespace detail {

/// (log a - log b) / (a - b), falling back to the derivative 1/a for near-equal arguments.
template <typename Scalar>
Scalar log_divided_difference(Scalar a, Scalar b) {
  const Scalar gap = a - b;
  if (std::abs(gap) > Scalar(1e-8) * std::max(a, b)) {
    return std::log1p(gap / b) / gap;
  }
  return Scalar(1) / a;
}

}  // namespace detail

/// Fréchet derivative of the matrix logarithm at P applied to V, via the
/// divided-difference (Daleckii–Krein) formula in the eigenbasis of P.
template <typename Scalar>
SymMatrix<Scalar> frechet_log(const SpdMatrix<Scalar>& p, const SymMatrix<Scalar>& v) {
  if (p.dim() != v.dim()) throw DimensionMismatch("frechet_log: dimension mismatch");
  const auto d = sym_eig<Scalar>(p.matrix());
  const Mat<Scalar>& u = d.eigenvectors;
  Mat<Scalar> w = u.transpose() * v.matrix() * u;
  for (Index j = 0; j < w.cols(); ++j) {
    for (Index i = 0; i < w.rows(); ++i) {
      w(i, j) *= detail::log_divided_difference(d.eigenvalues(i), d.eigenvalues(j));
    }
  }
  return SymMatrix<Scalar>(u * w * u.transpose());
}

/// Eigenvalue nonlinearity: keep λ_i when log λ_i > 0, otherwise replace it
/// by exp(delta * i) with i the 1-based position in descending order.
template <typename Scalar>
SpdMatrix<Scalar> tg_re_eig(const SpdMatrix<Scalar>& p, Scalar delta = Scalar(0.1)) {
  // Works on log-eigenvalues so ill-conditioned inputs keep an exact spectrum.
  auto d = p.has_log() ? sym_eig<Scalar>(p.cached_log()) : sym_eig<Scalar>(p.matrix());
  if (!p.has_log()) d.eigenvalues = d.eigenvalues.array().log().matrix();
  for (Index i = 0; i < d.eigenvalues.size(); ++i) {
    if (!(d.eigenvalues(i) > Scalar(0))) d.eigenvalues(i) = delta * Scalar(i + 1);
  }
  return sym_exp(SymMatrix<Scalar>(d.reconstruct()));
}

/// exp of the Shannon entropy of the normalized spectrum (0 log 0 = 0).
template <typename Scalar>
Scalar erank_from_eigenvalues(const Vec<Scalar>& eigenvalues) {
  const Scalar total = eigenvalues.sum();
  Scalar h = 0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const Scalar p = eigenvalues(i) / total;
    if (p > Scalar(0)) h -= p * std::log(p);
  }
  return std::exp(h);
}

template <typename Scalar>
Scalar erank(const SpdMatrix<Scalar>& p) {
  return erank_from_eigenvalues<Scalar>(sym_eig<Scalar>(p.matrix()).eigenvalues);
}

/// Projects a symmetric matrix onto {eigenvalues >= eps}. Inputs already above
/// the floor are returned bit-identical.
template <typename Scalar>
SpdMatrix<Scalar> clamp_spd(const SymMatrix<Scalar>& s, Scalar eps = Scalar(kEigenFloor)) {
  if (!(eps > Scalar(0))) throw InvalidInput("clamp_spd: eps must be positive");
  auto d = sym_eig(s);
  if (d.eigenvalues.minCoeff() >= eps) return SpdMatrix<Scalar>(s.matrix());
  d.eigenvalues = d.eigenvalues.cwiseMax(eps);
  return SpdMatrix<Scalar>(d.reconstruct());
}

/// Power-Euclidean mean ((1/N) Σ X_i^θ)^{1/θ}, 0 < θ <= 1.
template <typename Scalar>
SpdMatrix<Scalar> power_euclidean_mean(std::span<const SpdMatrix<Scalar>> xs, Scalar theta) {
  if (xs.empty()) throw InvalidInput("power_euclidean_mean: empty input");
  if (!(theta > Scalar(0) && theta <= Scalar(1))) {
    throw InvalidInput("power_euclidean_mean: theta must lie in (0, 1]");
  }
  const Index n = xs.front().dim();
  Mat<Scalar> acc = Mat<Scalar>::Zero(n, n);
  for (const auto& x : xs) {
    if (x.dim() != n) throw DimensionMismatch("power_euclidean_mean: dimension mismatch");
    acc += spd_power(x, theta).matrix();
  }
  acc /= Scalar(xs.size());
  return spd_power(SpdMatrix<Scalar>(acc), Scalar(1) / theta);
}

// Commonly used double-precision aliases.
using Sym = SymMatrix<double>;
using Spd = SpdMatrix<double>;
using Orth = OrthMatrix<double>;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;

}  // namespace spdsheaf
