#pragma once

// Coordinates on Sym_n. `sym_vec` stacks the upper triangle row by row with
// off-diagonal entries scaled by sqrt(2), so the Euclidean inner product of two
// vectors equals the Frobenius inner product of the matrices. `log_upper` is the
// unscaled upper triangle used by the JSON serialization.

#include <cmath>

#include "spdsheaf/spd.hpp"

namespace spdsheaf {

constexpr Index sym_dim(Index n) { return n * (n + 1) / 2; }

/// Inverse of sym_dim; throws if m is not triangular.
inline Index stalk_dim_from_sym_dim(Index m) {
  Index n = 0;
  while (sym_dim(n) < m) ++n;
  if (sym_dim(n) != m) throw InvalidInput("vector length is not n(n+1)/2 for any n");
  return n;
}

template <typename Scalar>
Vec<Scalar> sym_vec(const SymMatrix<Scalar>& s) {
  const Index n = s.dim();
  const Scalar root2 = std::sqrt(Scalar(2));
  Vec<Scalar> v(sym_dim(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) v(k++) = (i == j) ? s.matrix()(i, j) : root2 * s.matrix()(i, j);
  }
  return v;
}

template <typename Scalar, typename Derived>
SymMatrix<Scalar> sym_unvec(const Eigen::MatrixBase<Derived>& v, Index n) {
  if (v.size() != sym_dim(n)) throw DimensionMismatch("sym_unvec: length is not n(n+1)/2");
  const Scalar inv_root2 = Scalar(1) / std::sqrt(Scalar(2));
  Mat<Scalar> m(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const Scalar x = v(k++);
      m(i, j) = (i == j) ? x : x * inv_root2;
      m(j, i) = m(i, j);
    }
  }
  return SymMatrix<Scalar>(m);
}

template <typename Scalar>
Vec<Scalar> log_upper(const SpdMatrix<Scalar>& p) {
  const Mat<Scalar> l = spd_log(p).matrix();
  const Index n = l.rows();
  Vec<Scalar> v(sym_dim(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) v(k++) = l(i, j);
  }
  return v;
}

template <typename Scalar, typename Derived>
SpdMatrix<Scalar> from_log_upper(const Eigen::MatrixBase<Derived>& v) {
  const Index n = stalk_dim_from_sym_dim(v.size());
  Mat<Scalar> m(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      m(i, j) = v(k++);
      m(j, i) = m(i, j);
    }
  }
  return sym_exp(SymMatrix<Scalar>(m));
}

/// Matrix of S ↦ M S M^T in sym_vec coordinates (an m×m orthogonal matrix).
template <typename Scalar>
Mat<Scalar> conjugation_operator(const Mat<Scalar>& m) {
  const Index n = m.rows();
  const Index dim = sym_dim(n);
  Mat<Scalar> op(dim, dim);
  for (Index k = 0; k < dim; ++k) {
    const SymMatrix<Scalar> basis = sym_unvec<Scalar>(Vec<Scalar>::Unit(dim, k), n);
    op.col(k) = sym_vec(SymMatrix<Scalar>(m * basis.matrix() * m.transpose()));
  }
  return op;
}

}  // namespace spdsheaf
