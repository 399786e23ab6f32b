#pragma once

#include <Eigen/Dense>

namespace spdsheaf {

/// Singular values at or below rel_tol * max(sigma_max, min_scale) are treated
/// as zero. A positive min_scale keeps a matrix that is zero up to roundoff
/// from being reported as full rank.
inline constexpr double kRankTolerance = 1e-8;

/// Orthonormal basis (as columns) of the null space of `a`, computed by SVD.
Eigen::MatrixXd nullspace(const Eigen::MatrixXd& a, double rel_tol = kRankTolerance,
                          double min_scale = 0.0);

/// Numerical rank with the same thresholding rule as `nullspace`.
Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double rel_tol = kRankTolerance,
                             double min_scale = 0.0);

}  // namespace spdsheaf
