#include "spdsheaf/nullspace.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace spdsheaf {

namespace {

Eigen::Index count_nonzero(const Eigen::VectorXd& singular, double rel_tol, double min_scale) {
  if (singular.size() == 0) return 0;
  const double scale = std::max(singular(0), min_scale);
  if (!(scale > 0.0)) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < singular.size(); ++i) {
    if (singular(i) > rel_tol * scale) ++r;
  }
  return r;
}

}  // namespace

Eigen::MatrixXd nullspace(const Eigen::MatrixXd& a, double rel_tol, double min_scale) {
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0 || cols == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  if (!svd.matrixV().allFinite() || !svd.singularValues().allFinite()) {
    // BDCSVD in Eigen 3.4 occasionally returns NaN vectors on clustered spectra.
    Eigen::JacobiSVD<Eigen::MatrixXd> jacobi(a, Eigen::ComputeFullV);
    const Eigen::Index rank = count_nonzero(jacobi.singularValues(), rel_tol, min_scale);
    return jacobi.matrixV().rightCols(cols - rank);
  }
  const Eigen::Index rank = count_nonzero(svd.singularValues(), rel_tol, min_scale);
  return svd.matrixV().rightCols(cols - rank);
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double rel_tol, double min_scale) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  if (!svd.singularValues().allFinite()) {
    return count_nonzero(Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues(), rel_tol, min_scale);
  }
  return count_nonzero(svd.singularValues(), rel_tol, min_scale);
}

}  // namespace spdsheaf
