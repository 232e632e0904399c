#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace tailpca {

/// Sum of squared deviations from the mean, per row.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
centered_sum_squares(const Eigen::MatrixBase<Derived>& series) {
  const auto centered =
      (series.colwise() - series.rowwise().mean()).eval();
  return centered.rowwise().squaredNorm();
}

/// Sample Pearson correlation between the rows of `series` (one variable per
/// row, one observation per column).
///
/// Every row must have nonzero variance. Each pair is evaluated once, so the
/// result is exactly symmetric; the diagonal is exactly one and off-diagonal
/// entries are clamped to [-1, 1].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
pearson_correlation(const Eigen::MatrixBase<Derived>& series) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index p = series.rows();
  const Matrix centered = series.colwise() - series.rowwise().mean();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ss =
      centered.rowwise().squaredNorm();

  Matrix r(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    r(i, i) = Scalar(1);
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const Scalar num = centered.row(i).dot(centered.row(j));
      const Scalar value =
          std::clamp(num / std::sqrt(ss(i) * ss(j)), Scalar(-1), Scalar(1));
      r(i, j) = value;
      r(j, i) = value;
    }
  }
  return r;
}

}  // namespace tailpca
