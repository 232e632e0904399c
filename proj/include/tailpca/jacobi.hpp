#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace tailpca {

template <typename Scalar>
struct JacobiEigen {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;
  /// Column k is the unit eigenvector of eigenvalues(k).
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eigenvectors;
  int sweeps = 0;
  /// Frobenius norm of the off-diagonal part when iteration stopped.
  Scalar off_diagonal = 0;
  bool converged = false;
};

template <typename Derived>
typename Derived::Scalar off_diagonal_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Scalar sum = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi
/// rotations.
///
/// Each sweep visits every pair (i, j), i < j, in row order and annihilates
/// a(i, j) whenever it is nonzero. Iteration stops once the off-diagonal
/// Frobenius norm is at most `tolerance_per_dim * n`, or after `max_sweeps`
/// sweeps (then `converged` is false). Eigenpairs come back in the order they
/// sit on the final diagonal; see `sort_descending_and_orient`.
template <typename Derived>
JacobiEigen<typename Derived::Scalar> jacobi_eigen(
    const Eigen::MatrixBase<Derived>& symmetric,
    typename Derived::Scalar tolerance_per_dim = typename Derived::Scalar(1e-12),
    int max_sweeps = 64) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index n = symmetric.rows();
  Matrix a = symmetric;
  Matrix v = Matrix::Identity(n, n);
  const Scalar threshold = tolerance_per_dim * Scalar(n);

  JacobiEigen<Scalar> out;
  Scalar off = off_diagonal_norm(a);
  while (off > threshold && out.sweeps < max_sweeps) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;

        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        Scalar t;
        if (std::abs(theta) > Scalar(1e150)) {
          t = Scalar(1) / (Scalar(2) * theta);
        } else {
          t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
              (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        }
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;

        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Scalar arp = a(r, p);
          const Scalar arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
          a(p, r) = a(r, p);
          a(q, r) = a(r, q);
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);

        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar vrp = v(r, p);
          const Scalar vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
    ++out.sweeps;
    off = off_diagonal_norm(a);
  }

  out.eigenvalues = a.diagonal();
  out.eigenvectors = std::move(v);
  out.off_diagonal = off;
  out.converged = off <= threshold;
  return out;
}

/// Stable sort of eigenpairs by descending eigenvalue, then flips each vector
/// so that its entry of largest magnitude is positive (lowest index wins a
/// tie).
template <typename Scalar>
void sort_descending_and_orient(JacobiEigen<Scalar>& eig) {
  const Eigen::Index n = eig.eigenvalues.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return eig.eigenvalues(x) > eig.eigenvalues(y);
  });

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values(n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    values(k) = eig.eigenvalues(src);
    vectors.col(k) = eig.eigenvectors.col(src);

    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(vectors(i, k)) > std::abs(vectors(arg, k))) arg = i;
    }
    if (vectors(arg, k) < Scalar(0)) vectors.col(k) = -vectors.col(k);
  }
  eig.eigenvalues = std::move(values);
  eig.eigenvectors = std::move(vectors);
}

}  // namespace tailpca
