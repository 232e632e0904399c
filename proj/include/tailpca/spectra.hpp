#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tailpca/returns.hpp"

namespace tailpca {

struct CorrelationMatrix {
  std::vector<std::string> tickers;
  Eigen::MatrixXd values;

  std::size_t size() const noexcept { return tickers.size(); }
};

/// Eigenpairs of a correlation matrix, largest eigenvalue first.
///
/// Components are addressed by 1-based rank: rank 1 is the largest-variance
/// PC and rank p the smallest. `loadings.col(rank - 1)` holds the loading of
/// every ticker on that component.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd loadings;
  std::vector<std::string> tickers;
  int sweeps = 0;

  std::size_t size() const noexcept { return tickers.size(); }
  double eigenvalue(std::size_t rank) const;
  Eigen::MatrixXd::ConstColXpr loading(std::size_t rank) const;
};

/// Throws DegenerateSeriesError for a zero-variance ticker and
/// InsufficientHistoryError for fewer than two observations.
CorrelationMatrix correlation(const ReturnPanel& rp);
CorrelationMatrix correlation(std::vector<std::string> tickers,
                              const Eigen::Ref<const Eigen::MatrixXd>& returns);

/// Cyclic Jacobi with an off-diagonal stopping threshold of 1e-12 * p and at
/// most 64 sweeps; throws ConvergenceError otherwise.
EigenDecomposition eigendecompose(const CorrelationMatrix& cm);

/// Time series of the component score a_k' z(t), z the standardized returns.
/// Its sample variance equals the eigenvalue of the component.
Eigen::VectorXd component_scores(const ReturnPanel& rp,
                                 const EigenDecomposition& ed,
                                 std::size_t rank);

/// p x p grid with a leading `ticker` column and ticker header row.
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& cm);
/// `rank,eigenvalue` for every component.
void write_eigenvalues_csv(std::ostream& out, const EigenDecomposition& ed);

}  // namespace tailpca
