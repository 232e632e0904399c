#include "tailpca/spectra.hpp"

#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "tailpca/correlation.hpp"
#include "tailpca/errors.hpp"
#include "tailpca/jacobi.hpp"

namespace tailpca {

namespace {

constexpr double kJacobiTolerancePerDim = 1e-12;
constexpr int kJacobiMaxSweeps = 64;

void check_rank(std::size_t rank, std::size_t p) {
  if (rank < 1 || rank > p) {
    throw std::out_of_range(fmt::format("component rank {} outside 1..{}", rank, p));
  }
}

}  // namespace

double EigenDecomposition::eigenvalue(std::size_t rank) const {
  check_rank(rank, size());
  return eigenvalues(static_cast<Eigen::Index>(rank - 1));
}

Eigen::MatrixXd::ConstColXpr EigenDecomposition::loading(std::size_t rank) const {
  check_rank(rank, size());
  return loadings.col(static_cast<Eigen::Index>(rank - 1));
}

CorrelationMatrix correlation(const ReturnPanel& rp) {
  return correlation(rp.tickers, rp.returns);
}

CorrelationMatrix correlation(std::vector<std::string> tickers,
                              const Eigen::Ref<const Eigen::MatrixXd>& returns) {
  if (static_cast<Eigen::Index>(tickers.size()) != returns.rows()) {
    throw std::invalid_argument("ticker count does not match return rows");
  }
  if (returns.cols() < 2) {
    throw InsufficientHistoryError(fmt::format(
        "{} return observations; correlation needs at least 2", returns.cols()));
  }
  const Eigen::VectorXd ss = centered_sum_squares(returns);
  for (Eigen::Index i = 0; i < ss.size(); ++i) {
    if (!(ss(i) > 0.0)) {
      const auto& name = tickers[static_cast<std::size_t>(i)];
      throw DegenerateSeriesError(
          name, fmt::format("ticker `{}` has zero return variance", name));
    }
  }
  return {std::move(tickers), pearson_correlation(returns)};
}

EigenDecomposition eigendecompose(const CorrelationMatrix& cm) {
  auto eig = jacobi_eigen(cm.values, kJacobiTolerancePerDim, kJacobiMaxSweeps);
  if (!eig.converged) {
    throw ConvergenceError(
        eig.off_diagonal,
        fmt::format("Jacobi did not converge after {} sweeps (off-diagonal norm {})",
                    eig.sweeps, eig.off_diagonal));
  }
  sort_descending_and_orient(eig);
  EigenDecomposition ed;
  ed.eigenvalues = std::move(eig.eigenvalues);
  ed.loadings = std::move(eig.eigenvectors);
  ed.tickers = cm.tickers;
  ed.sweeps = eig.sweeps;
  return ed;
}

Eigen::VectorXd component_scores(const ReturnPanel& rp, const EigenDecomposition& ed,
                                 std::size_t rank) {
  if (rp.tickers != ed.tickers) {
    throw std::invalid_argument("return panel and decomposition tickers differ");
  }
  const Eigen::Index n = rp.returns.cols();
  const Eigen::MatrixXd centered = rp.returns.colwise() - rp.returns.rowwise().mean();
  const Eigen::VectorXd sd =
      (centered.rowwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt();
  const Eigen::MatrixXd z = sd.cwiseInverse().asDiagonal() * centered;
  return z.transpose() * ed.loading(rank);
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& cm) {
  out << "ticker";
  for (const auto& t : cm.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out << cm.tickers[i];
    for (std::size_t j = 0; j < cm.size(); ++j) {
      out << fmt::format(",{}", cm.values(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

void write_eigenvalues_csv(std::ostream& out, const EigenDecomposition& ed) {
  out << "rank,eigenvalue\n";
  for (std::size_t k = 1; k <= ed.size(); ++k) {
    out << fmt::format("{},{}\n", k, ed.eigenvalue(k));
  }
}

}  // namespace tailpca
