#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tailpca/correlation.hpp"
#include "tailpca/errors.hpp"
#include "tailpca/jacobi.hpp"
#include "tailpca/spectra.hpp"

using namespace tailpca;

namespace {

CorrelationMatrix matrix(Eigen::MatrixXd values) {
  return {support::names(static_cast<std::size_t>(values.rows())), std::move(values)};
}

Eigen::MatrixXd random_returns(std::mt19937_64& rng, Eigen::Index p, Eigen::Index t) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd f(2, t), r(p, t);
  for (Eigen::Index j = 0; j < t; ++j) {
    f(0, j) = n(rng);
    f(1, j) = n(rng);
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    const double b0 = n(rng), b1 = n(rng);
    for (Eigen::Index j = 0; j < t; ++j) r(i, j) = b0 * f(0, j) + b1 * f(1, j) + n(rng);
  }
  return r;
}

}  // namespace

TEST_CASE("correlation examples") {
  Eigen::MatrixXd twin(2, 5);
  twin << 0.01, -0.02, 0.03, 0.0, 0.01, 0.01, -0.02, 0.03, 0.0, 0.01;
  const auto c = correlation({"A", "B"}, twin);
  CHECK(c.values(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.values(0, 0) == 1.0);

  Eigen::MatrixXd anti(2, 5);
  anti.row(0) = twin.row(0);
  anti.row(1) = -twin.row(0);
  CHECK(correlation({"A", "B"}, anti).values(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));

  Eigen::MatrixXd hand(3, 5);
  hand << 1, 2, 4, 3, 5,  //
      2, 1, 0, 3, 1,      //
      -1, 0.5, 2, 2, 7;
  const auto h = correlation(support::names(3), hand);
  const auto o = oracle::correlation(hand);
  CHECK((h.values - o).cwiseAbs().maxCoeff() <= 1e-15);
  // hand evaluation of the first pair: sxy = -3, sxx = 10, syy = 5.2
  CHECK(h.values(0, 1) == doctest::Approx(-3.0 / std::sqrt(52.0)).epsilon(1e-14));
}

TEST_CASE("correlation invariants on random panels") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = random_returns(rng, 12, 25);
    const auto c = correlation(support::names(12), r).values;
    CHECK(c == c.transpose());
    CHECK(c.diagonal() == Eigen::VectorXd::Ones(12));
    CHECK(c.cwiseAbs().maxCoeff() <= 1.0);
    CHECK((c - oracle::correlation(r)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(eigendecompose(matrix(c)).eigenvalues.minCoeff() >= -1e-8);

    Eigen::MatrixXd scaled = r;
    scaled.row(3) *= 1e4;
    scaled.row(7) *= 3e-5;
    CHECK((correlation(support::names(12), scaled).values - c).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("correlation rejects degenerate input") {
  Eigen::MatrixXd flat(2, 4);
  flat << 1, 2, 3, 4, 5, 5, 5, 5;
  try {
    correlation({"UP", "FLAT"}, flat);
    FAIL("expected an error");
  } catch (const DegenerateSeriesError& e) {
    CHECK(std::string(e.what()).find("FLAT") != std::string::npos);
  }
  CHECK_THROWS_AS(correlation({"A"}, Eigen::MatrixXd::Ones(1, 1)), InsufficientHistoryError);
}

TEST_CASE("eigendecompose closed forms") {
  const auto id = eigendecompose(matrix(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(id.eigenvalues == Eigen::VectorXd::Ones(3));
  CHECK(id.sweeps == 0);

  Eigen::MatrixXd pos(2, 2);
  pos << 1, 1, 1, 1;
  const auto ep = eigendecompose(matrix(pos));
  CHECK(ep.eigenvalue(1) == doctest::Approx(2.0));
  CHECK(std::abs(ep.eigenvalue(2)) <= 1e-15);
  CHECK(ep.loading(2)(0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(ep.loading(2)(1) == doctest::Approx(-1 / std::sqrt(2.0)));

  Eigen::MatrixXd neg(2, 2);
  neg << 1, -1, -1, 1;
  const auto en = eigendecompose(matrix(neg));
  CHECK(en.eigenvalue(1) == doctest::Approx(2.0));
  CHECK(en.loading(2)(0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(en.loading(2)(1) == doctest::Approx(1 / std::sqrt(2.0)));

  CHECK_THROWS_AS(en.eigenvalue(0), std::out_of_range);
  CHECK_THROWS_AS(en.loading(3), std::out_of_range);
}

TEST_CASE("4x4 eigenvalues match the characteristic polynomial") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const auto c = correlation(support::names(4), random_returns(rng, 4, 8)).values;
    const auto ed = eigendecompose(matrix(c));
    const auto roots = oracle::characteristic_roots(c);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(ed.eigenvalue(4 - k) - roots[k]) <= 1e-8);
    }
  }
}

TEST_CASE("decomposition invariants, reconstruction and sign convention") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index p = 3 + trial;
    const auto c = correlation(support::names(std::size_t(p)), random_returns(rng, p, 2 * p)).values;
    const auto ed = eigendecompose(matrix(c));
    const auto& a = ed.loadings;
    const auto& l = ed.eigenvalues;
    CHECK(std::abs(l.sum() - double(p)) <= 1e-10 * double(p));
    CHECK((c * a - a * l.asDiagonal()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((a.transpose() * a - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((a * l.asDiagonal() * a.transpose() - c).cwiseAbs().maxCoeff() <= 1e-8);
    for (Eigen::Index k = 0; k < p; ++k) {
      CHECK(std::abs(a.col(k).norm() - 1.0) <= 1e-12);
      if (k > 0) CHECK(l(k) <= l(k - 1));
      Eigen::Index arg = 0;
      a.col(k).cwiseAbs().maxCoeff(&arg);
      CHECK(a(arg, k) > 0);
    }
  }
}

TEST_CASE("sign convention ties go to the lowest index") {
  JacobiEigen<double> e;
  e.eigenvalues = Eigen::Vector2d{1.0, 2.0};
  e.eigenvectors.resize(2, 2);
  e.eigenvectors << -0.5, 0.5, 0.5, -0.5;
  sort_descending_and_orient(e);
  CHECK(e.eigenvalues(0) == 2.0);
  CHECK(e.eigenvectors(0, 0) == 0.5);
  CHECK(e.eigenvectors(1, 0) == -0.5);
  CHECK(e.eigenvectors(0, 1) == 0.5);
}

TEST_CASE("jacobi works on float expressions") {
  Eigen::Matrix3f m;
  m << 2, 1, 0, 1, 2, 0, 0, 0, 5;
  auto e = jacobi_eigen((m * 2.0f).eval(), 1e-6f);
  sort_descending_and_orient(e);
  CHECK(e.converged);
  CHECK(e.eigenvalues(0) == doctest::Approx(10.0f));
  CHECK(e.eigenvalues(2) == doctest::Approx(2.0f));
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(29);
  const Eigen::Index p = 9;
  const auto r = random_returns(rng, p, 40);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd rp(p, 40);
  for (Eigen::Index i = 0; i < p; ++i) rp.row(i) = r.row(perm[std::size_t(i)]);
  const auto a = support::decompose(r);
  const auto b = support::decompose(rp);
  CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() <= 1e-9);
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index i = 0; i < p; ++i) {
      CHECK(std::abs(b.loadings(i, k) - a.loadings(perm[std::size_t(i)], k)) <= 1e-9);
    }
  }
}

TEST_CASE("component scores have variance equal to the eigenvalue") {
  const auto market = generate(support::spec(4, 8, 200, {support::plant({0, 1}, 0.97)}));
  const auto rp = compute_returns(market.panel);
  const auto ed = eigendecompose(correlation(rp));
  for (std::size_t rank : {std::size_t{1}, std::size_t{8}}) {
    const auto s = component_scores(rp, ed, rank);
    const double var = (s.array() - s.mean()).square().sum() / double(s.size() - 1);
    CHECK(var == doctest::Approx(ed.eigenvalue(rank)).epsilon(1e-9));
  }
}

TEST_CASE("CSV dumps") {
  Eigen::MatrixXd pos(2, 2);
  pos << 1, 1, 1, 1;
  const auto cm = matrix(pos);
  std::ostringstream c, e;
  write_correlation_csv(c, cm);
  write_eigenvalues_csv(e, eigendecompose(cm));
  CHECK(c.str() == "ticker,T00,T01\nT00,1,1\nT01,1,1\n");
  CHECK(e.str().rfind("rank,eigenvalue\n1,2\n2,", 0) == 0);
}
