#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "dsviz/components.hpp"
#include "dsviz/error.hpp"
#include "support.hpp"

using namespace dsviz;
using testing_support::matrix_from;
using testing_support::rows;

namespace {

const RowMatrix kLine = rows({{0, 0}, {2, 0}, {4, 0}});

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Covariance, LineExample) {
  const auto mc = mean_and_covariance(matrix_from(kLine));
  EXPECT_EQ(mc.n, 3u);
  EXPECT_NEAR(mc.mean[0], 2.0, 1e-15);
  EXPECT_NEAR(mc.mean[1], 0.0, 1e-15);
  EXPECT_NEAR(mc.cov(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(mc.cov(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(mc.cov(1, 1), 0.0, 1e-15);
}

TEST(Covariance, IdenticalRowsGiveZero) {
  const auto mc = mean_and_covariance(matrix_from(rows({{0.3, 0.7, 0.1}, {0.3, 0.7, 0.1}, {0.3, 0.7, 0.1}})));
  EXPECT_EQ(max_abs(mc.cov), 0.0);
}

TEST(Covariance, TwoPointExample) {
  const auto mc = mean_and_covariance(matrix_from(rows({{1, 2}, {3, 4}})));
  EXPECT_NEAR(mc.mean[0], 2.0, 1e-15);
  EXPECT_NEAR(mc.mean[1], 3.0, 1e-15);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(mc.cov(i, j), 2.0, 1e-12);
}

TEST(Covariance, NeedsTwoRows) {
  EXPECT_THROW(mean_and_covariance(matrix_from(rows({{1, 2}}))), ValidationError);
}

TEST(Covariance, MatchesBruteForceAndIsSymmetric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = testing_support::graded_matrix(7 + static_cast<Eigen::Index>(seed % 50), 3 + seed % 9, seed);
    const auto mc = mean_and_covariance(matrix_from(x));
    const auto bf = testing_support::brute_covariance(x);
    const double scale = max_abs(mc.cov);
    for (Eigen::Index a = 0; a < x.cols(); ++a) {
      EXPECT_NEAR(mc.mean[a], bf.mean[static_cast<std::size_t>(a)], 1e-12 * (1 + std::abs(bf.mean[static_cast<std::size_t>(a)])));
      for (Eigen::Index b = 0; b < x.cols(); ++b) {
        EXPECT_NEAR(mc.cov(a, b), bf.cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], 1e-12 * scale);
        EXPECT_LE(std::abs(mc.cov(a, b) - mc.cov(b, a)), 1e-9 * scale);
      }
    }
  }
}

TEST(Covariance, StreamingBlocksAgreeWithWholeMatrix) {
  const auto x = testing_support::graded_matrix(1500, 12, 3);
  CovarianceAccumulator acc(12);
  acc.add(x.topRows(1));
  acc.add(x.middleRows(1, 700));
  acc.add(x.bottomRows(799));
  const auto a = acc.finish();
  const auto b = mean_and_covariance(matrix_from(x));
  EXPECT_LE(max_abs(a.cov - b.cov), 1e-12 * max_abs(b.cov));
  EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, LineExampleExact) {
  const auto basis = fit_pca(matrix_from(kLine), 2, PcaMethod::exact);
  EXPECT_NEAR(basis.eigenvalues[0], 4.0, 1e-12);
  EXPECT_NEAR(basis.eigenvalues[1], 0.0, 1e-12);
  EXPECT_NEAR(basis.components(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(basis.components(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(basis.total_variance, 4.0, 1e-12);
  EXPECT_EQ(basis.kind, BasisKind::pca);
  EXPECT_EQ(basis.n_samples, 3u);
}

TEST(Pca, KOutOfRange) {
  const auto m = matrix_from(kLine);
  EXPECT_THROW(fit_pca(m, 0, PcaMethod::exact), ValidationError);
  EXPECT_THROW(fit_pca(m, 3, PcaMethod::exact), ValidationError);
  const auto wide = matrix_from(testing_support::gaussian_matrix(4, 10, 1));
  EXPECT_THROW(fit_pca(wide, 4, PcaMethod::exact), ValidationError);  // n - 1 = 3
  EXPECT_THROW(fit_pca(wide, 3, PcaMethod::randomized), ValidationError);  // k + 10 > p
}

TEST(Pca, NonFiniteInputRejected) {
  auto x = testing_support::gaussian_matrix(5, 3, 2);
  x(2, 1) = std::nan("");
  EXPECT_THROW(fit_pca(matrix_from(x), 1, PcaMethod::exact), ValidationError);
  x(2, 1) = INFINITY;
  EXPECT_THROW(fit_pca(matrix_from(x), 1, PcaMethod::randomized), ValidationError);
}

TEST(Pca, MatchesJacobiOracle) {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto x = testing_support::graded_matrix(12, 6, seed);
    const auto basis = fit_pca(matrix_from(x), 6, PcaMethod::exact);
    const auto oracle = testing_support::jacobi_eigen(testing_support::brute_covariance(x).cov);
    for (int i = 0; i < 6; ++i) {
      EXPECT_NEAR(basis.eigenvalues[i], oracle.values[static_cast<std::size_t>(i)], 1e-8 * oracle.values[0]);
      if (testing_support::min_gap(oracle.values, 5) < 1e-6) continue;
      for (int j = 0; j < 6; ++j)
        EXPECT_NEAR(basis.components(i, j), oracle.vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1e-6);
    }
  }
}

TEST(Pca, RandomizedMatchesExactOnRank3) {
  const auto x = testing_support::low_rank_matrix(400, 60, 3, 8);
  const auto exact = fit_pca(matrix_from(x), 3, PcaMethod::exact);
  const auto rand = fit_pca(matrix_from(x), 3, PcaMethod::randomized, 123);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(rand.eigenvalues[i], exact.eigenvalues[i], 1e-6 * exact.eigenvalues[i]);
    for (int j = 0; j < 60; ++j) EXPECT_NEAR(rand.components(i, j), exact.components(i, j), 1e-4);
  }
  EXPECT_NEAR(rand.total_variance, exact.total_variance, 1e-9 * exact.total_variance);
}

TEST(Pca, RandomizedIsDeterministicPerSeed) {
  const auto x = matrix_from(testing_support::graded_matrix(300, 40, 4));
  const auto a = fit_pca(x, 5, PcaMethod::randomized, 7);
  const auto b = fit_pca(x, 5, PcaMethod::randomized, 7);
  EXPECT_EQ(a.components, b.components);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
}

TEST(Pca, AutomaticPicksExactForSmallP) {
  const auto x = matrix_from(testing_support::graded_matrix(50, 20, 5));
  const auto a = fit_pca(x, 4, PcaMethod::automatic, 1);
  const auto b = fit_pca(x, 4, PcaMethod::exact, 99);
  EXPECT_EQ(a.components, b.components);
  EXPECT_EQ(parse_pca_method("auto"), PcaMethod::automatic);
  EXPECT_THROW(parse_pca_method("fast"), ValidationError);
}

TEST(Pca, ExactEigenpairsAtLargeP) {
  const auto raw = testing_support::gaussian_matrix(400, 300, 17);
  const auto basis = fit_pca(matrix_from(raw), 12, PcaMethod::exact);
  const auto brute = testing_support::brute_covariance(raw).cov;
  Eigen::MatrixXd cov(300, 300);
  for (Eigen::Index a = 0; a < 300; ++a)
    for (Eigen::Index b = 0; b < 300; ++b) cov(a, b) = brute[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  const Eigen::MatrixXd v = basis.components.transpose();
  EXPECT_LT(max_abs(v.transpose() * v - Eigen::MatrixXd::Identity(12, 12)), 1e-12);
  EXPECT_LT((cov * v - v * basis.eigenvalues.asDiagonal()).norm() / cov.norm(), 1e-12);
  const Eigen::VectorXd all = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly).eigenvalues();
  for (Eigen::Index i = 0; i < 12; ++i) EXPECT_NEAR(basis.eigenvalues[i], all[299 - i], 1e-10 * all[299]);
}

TEST(Pca, SignRuleLargestMagnitudePositive) {
  RowMatrix r = rows({{0.5, -0.8, 0.1}, {-0.6, 0.6, 0.2}, {0.0, 0.0, 0.0}});
  const auto signs = orient_signs(r);
  EXPECT_EQ(signs[0], -1.0);
  EXPECT_DOUBLE_EQ(r(0, 1), 0.8);
  // Tie between |-0.6| and |0.6|: the lower index decides.
  EXPECT_EQ(signs[1], -1.0);
  EXPECT_DOUBLE_EQ(r(1, 0), 0.6);
  EXPECT_EQ(signs[2], 1.0);
}

TEST(Project, ExamplesOnLineBasis) {
  const auto basis = fit_pca(matrix_from(kLine), 2, PcaMethod::exact);
  const auto zero = project(basis, matrix_from(rows({{2, 0}})));
  EXPECT_NEAR(zero.data(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(zero.data(0, 1), 0.0, 1e-15);
  const auto s = project(basis, matrix_from(rows({{4, 0}})), 1);
  ASSERT_EQ(s.dims(), 1);
  EXPECT_NEAR(s.data(0, 0), 2.0, 1e-12);
  const auto back = reconstruct(basis, s);
  EXPECT_NEAR(back.data(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(back.data(0, 1), 0.0, 1e-12);
  const auto mean = reconstruct(basis, matrix_from(rows({{0.0}})));
  EXPECT_NEAR(mean.data(0, 0), 2.0, 1e-15);
}

TEST(Project, DimensionMismatch) {
  const auto basis = fit_pca(matrix_from(kLine), 1, PcaMethod::exact);
  EXPECT_THROW(project(basis, matrix_from(rows({{1, 2, 3}}))), ValidationError);
  EXPECT_THROW(project(basis, matrix_from(rows({{1, 2}})), 2), ValidationError);
  EXPECT_THROW(reconstruct(basis, matrix_from(rows({{1, 2}}))), ValidationError);
}

TEST(Project, FullRankRoundTrip) {
  const auto x = testing_support::graded_matrix(30, 8, 6);
  const auto basis = fit_pca(matrix_from(x), 8, PcaMethod::exact);
  const auto back = reconstruct(basis, project(basis, matrix_from(x)));
  EXPECT_LE(max_abs(back.data - x), 1e-6);
}

TEST(Whiten, UnitVarianceZeroMeanUncorrelated) {
  const auto x = matrix_from(testing_support::graded_matrix(200, 6, 9));
  const auto basis = fit_pca(x, 4, PcaMethod::exact);
  const auto z = whiten(x, basis, 4);
  const auto mc = mean_and_covariance(z);
  EXPECT_LE(mc.mean.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(max_abs(mc.cov - Eigen::MatrixXd::Identity(4, 4)), 1e-6);
}

TEST(Whiten, NearZeroEigenvalueNamesIndex) {
  const auto basis = fit_pca(matrix_from(kLine), 2, PcaMethod::exact);
  try {
    whiten(matrix_from(kLine), basis, 2);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("eigenvalue 2"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(whiten(matrix_from(kLine), basis, 1));
}

TEST(Whiten, MonteCarloOnFreshSample) {
  // Fit on one correlated Gaussian sample, whiten an independent one.
  const auto gen = [](std::uint64_t seed) {
    RowMatrix x = testing_support::gaussian_matrix(10000, 2, seed);
    RowMatrix out(x.rows(), 2);
    out.col(0) = 2.0 * x.col(0);
    out.col(1) = 1.5 * x.col(0) + 0.5 * x.col(1);
    return out;
  };
  const auto basis = fit_pca(matrix_from(gen(1)), 2, PcaMethod::exact);
  const auto z = whiten(matrix_from(gen(2)), basis, 2);
  const auto mc = mean_and_covariance(z);
  EXPECT_LE(max_abs(mc.cov - Eigen::MatrixXd::Identity(2, 2)), 5e-2);
}

TEST(Properties, OrthonormalAndSpectrumEqualsTrace) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(seed % 9);
    const auto x = testing_support::graded_matrix(p + 5 + static_cast<Eigen::Index>(seed), p, seed);
    const auto basis = fit_pca(matrix_from(x), p, PcaMethod::exact);
    const Eigen::MatrixXd gram = basis.components * basis.components.transpose();
    EXPECT_LE(max_abs(gram - Eigen::MatrixXd::Identity(p, p)), 1e-6);
    EXPECT_NEAR(basis.eigenvalues.sum(), basis.total_variance, 1e-6 * basis.total_variance);
    EXPECT_NEAR(basis.explained_variance_ratio().sum(), 1.0, 1e-6);
    for (Eigen::Index i = 1; i < p; ++i) EXPECT_LE(basis.eigenvalues[i], basis.eigenvalues[i - 1]);
  }
}

TEST(Properties, PixelPermutationPermutesEigenvectors) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = testing_support::graded_matrix(40, 7, seed + 50);
    std::vector<Eigen::Index> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    RowMatrix y(x.rows(), 7);
    for (Eigen::Index j = 0; j < 7; ++j) y.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
    const auto a = fit_pca(matrix_from(x), 7, PcaMethod::exact);
    const auto b = fit_pca(matrix_from(y), 7, PcaMethod::exact);
    for (int i = 0; i < 7; ++i) {
      EXPECT_NEAR(a.eigenvalues[i], b.eigenvalues[i], 1e-8 * a.eigenvalues[0]);
      for (Eigen::Index j = 0; j < 7; ++j)
        EXPECT_NEAR(b.components(i, j), a.components(i, perm[static_cast<std::size_t>(j)]), 1e-6);
    }
  }
}

TEST(Properties, SampleOrderInvarianceIsExact) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto x = testing_support::graded_matrix(600 + static_cast<Eigen::Index>(seed) * 37, 9, seed);
    const auto a = fit_pca(matrix_from(x), 5, PcaMethod::exact);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed + 1));
    RowMatrix y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    const auto b = fit_pca(matrix_from(y), 5, PcaMethod::exact);
    EXPECT_EQ(a.eigenvalues, b.eigenvalues);
    EXPECT_EQ(a.components, b.components);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.total_variance, b.total_variance);
  }
}

TEST(Properties, ScalingEquivariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = testing_support::graded_matrix(50, 6, seed + 7);
    const double c = 0.3 + static_cast<double>(seed);
    const auto a = fit_pca(matrix_from(x), 6, PcaMethod::exact);
    const auto b = fit_pca(matrix_from(x * c), 6, PcaMethod::exact);
    for (int i = 0; i < 6; ++i) {
      EXPECT_NEAR(b.eigenvalues[i], c * c * a.eigenvalues[i], 1e-8 * c * c * a.eigenvalues[0]);
      EXPECT_NEAR(b.explained_variance_ratio()[i], a.explained_variance_ratio()[i], 1e-10);
    }
    EXPECT_LE(max_abs(b.components - a.components), 1e-6);
  }
}

TEST(BasisIo, SaveLoadRoundTrip) {
  testing_support::TempDir dir;
  auto basis = fit_pca(matrix_from(testing_support::graded_matrix(20, 12, 3)), 4, PcaMethod::exact);
  basis.shape = {2, 2, 3};
  save_basis(basis, dir / "b.json", {{"seed", 5}});
  const auto back = load_basis(dir / "b.json");
  EXPECT_EQ(back.components, basis.components);
  EXPECT_EQ(back.eigenvalues, basis.eigenvalues);
  EXPECT_EQ(back.mean, basis.mean);
  EXPECT_EQ(back.total_variance, basis.total_variance);
  EXPECT_EQ(back.shape, basis.shape);
  EXPECT_EQ(back.kind, basis.kind);
  EXPECT_EQ(back.n_samples, basis.n_samples);
  std::ifstream in(dir / "b.bin", std::ios::binary | std::ios::ate);
  EXPECT_EQ(static_cast<std::size_t>(in.tellg()), (12 + 4 * 12 + 4) * sizeof(double));
}
