#include <random>

#include <gtest/gtest.h>

#include "dsviz/kernels.hpp"
#include "dsviz/parallel.hpp"
#include "support.hpp"

using namespace dsviz;
namespace k = dsviz::kernels;

namespace {

class Jobs {
 public:
  explicit Jobs(int n) { set_jobs(n); }
  ~Jobs() { set_jobs(0); }
};

}  // namespace

TEST(Kernels, MomentsAgreeWithSerialReference) {
  for (Eigen::Index n : {2, 17, 511, 512, 513, 1500}) {
    for (Eigen::Index p : {1, 5, 255, 257}) {
      const auto x = testing_support::gaussian_matrix(n, p, static_cast<std::uint64_t>(n * 1000 + p));
      const auto a = k::serial::moments(x);
      const auto b = k::omp::moments(x);
      EXPECT_EQ(a.count, b.count);
      EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((a.scatter - b.scatter).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + a.scatter.cwiseAbs().maxCoeff()));
      EXPECT_EQ(b.scatter, b.scatter.transpose());
    }
  }
}

TEST(Kernels, MomentsBitwiseIndependentOfJobs) {
  const auto x = testing_support::gaussian_matrix(2000, 300, 4);
  k::Moments one, many;
  {
    Jobs j(1);
    one = k::omp::moments(x);
  }
  {
    Jobs j(4);
    many = k::omp::moments(x);
  }
  EXPECT_EQ(one.mean, many.mean);
  EXPECT_EQ(one.scatter, many.scatter);
}

TEST(Kernels, MergeMatchesWholeBlock) {
  const auto x = testing_support::gaussian_matrix(300, 6, 2);
  k::Moments acc;
  acc.mean = Eigen::VectorXd::Zero(6);
  acc.scatter = Eigen::MatrixXd::Zero(6, 6);
  k::omp::merge(acc, k::omp::block_moments(x.topRows(100)));
  k::omp::merge(acc, k::omp::block_moments(x.bottomRows(200)));
  const auto whole = k::serial::moments(x);
  EXPECT_EQ(acc.count, 300u);
  EXPECT_LE((acc.scatter - whole.scatter).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Kernels, GridAccumulationIsExact) {
  std::mt19937_64 rng(1);
  std::vector<std::int64_t> grid(100000), a(100000, 7), b(100000, 7);
  for (auto& v : grid) v = static_cast<std::int64_t>(rng() % (1ULL << 33));
  k::serial::accumulate_grid(grid, a);
  {
    Jobs j(3);
    k::omp::accumulate_grid(grid, b);
  }
  EXPECT_EQ(a, b);
}

TEST(Kernels, FixedPointRoundTrip) {
  for (double v : {0.0, 1.0, 0.5, 0.25, 1.0 / 3.0}) EXPECT_NEAR(k::from_fixed(k::to_fixed(v)), v, 1.0 / k::kGridScale);
  EXPECT_EQ(k::from_fixed(k::to_fixed(0.75)), 0.75);
}

TEST(Kernels, RunningMeanAgreesWithSerial) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> ma(70000, 0.0), mb(70000, 0.0), sample(70000);
  for (std::size_t step = 1; step <= 5; ++step) {
    for (auto& v : sample) v = u(rng);
    k::serial::running_mean_update(ma, sample, step);
    k::omp::running_mean_update(mb, sample, step);
  }
  EXPECT_EQ(ma, mb);
}

TEST(Kernels, ProductsAgreeWithSerial) {
  const auto x = testing_support::gaussian_matrix(1100, 600, 3);
  const Eigen::MatrixXd b = testing_support::gaussian_matrix(600, 7, 4);
  const Eigen::MatrixXd q = testing_support::gaussian_matrix(1100, 5, 5);
  EXPECT_LE((k::serial::times(x, b) - k::omp::times(x, b)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((k::serial::transpose_times(x, q) - k::omp::transpose_times(x, q)).cwiseAbs().maxCoeff(), 1e-9);
  RowMatrix t1, t4;
  {
    Jobs j(1);
    t1 = k::omp::times(x, b);
  }
  {
    Jobs j(4);
    t4 = k::omp::times(x, b);
  }
  EXPECT_EQ(t1, t4);
}
