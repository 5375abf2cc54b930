#include "dsviz/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dsviz/parallel.hpp"

namespace dsviz::kernels {

std::int64_t to_fixed(double v) { return std::llround(v * kGridScale); }
double from_fixed(std::int64_t v) { return static_cast<double>(v) / kGridScale; }

namespace {

// Constant columns take their value as the mean exactly.
void pin_constant_columns(const Eigen::Ref<const RowMatrix>& x, Eigen::VectorXd& mean) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double first = x(0, j);
    if ((x.col(j).array() == first).all()) mean[j] = first;
  }
}

}  // namespace

namespace serial {

Moments moments(const Eigen::Ref<const RowMatrix>& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  Moments m;
  m.count = static_cast<std::size_t>(n);
  m.mean = Eigen::VectorXd::Zero(p);
  m.scatter = Eigen::MatrixXd::Zero(p, p);
  if (n == 0) return m;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m.mean[j] += x(i, j);
  m.mean /= static_cast<double>(n);
  pin_constant_columns(x, m.mean);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < p; ++a) {
      const double da = x(i, a) - m.mean[a];
      for (Eigen::Index b = 0; b < p; ++b) m.scatter(a, b) += da * (x(i, b) - m.mean[b]);
    }
  return m;
}

void accumulate_grid(std::span<const std::int64_t> grid, std::span<std::int64_t> total) {
  for (std::size_t i = 0; i < grid.size(); ++i) total[i] += grid[i];
}

void running_mean_update(std::span<double> mean, std::span<const double> sample, std::size_t k) {
  const double inv = static_cast<double>(k);
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (sample[i] - mean[i]) / inv;
}

RowMatrix times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& b) {
  return x * b;
}

Eigen::MatrixXd transpose_times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& q) {
  return x.transpose() * q;
}

}  // namespace serial

namespace omp {

Moments block_moments(const Eigen::Ref<const RowMatrix>& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  Moments m;
  m.count = static_cast<std::size_t>(n);
  m.mean = x.colwise().mean().transpose();
  m.scatter.resize(p, p);
  if (n == 0) {
    m.mean = Eigen::VectorXd::Zero(p);
    m.scatter.setZero();
    return m;
  }
  pin_constant_columns(x, m.mean);
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();

  std::vector<std::pair<Eigen::Index, Eigen::Index>> tiles;
  for (Eigen::Index i = 0; i < p; i += kTile)
    for (Eigen::Index j = i; j < p; j += kTile) tiles.emplace_back(i, j);

  const auto count = static_cast<long long>(tiles.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs())
  for (long long t = 0; t < count; ++t) {
    const auto [i, j] = tiles[static_cast<std::size_t>(t)];
    const Eigen::Index wi = std::min(kTile, p - i);
    const Eigen::Index wj = std::min(kTile, p - j);
    m.scatter.block(i, j, wi, wj).noalias() = centered.middleCols(i, wi).transpose() * centered.middleCols(j, wj);
    if (i != j) m.scatter.block(j, i, wj, wi) = m.scatter.block(i, j, wi, wj).transpose();
  }
  // Diagonal tiles are computed as full products; symmetrize them exactly.
  for (Eigen::Index i = 0; i < p; i += kTile) {
    const Eigen::Index w = std::min(kTile, p - i);
    auto d = m.scatter.block(i, i, w, w);
    for (Eigen::Index a = 0; a < w; ++a)
      for (Eigen::Index b = a + 1; b < w; ++b) d(b, a) = d(a, b);
  }
  return m;
}

void merge(Moments& acc, const Moments& block) {
  if (block.count == 0) return;
  if (acc.count == 0) {
    acc = block;
    return;
  }
  const double na = static_cast<double>(acc.count);
  const double nb = static_cast<double>(block.count);
  const double n = na + nb;
  const Eigen::VectorXd delta = block.mean - acc.mean;
  const double w = na * nb / n;
  const Eigen::Index p = acc.mean.size();
  const auto cols = static_cast<long long>(p);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (long long c = 0; c < cols; ++c) {
    const auto j = static_cast<Eigen::Index>(c);
    acc.scatter.col(j) += block.scatter.col(j) + (delta * delta[j]) * w;
  }
  acc.mean += delta * (nb / n);
  acc.count += block.count;
}

Moments moments(const Eigen::Ref<const RowMatrix>& x) {
  Moments acc;
  acc.mean = Eigen::VectorXd::Zero(x.cols());
  acc.scatter = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); r += kRowBlock) {
    const Eigen::Index h = std::min(kRowBlock, x.rows() - r);
    merge(acc, block_moments(x.middleRows(r, h)));
  }
  return acc;
}

void accumulate_grid(std::span<const std::int64_t> grid, std::span<std::int64_t> total) {
  const auto n = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (long long i = 0; i < n; ++i) total[static_cast<std::size_t>(i)] += grid[static_cast<std::size_t>(i)];
}

void running_mean_update(std::span<double> mean, std::span<const double> sample, std::size_t k) {
  const double inv = static_cast<double>(k);
  const auto n = static_cast<long long>(mean.size());
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (long long i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(i);
    mean[j] += (sample[j] - mean[j]) / inv;
  }
}

RowMatrix times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& b) {
  RowMatrix out(x.rows(), b.cols());
  const Eigen::Index blocks = (x.rows() + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs())
  for (long long blk = 0; blk < static_cast<long long>(blocks); ++blk) {
    const Eigen::Index r = static_cast<Eigen::Index>(blk) * kRowBlock;
    const Eigen::Index h = std::min(kRowBlock, x.rows() - r);
    out.middleRows(r, h).noalias() = x.middleRows(r, h) * b;
  }
  return out;
}

Eigen::MatrixXd transpose_times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& q) {
  Eigen::MatrixXd out(x.cols(), q.cols());
  const Eigen::Index tiles = (x.cols() + kTile - 1) / kTile;
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs())
  for (long long t = 0; t < static_cast<long long>(tiles); ++t) {
    const Eigen::Index c = static_cast<Eigen::Index>(t) * kTile;
    const Eigen::Index w = std::min(kTile, x.cols() - c);
    out.middleRows(c, w).noalias() = x.middleCols(c, w).transpose() * q;
  }
  return out;
}

}  // namespace omp

}  // namespace dsviz::kernels
