#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference in
// `serial` and an OpenMP version in `omp`. The OpenMP versions partition work
// into fixed-size blocks that do not depend on the thread count, and combine
// partial results in block order, so their output is bitwise identical for
// any number of workers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dsviz/data_matrix.hpp"

namespace dsviz::kernels {

/// Row count, column mean and scatter (sum of centered outer products).
struct Moments {
  std::size_t count = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd scatter;
};

inline constexpr Eigen::Index kRowBlock = 512;
inline constexpr Eigen::Index kTile = 256;

/// Fixed-point scale for grid accumulation; sums of quantized values are
/// exact and therefore independent of summation order.
inline constexpr double kGridScale = 4294967296.0;  // 2^32

namespace serial {

/// Two-pass textbook moments; O(n p^2) scalar loops.
Moments moments(const Eigen::Ref<const RowMatrix>& x);

void accumulate_grid(std::span<const std::int64_t> grid, std::span<std::int64_t> total);

/// mean += (sample - mean) / k, elementwise. `k` is the 1-based sample count.
void running_mean_update(std::span<double> mean, std::span<const double> sample, std::size_t k);

RowMatrix times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& b);
Eigen::MatrixXd transpose_times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& q);

}  // namespace serial

namespace omp {

/// Moments of one row block. The scatter is assembled from upper-triangle
/// tiles of width kTile computed in parallel.
Moments block_moments(const Eigen::Ref<const RowMatrix>& x);

/// Pairwise (Chan et al.) combination: acc <- acc (+) block.
void merge(Moments& acc, const Moments& block);

/// kRowBlock row blocks merged left to right.
Moments moments(const Eigen::Ref<const RowMatrix>& x);

void accumulate_grid(std::span<const std::int64_t> grid, std::span<std::int64_t> total);

void running_mean_update(std::span<double> mean, std::span<const double> sample, std::size_t k);

/// x * b, parallel over kRowBlock row blocks of x.
RowMatrix times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& b);

/// x^T * q, parallel over kTile column tiles of x.
Eigen::MatrixXd transpose_times(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const Eigen::MatrixXd>& q);

}  // namespace omp

/// Quantizes a [0, 1]-ish coverage value to the fixed-point grid scale.
std::int64_t to_fixed(double v);
double from_fixed(std::int64_t v);

}  // namespace dsviz::kernels
