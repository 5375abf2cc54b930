#include "dsviz/components.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <vector>

#include <lapacke.h>
#include <spdlog/spdlog.h>

#include "dsviz/error.hpp"
#include "dsviz/parallel.hpp"

#ifdef DSVIZ_SCIPY_OPENBLAS
extern "C" void scipy_openblas_set_num_threads(int);
#define DSVIZ_BLAS_THREADS scipy_openblas_set_num_threads
#define DSVIZ_DSYEVR scipy_LAPACKE_dsyevr
#else
extern "C" void openblas_set_num_threads(int);
#define DSVIZ_BLAS_THREADS openblas_set_num_threads
#define DSVIZ_DSYEVR LAPACKE_dsyevr
#endif

namespace dsviz {

std::string to_string(BasisKind kind) { return kind == BasisKind::pca ? "pca" : "ica"; }

std::string to_string(PcaMethod method) {
  switch (method) {
    case PcaMethod::exact: return "exact";
    case PcaMethod::randomized: return "randomized";
    case PcaMethod::automatic: return "auto";
  }
  return "auto";
}

PcaMethod parse_pca_method(const std::string& text) {
  if (text == "exact") return PcaMethod::exact;
  if (text == "randomized") return PcaMethod::randomized;
  if (text == "auto") return PcaMethod::automatic;
  throw ValidationError("unknown PCA method '" + text + "' (expected exact, randomized or auto)");
}

Eigen::VectorXd ComponentBasis::explained_variance_ratio() const {
  if (total_variance <= 0.0) return Eigen::VectorXd::Zero(eigenvalues.size());
  return eigenvalues / total_variance;
}

CovarianceAccumulator::CovarianceAccumulator(Eigen::Index dims) {
  moments_.mean = Eigen::VectorXd::Zero(dims);
  moments_.scatter = Eigen::MatrixXd::Zero(dims, dims);
}

void CovarianceAccumulator::add(const Eigen::Ref<const RowMatrix>& rows) {
  if (rows.cols() != moments_.mean.size()) throw ValidationError("row block width does not match accumulator");
  if (!rows.allFinite()) throw ValidationError("non-finite values in input rows");
  for (Eigen::Index r = 0; r < rows.rows(); r += kernels::kRowBlock) {
    const Eigen::Index h = std::min(kernels::kRowBlock, rows.rows() - r);
    kernels::omp::merge(moments_, kernels::omp::block_moments(rows.middleRows(r, h)));
  }
}

MeanCovariance CovarianceAccumulator::finish() const {
  if (moments_.count < 2) throw ValidationError("covariance needs at least 2 rows, got " + std::to_string(moments_.count));
  MeanCovariance mc;
  mc.n = moments_.count;
  mc.mean = moments_.mean;
  mc.cov = moments_.scatter / static_cast<double>(moments_.count - 1);
  return mc;
}

MeanCovariance mean_and_covariance(const DataMatrix& matrix) {
  const RowMatrix& x = matrix.data;
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 2) throw ValidationError("covariance needs at least 2 rows, got " + std::to_string(n));
  if (!x.allFinite()) throw ValidationError("non-finite values in input rows");

  // Rows are accumulated in lexicographic order, so the result is bitwise
  // independent of sample order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::lexicographical_compare(x.row(a).data(), x.row(a).data() + p, x.row(b).data(), x.row(b).data() + p);
  });

  CovarianceAccumulator acc(p);
  RowMatrix block;
  for (Eigen::Index r = 0; r < n; r += kernels::kRowBlock) {
    const Eigen::Index h = std::min(kernels::kRowBlock, n - r);
    block.resize(h, p);
    for (Eigen::Index i = 0; i < h; ++i) block.row(i) = x.row(order[static_cast<std::size_t>(r + i)]);
    acc.add(block);
  }
  return acc.finish();
}

Eigen::VectorXd orient_signs(RowMatrix& rows) {
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double a = std::abs(rows(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (rows.cols() > 0 && rows(i, best) < 0.0) {
      rows.row(i) *= -1.0;
      signs[i] = -1.0;
    }
  }
  return signs;
}

namespace {

void pin_blas_threads() {
  // Multi-threaded BLAS reductions are not bitwise reproducible across
  // thread counts; the dense eigensolver runs single-threaded.
  static std::once_flag once;
  std::call_once(once, [] { DSVIZ_BLAS_THREADS(1); });
}

void check_k(Eigen::Index k, Eigen::Index n, Eigen::Index p) {
  const Eigen::Index hi = std::min(n - 1, p);
  if (k < 1 || k > hi)
    throw ValidationError("k = " + std::to_string(k) + " out of range [1, " + std::to_string(hi) +
                          "] for n = " + std::to_string(n) + ", p = " + std::to_string(p));
}

void warn_ratio(Eigen::Index n, Eigen::Index p) {
  const double ratio = static_cast<double>(n) / static_cast<double>(p);
  if (ratio < 1.0) spdlog::warn("n/p = {:.3f} is below 1; the leading subspace is poorly determined", ratio);
}

// Column-wise sample variances summed; two passes over fixed column tiles.
double covariance_trace(const RowMatrix& x, const Eigen::VectorXd& mean) {
  const Eigen::Index p = x.cols();
  const Eigen::Index tiles = (p + kernels::kTile - 1) / kernels::kTile;
  Eigen::VectorXd col_ss(p);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs())
  for (long long t = 0; t < static_cast<long long>(tiles); ++t) {
    const Eigen::Index c = static_cast<Eigen::Index>(t) * kernels::kTile;
    const Eigen::Index w = std::min(kernels::kTile, p - c);
    col_ss.segment(c, w) =
        (x.middleCols(c, w).rowwise() - mean.segment(c, w).transpose()).colwise().squaredNorm().transpose();
  }
  return col_ss.sum() / static_cast<double>(x.rows() - 1);
}

struct Eigenpairs {
  Eigen::VectorXd values;  // descending
  RowMatrix vectors;       // rows
};

// Columns of `vectors` paired with ascending `values`.
bool eigenpairs_hold(const Eigen::MatrixXd& cov, const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors) {
  const double scale = std::max(cov.norm(), std::numeric_limits<double>::min());
  const double residual = (cov * vectors - vectors * values.asDiagonal()).norm() / scale;
  const Eigen::Index m = vectors.cols();
  const double orth = (vectors.transpose() * vectors - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  return std::isfinite(residual) && residual <= 1e-8 && orth <= 1e-8;
}

Eigenpairs symmetric_eigen(const Eigen::MatrixXd& cov, Eigen::Index k) {
  pin_blas_threads();
  const auto p = static_cast<lapack_int>(cov.rows());
  Eigen::MatrixXd a = cov;
  Eigen::VectorXd w(p);
  Eigen::MatrixXd z(p, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(p));
  lapack_int found = 0;
  const char range = k == p ? 'A' : 'I';
  const lapack_int info = DSVIZ_DSYEVR(LAPACK_COL_MAJOR, 'V', range, 'L', p, a.data(), p, 0.0, 0.0,
                                       p - static_cast<lapack_int>(k) + 1, p, 0.0, &found, w.data(), z.data(), p,
                                       support.data());
  if (info != 0 || found != k) throw ValidationError("symmetric eigensolver failed (info = " + std::to_string(info) + ")");
  Eigen::VectorXd values = w.head(k);
  if (!eigenpairs_hold(cov, values, z)) {
    spdlog::warn("LAPACK eigensolver returned inaccurate eigenpairs; falling back to Eigen");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    values = es.eigenvalues().tail(k);
    z = es.eigenvectors().rightCols(k);
  }
  Eigenpairs out;
  out.values.resize(k);
  out.vectors.resize(k, p);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = k - 1 - i;
    out.values[i] = std::max(values[src], 0.0);
    out.vectors.row(i) = z.col(src).transpose();
  }
  return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

ComponentBasis fit_exact(const DataMatrix& matrix, Eigen::Index k) {
  const MeanCovariance mc = mean_and_covariance(matrix);
  return fit_pca_from_covariance(mc, k, matrix.shape);
}

ComponentBasis fit_randomized(const DataMatrix& matrix, Eigen::Index k, std::uint64_t seed) {
  const RowMatrix& x = matrix.data;
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (k + kOversampling > p)
    throw ValidationError("randomized PCA needs k + " + std::to_string(kOversampling) + " <= p (k = " +
                          std::to_string(k) + ", p = " + std::to_string(p) + ")");
  const Eigen::Index l = std::min(k + kOversampling, n);

  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd omega(p, l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < p; ++i) omega(i, j) = normal(rng);

  // Centered products without forming x - mean.
  auto centered_times = [&](const Eigen::MatrixXd& b) -> Eigen::MatrixXd {
    Eigen::MatrixXd y = kernels::omp::times(x, b);
    const Eigen::RowVectorXd shift = mean.transpose() * b;
    y.rowwise() -= shift;
    return y;
  };
  auto centered_transpose_times = [&](const Eigen::MatrixXd& q) -> Eigen::MatrixXd {
    Eigen::MatrixXd z = kernels::omp::transpose_times(x, q);
    z -= mean * q.colwise().sum();
    return z;
  };

  Eigen::MatrixXd q = orthonormal_basis(centered_times(omega));
  for (int it = 0; it < kPowerIterations; ++it) {
    const Eigen::MatrixXd qz = orthonormal_basis(centered_transpose_times(q));
    q = orthonormal_basis(centered_times(qz));
  }
  const Eigen::MatrixXd b = centered_transpose_times(q).transpose();  // l x p
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinV);

  ComponentBasis basis;
  basis.kind = BasisKind::pca;
  basis.shape = matrix.shape;
  basis.mean = mean;
  basis.n_samples = static_cast<std::size_t>(n);
  basis.components = svd.matrixV().leftCols(k).transpose();
  basis.eigenvalues = svd.singularValues().head(k).array().square() / static_cast<double>(n - 1);
  basis.total_variance = covariance_trace(x, mean);
  orient_signs(basis.components);
  return basis;
}

}  // namespace

ComponentBasis fit_pca_from_covariance(const MeanCovariance& mc, Eigen::Index k, const Shape& shape) {
  const auto p = mc.cov.rows();
  check_k(k, static_cast<Eigen::Index>(mc.n), p);
  if (!mc.cov.allFinite()) throw ValidationError("covariance contains non-finite values");
  auto eig = symmetric_eigen(mc.cov, k);
  ComponentBasis basis;
  basis.kind = BasisKind::pca;
  basis.shape = shape;
  basis.mean = mc.mean;
  basis.n_samples = mc.n;
  basis.components = std::move(eig.vectors);
  basis.eigenvalues = std::move(eig.values);
  basis.total_variance = mc.cov.trace();
  orient_signs(basis.components);
  return basis;
}

ComponentBasis fit_pca(const DataMatrix& matrix, Eigen::Index k, PcaMethod method, std::uint64_t seed) {
  matrix.validate();
  const Eigen::Index n = matrix.rows();
  const Eigen::Index p = matrix.dims();
  check_k(k, n, p);
  warn_ratio(n, p);
  if (method == PcaMethod::automatic) method = p <= kExactDimLimit ? PcaMethod::exact : PcaMethod::randomized;
  return method == PcaMethod::exact ? fit_exact(matrix, k) : fit_randomized(matrix, k, seed);
}

DataMatrix project(const ComponentBasis& basis, const DataMatrix& matrix, std::optional<Eigen::Index> k) {
  if (matrix.dims() != basis.dims())
    throw ValidationError("dimension mismatch: matrix has " + std::to_string(matrix.dims()) + " columns, basis has " +
                          std::to_string(basis.dims()));
  const Eigen::Index kk = k.value_or(basis.count());
  if (kk < 1 || kk > basis.count())
    throw ValidationError("k = " + std::to_string(kk) + " exceeds the " + std::to_string(basis.count()) +
                          " available components");
  DataMatrix out;
  out.shape = Shape{1, static_cast<int>(kk), 1};
  out.data = (matrix.data.rowwise() - basis.mean.transpose()) * basis.components.topRows(kk).transpose();
  out.row_ids = matrix.row_ids;
  return out;
}

DataMatrix reconstruct(const ComponentBasis& basis, const DataMatrix& scores) {
  const Eigen::Index kk = scores.dims();
  if (kk > basis.count())
    throw ValidationError("score width " + std::to_string(kk) + " exceeds the " + std::to_string(basis.count()) +
                          " available components");
  DataMatrix out;
  out.shape = basis.shape;
  out.data = (scores.data * basis.components.topRows(kk)).rowwise() + basis.mean.transpose();
  out.row_ids = scores.row_ids;
  return out;
}

DataMatrix whiten(const DataMatrix& matrix, const ComponentBasis& basis, Eigen::Index k, std::optional<double> eps) {
  if (k < 1 || k > basis.count())
    throw ValidationError("whitening k = " + std::to_string(k) + " out of range [1, " + std::to_string(basis.count()) + "]");
  const double floor = eps.value_or(1e-10 * basis.eigenvalues[0]);
  for (Eigen::Index j = 0; j < k; ++j)
    if (!(basis.eigenvalues[j] > floor))
      throw ValidationError("cannot whiten: eigenvalue " + std::to_string(j + 1) + " (" +
                            std::to_string(basis.eigenvalues[j]) + ") is near zero");
  DataMatrix out = project(basis, matrix, k);
  out.data.array().rowwise() /= basis.eigenvalues.head(k).array().sqrt().transpose();
  return out;
}

void IcaParams::validate(Eigen::Index dims) const {
  if (k < 1) throw ValidationError("ICA k must be >= 1");
  if (pre_pca_k < k) throw ValidationError("ICA pre_pca_k must be >= k");
  if (pre_pca_k > dims) throw ValidationError("ICA pre_pca_k must be <= the data dimension");
  if (!(tol > 0.0)) throw ValidationError("ICA tol must be > 0");
  if (max_iter < 1) throw ValidationError("ICA max_iter must be >= 1");
  if (w_init && (w_init->rows() != k || w_init->cols() != pre_pca_k))
    throw ValidationError("ICA w_init must be k x pre_pca_k");
}

Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd gram = w * w.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

IcaResult fit_ica(const DataMatrix& matrix, const IcaParams& params) {
  params.validate(matrix.dims());
  if (matrix.rows() < 10 * params.k)
    throw ValidationError("ICA needs at least 10*k = " + std::to_string(10 * params.k) + " rows, got " +
                          std::to_string(matrix.rows()));

  const ComponentBasis pca = fit_pca(matrix, params.pre_pca_k, PcaMethod::automatic, params.seed);
  const Eigen::Index m = params.pre_pca_k;
  const Eigen::MatrixXd z = whiten(matrix, pca, m).data;  // n x m
  const auto n = static_cast<double>(z.rows());

  Eigen::MatrixXd w;
  if (params.w_init) {
    w = symmetric_decorrelation(*params.w_init);
  } else {
    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    w.resize(params.k, m);
    for (Eigen::Index i = 0; i < params.k; ++i)
      for (Eigen::Index j = 0; j < m; ++j) w(i, j) = normal(rng);
    w = symmetric_decorrelation(w);
  }

  IcaResult result;
  for (int it = 1; it <= params.max_iter; ++it) {
    const Eigen::MatrixXd g = (z * w.transpose()).array().tanh().matrix();  // n x k
    const Eigen::VectorXd g_prime_mean = (1.0 - g.array().square()).colwise().mean().transpose();
    Eigen::MatrixXd w_new = (g.transpose() * z) / n - g_prime_mean.asDiagonal() * w;
    w_new = symmetric_decorrelation(w_new);
    const double change = (1.0 - (w_new.cwiseProduct(w).rowwise().sum()).array().abs()).maxCoeff();
    w = std::move(w_new);
    result.iterations = it;
    result.last_change = change;
    if (change < params.tol) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    spdlog::warn("FastICA did not converge in {} iterations (last change {:.3g})", params.max_iter, result.last_change);

  // Mixing directions a_i = E D^(1/2) w_i; their squared norm is the variance
  // the unit-variance source contributes in pixel space.
  const Eigen::VectorXd sqrt_d = pca.eigenvalues.head(m).cwiseSqrt();
  const RowMatrix mixing = (w * sqrt_d.asDiagonal()) * pca.components.topRows(m);  // k x p
  RowMatrix unmixing = (w * sqrt_d.cwiseInverse().asDiagonal()) * pca.components.topRows(m);
  const Eigen::VectorXd power = mixing.rowwise().squaredNorm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(params.k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return power[a] > power[b]; });

  ComponentBasis& basis = result.basis;
  basis.kind = BasisKind::ica;
  basis.shape = matrix.shape;
  basis.mean = pca.mean;
  basis.total_variance = pca.total_variance;
  basis.n_samples = pca.n_samples;
  basis.components.resize(params.k, matrix.dims());
  basis.eigenvalues.resize(params.k);
  result.unmixing.resize(params.k, matrix.dims());
  result.whitened_unmixing.resize(params.k, m);
  for (Eigen::Index i = 0; i < params.k; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    basis.components.row(i) = mixing.row(src) / std::sqrt(power[src]);
    basis.eigenvalues[i] = power[src];
    result.unmixing.row(i) = unmixing.row(src);
    result.whitened_unmixing.row(i) = w.row(src);
  }
  const Eigen::VectorXd signs = orient_signs(basis.components);
  result.unmixing = signs.asDiagonal() * result.unmixing;
  result.whitened_unmixing = signs.asDiagonal() * result.whitened_unmixing;
  return result;
}

double amari_index(const Eigen::MatrixXd& gain) {
  const Eigen::Index k = gain.rows();
  if (gain.cols() != k || k < 2) throw ValidationError("Amari index needs a square matrix of size >= 2");
  const Eigen::MatrixXd a = gain.cwiseAbs();
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) total += a.row(i).sum() / a.row(i).maxCoeff() - 1.0;
  for (Eigen::Index j = 0; j < k; ++j) total += a.col(j).sum() / a.col(j).maxCoeff() - 1.0;
  return total / (2.0 * static_cast<double>(k) * static_cast<double>(k - 1));
}

}  // namespace dsviz
