#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dsviz/data_matrix.hpp"
#include "dsviz/kernels.hpp"

namespace dsviz {

enum class BasisKind { pca, ica };
enum class PcaMethod { exact, randomized, automatic };

std::string to_string(BasisKind kind);
std::string to_string(PcaMethod method);
PcaMethod parse_pca_method(const std::string& text);

/// Largest dimension handled by the dense eigensolver under PcaMethod::automatic.
inline constexpr Eigen::Index kExactDimLimit = 5000;
inline constexpr Eigen::Index kOversampling = 10;
inline constexpr int kPowerIterations = 4;

/// Mean, ordered unit components (rows) and their variances.
///
/// For kind pca the rows are orthonormal eigenvectors of the sample
/// covariance and `eigenvalues` are non-increasing. For kind ica the rows are
/// normalized mixing directions and `eigenvalues` hold the variance each
/// explains in the original space. In every row the entry of largest
/// magnitude is positive (lowest index on ties).
struct ComponentBasis {
  BasisKind kind = BasisKind::pca;
  Shape shape;
  Eigen::VectorXd mean;
  RowMatrix components;  // K x p
  Eigen::VectorXd eigenvalues;
  double total_variance = 0.0;
  std::size_t n_samples = 0;

  Eigen::Index count() const { return components.rows(); }
  Eigen::Index dims() const { return components.cols(); }
  Eigen::VectorXd explained_variance_ratio() const;
};

struct MeanCovariance {
  std::size_t n = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // divisor n - 1
};

/// Streaming accumulator: feed row blocks in any sizes; blocks are merged
/// with the pairwise update in the order given.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(Eigen::Index dims);

  void add(const Eigen::Ref<const RowMatrix>& rows);
  std::size_t count() const { return moments_.count; }
  MeanCovariance finish() const;

 private:
  kernels::Moments moments_;
};

MeanCovariance mean_and_covariance(const DataMatrix& matrix);

/// Flips each row so its largest-magnitude entry is positive. Returns the
/// applied signs (+1 / -1).
Eigen::VectorXd orient_signs(RowMatrix& rows);

/// Top-k principal components. `automatic` picks exact for p <= kExactDimLimit.
/// Randomized: Gaussian range finder with kOversampling extra columns and
/// kPowerIterations power iterations, implicitly centered, seeded.
ComponentBasis fit_pca(const DataMatrix& matrix, Eigen::Index k, PcaMethod method = PcaMethod::automatic,
                       std::uint64_t seed = 0);

/// Exact top-k from an already accumulated covariance.
ComponentBasis fit_pca_from_covariance(const MeanCovariance& mc, Eigen::Index k, const Shape& shape);

/// Scores (rows - mean) * components^T for the first k components (all if unset).
DataMatrix project(const ComponentBasis& basis, const DataMatrix& matrix, std::optional<Eigen::Index> k = {});

/// mean + scores * components[:k].
DataMatrix reconstruct(const ComponentBasis& basis, const DataMatrix& scores);

/// Projection onto the first k components scaled to unit variance. Rejects
/// any eigenvalue <= eps (default 1e-10 * lambda_1), naming its 1-based index.
DataMatrix whiten(const DataMatrix& matrix, const ComponentBasis& basis, Eigen::Index k,
                  std::optional<double> eps = {});

struct IcaParams {
  Eigen::Index k = 0;
  Eigen::Index pre_pca_k = 0;
  double tol = 1e-4;
  int max_iter = 200;
  std::uint64_t seed = 0;
  /// Optional k x pre_pca_k starting unmixing in whitened space.
  std::optional<Eigen::MatrixXd> w_init;

  void validate(Eigen::Index dims) const;
};

struct IcaResult {
  ComponentBasis basis;            // kind ica
  RowMatrix unmixing;              // k x p; sources = unmixing * (x - mean)
  Eigen::MatrixXd whitened_unmixing;  // k x pre_pca_k, orthonormal rows
  bool converged = false;
  int iterations = 0;
  double last_change = 0.0;
};

/// Symmetric FastICA with the log-cosh contrast (g = tanh) after PCA
/// reduction to pre_pca_k dimensions and whitening. Convergence is
/// max_i (1 - |<w_i', w_i>|) < tol. Not converging is reported, not thrown.
IcaResult fit_ica(const DataMatrix& matrix, const IcaParams& params);

/// W <- (W W^T)^(-1/2) W.
Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w);

/// Normalized Amari distance of a square gain matrix P = unmixing * mixing:
/// 0 for a scaled permutation, at most 1.
double amari_index(const Eigen::MatrixXd& gain);

/// JSON header plus a raw little-endian float64 sidecar `<stem>.bin` holding
/// mean (p), components (K x p, row-major) and eigenvalues (K). Fields in
/// `extra` are merged into the header.
void save_basis(const ComponentBasis& basis, const std::filesystem::path& json_path,
                const nlohmann::json& extra = nlohmann::json::object());
ComponentBasis load_basis(const std::filesystem::path& json_path);

}  // namespace dsviz
