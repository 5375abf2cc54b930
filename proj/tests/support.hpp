#pragma once

// Shared fixtures and brute-force oracles for the test binaries. The oracles
// deliberately avoid the library's numerical code paths: plain loops, long
// double accumulation and a cyclic Jacobi eigensolver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsviz/data_matrix.hpp"
#include "dsviz/image.hpp"

namespace testing_support {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "dsviz-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline dsviz::DataMatrix matrix_from(const dsviz::RowMatrix& data) {
  dsviz::DataMatrix m;
  m.shape = {1, static_cast<int>(data.cols()), 1};
  m.data = data;
  return m;
}

inline dsviz::RowMatrix rows(std::initializer_list<std::initializer_list<double>> values) {
  dsviz::RowMatrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline dsviz::RowMatrix gaussian_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  dsviz::RowMatrix m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = normal(rng);
  return m;
}

/// Gaussian data with a strongly graded column scale, so that the covariance
/// spectrum has clear gaps.
inline dsviz::RowMatrix graded_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  dsviz::RowMatrix m = gaussian_matrix(n, p, seed);
  for (Eigen::Index j = 0; j < p; ++j) m.col(j) *= std::pow(1.7, static_cast<double>(p - j));
  // A random rotation so that eigenvectors are not coordinate axes.
  const Eigen::MatrixXd g = gaussian_matrix(p, p, seed ^ 0xabcdefULL);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  return m * q;
}

/// Rank-k data: n x k scores with graded scales times a k x p orthonormal
/// loading, plus an offset.
inline dsviz::RowMatrix low_rank_matrix(Eigen::Index n, Eigen::Index p, Eigen::Index k, std::uint64_t seed) {
  const dsviz::RowMatrix scores = gaussian_matrix(n, k, seed);
  Eigen::MatrixXd loading = gaussian_matrix(p, k, seed + 1);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(loading);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, k);
  Eigen::VectorXd scale(k);
  for (Eigen::Index i = 0; i < k; ++i) scale[i] = 10.0 * std::pow(0.7, static_cast<double>(i));
  dsviz::RowMatrix out = scores * scale.asDiagonal() * q.transpose();
  out.rowwise() += Eigen::RowVectorXd::LinSpaced(p, 0.0, 1.0);
  return out;
}

struct BruteMoments {
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
};

inline BruteMoments brute_covariance(const dsviz::RowMatrix& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  BruteMoments m;
  m.mean.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    m.mean[j] = static_cast<double>(s / n);
  }
  m.cov.assign(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      long double s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        s += (static_cast<long double>(x(r, static_cast<Eigen::Index>(a))) - m.mean[a]) *
             (static_cast<long double>(x(r, static_cast<Eigen::Index>(b))) - m.mean[b]);
      }
      m.cov[a][b] = static_cast<double>(s / (n - 1));
    }
  return m;
}

struct EigenPairs {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi rotations on a symmetric matrix, in long double.
inline EigenPairs jacobi_eigen(const std::vector<std::vector<double>>& sym) {
  const std::size_t p = sym.size();
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p));
  std::vector<std::vector<long double>> v(p, std::vector<long double>(p, 0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) a[i][j] = sym[i][j];
    v[i][i] = 1;
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    long double off = 0, norm = 0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        norm += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    if (off <= 1e-34L * norm || off == 0) break;
    for (std::size_t q = 0; q < p; ++q)
      for (std::size_t r = q + 1; r < p; ++r) {
        if (a[q][r] == 0) continue;
        const long double theta = (a[r][r] - a[q][q]) / (2 * a[q][r]);
        const long double t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const long double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < p; ++k) {
          const long double akq = a[k][q], akr = a[k][r];
          a[k][q] = c * akq - s * akr;
          a[k][r] = s * akq + c * akr;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const long double aqk = a[q][k], ark = a[r][k];
          a[q][k] = c * aqk - s * ark;
          a[r][k] = s * aqk + c * ark;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const long double vkq = v[k][q], vkr = v[k][r];
          v[k][q] = c * vkq - s * vkr;
          v[k][r] = s * vkq + c * vkr;
        }
      }
  }
  std::vector<std::size_t> order(p);
  for (std::size_t i = 0; i < p; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (std::size_t idx : order) {
    out.values.push_back(static_cast<double>(a[idx][idx]));
    std::vector<double> vec(p);
    for (std::size_t k = 0; k < p; ++k) vec[k] = static_cast<double>(v[k][idx]);
    // Largest |entry| positive, lowest index on ties.
    std::size_t best = 0;
    for (std::size_t k = 1; k < p; ++k)
      if (std::fabs(vec[k]) > std::fabs(vec[best])) best = k;
    if (vec[best] < 0)
      for (double& e : vec) e = -e;
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

/// Minimum relative gap between consecutive eigenvalues among the first k+1,
/// relative to the largest. Used to skip near-degenerate spectra where
/// eigenvectors are not individually defined.
inline double min_gap(const std::vector<double>& values, std::size_t k) {
  double gap = INFINITY;
  const double scale = std::max(values.front(), 1e-300);
  for (std::size_t i = 0; i + 1 < values.size() && i < k; ++i) gap = std::min(gap, (values[i] - values[i + 1]) / scale);
  return gap;
}

inline dsviz::ImageBuffer random_image(int w, int h, int c, std::uint64_t seed, bool quantized = true) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, 255);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  dsviz::ImageBuffer img(w, h, c);
  for (double& v : img.pixels) v = quantized ? level(rng) / 255.0 : unit(rng);
  return img;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string manifest_line(const nlohmann::json& record) { return record.dump() + "\n"; }

}  // namespace testing_support
