#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsviz/image.hpp"

namespace dsviz {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// (H, W, C) provenance of a flattened row. Rows are laid out (y, x, c)
/// interleaved, so entry (y, x, c) sits at (y * W + x) * C + c.
struct Shape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const { return static_cast<std::size_t>(height) * width * channels; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// n x p table of flattened images or patches.
struct DataMatrix {
  Shape shape;
  RowMatrix data;
  std::vector<std::string> row_ids;  // empty or one per row

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index dims() const { return data.cols(); }

  /// p == H*W*C, all entries finite, row_ids empty or of length n.
  void validate() const;
};

/// Copies an image into row `row` of `out` in (y, x, c) order.
void flatten_into(const ImageBuffer& img, Eigen::Ref<RowMatrix> out, Eigen::Index row);
Eigen::VectorXd flatten(const ImageBuffer& img);
ImageBuffer unflatten(const Eigen::Ref<const Eigen::VectorXd>& row, const Shape& shape);

}  // namespace dsviz
