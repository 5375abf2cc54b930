#include "dsviz/data_matrix.hpp"

#include <cmath>

#include "dsviz/error.hpp"

namespace dsviz {

std::string to_string(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

void DataMatrix::validate() const {
  if (static_cast<std::size_t>(data.cols()) != shape.size())
    throw ValidationError("data matrix has " + std::to_string(data.cols()) + " columns but shape " +
                          to_string(shape) + " implies " + std::to_string(shape.size()));
  if (!row_ids.empty() && static_cast<Eigen::Index>(row_ids.size()) != data.rows())
    throw ValidationError("row_ids length does not match row count");
  if (!data.allFinite()) throw ValidationError("data matrix contains non-finite entries");
}

void flatten_into(const ImageBuffer& img, Eigen::Ref<RowMatrix> out, Eigen::Index row) {
  if (static_cast<std::size_t>(out.cols()) != img.pixels.size())
    throw ValidationError("image size does not match matrix width");
  out.row(row) = Eigen::Map<const Eigen::RowVectorXd>(img.pixels.data(), static_cast<Eigen::Index>(img.pixels.size()));
}

Eigen::VectorXd flatten(const ImageBuffer& img) {
  return Eigen::Map<const Eigen::VectorXd>(img.pixels.data(), static_cast<Eigen::Index>(img.pixels.size()));
}

ImageBuffer unflatten(const Eigen::Ref<const Eigen::VectorXd>& row, const Shape& shape) {
  if (static_cast<std::size_t>(row.size()) != shape.size())
    throw ValidationError("vector length " + std::to_string(row.size()) + " does not match shape " + to_string(shape));
  ImageBuffer img(shape.width, shape.height, shape.channels);
  for (Eigen::Index i = 0; i < row.size(); ++i) img.pixels[static_cast<std::size_t>(i)] = row[i];
  return img;
}

}  // namespace dsviz
