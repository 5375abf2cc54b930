#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dsviz {

/// Integer pixel rectangle in source-image coordinates.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Row-major (y, x, c) interleaved image with values in [0, 1].
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> pixels;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, double fill = 0.0);

  std::size_t size() const { return pixels.size(); }
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return pixels[index(y, x, c)]; }
  double at(int y, int x, int c) const { return pixels[index(y, x, c)]; }

  /// Throws ValidationError if dimensions or value range are violated.
  void validate() const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

struct ImageInfo {
  int width = 0;
  int height = 0;
  int channels = 0;  // after alpha removal: 1 or 3
};

// Codec I/O. PNG (8/16-bit, any color type) and JPEG are decoded; alpha is
// dropped, gray+alpha becomes gray, palettes are expanded to RGB.

ImageBuffer decode_image(const std::filesystem::path& path);
ImageInfo read_image_info(const std::filesystem::path& path);

/// 8-bit PNG; each value is quantized as round(v * 255) after clamping to [0, 1].
void write_png(const std::filesystem::path& path, const ImageBuffer& img);
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
ImageBuffer decode_png_bytes(std::span<const std::uint8_t> bytes);

std::uint8_t quantize_8bit(double v);

// Geometry.

ImageBuffer crop(const ImageBuffer& img, const BBox& box);

/// Separable resize: area-average along axes that shrink, bilinear
/// (half-pixel centers, clamped edges) along axes that grow.
ImageBuffer resize(const ImageBuffer& img, int width, int height);

/// Box-filter resize in both directions; output pixels are the exact
/// area-weighted mean of the source pixels they cover.
ImageBuffer resize_area(const ImageBuffer& img, int width, int height);

ImageBuffer to_rgb(const ImageBuffer& img);
ImageBuffer upscale_nearest(const ImageBuffer& img, int factor);
ImageBuffer flip_horizontal(const ImageBuffer& img);

}  // namespace dsviz
