#include "dsviz/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "dsviz/error.hpp"

namespace dsviz {

ImageBuffer::ImageBuffer(int w, int h, int c, double fill)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(w) * h * c, fill) {}

void ImageBuffer::validate() const {
  if (width < 1 || height < 1) throw ValidationError("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw ValidationError("image must have 1 or 3 channels");
  if (pixels.size() != static_cast<std::size_t>(width) * height * channels)
    throw ValidationError("pixel buffer length does not match width*height*channels");
  for (double v : pixels)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("pixel value outside [0,1]");
}

std::uint8_t quantize_8bit(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

namespace {

enum class Format { png, jpeg, unknown };

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Format sniff(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig, 8) == 0) return Format::png;
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return Format::jpeg;
  return Format::unknown;
}

// ---- PNG -------------------------------------------------------------------

struct PngReadSource {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + len > src->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(out, src->bytes.data() + src->offset, len);
  src->offset += len;
}

void png_warning_silent(png_structp, png_const_charp) {}

// Decodes into `img`; returns false on libpng error.
bool png_decode(std::span<const std::uint8_t> bytes, bool header_only, ImageBuffer& img,
                ImageInfo& info, std::string& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_silent);
  if (!png) {
    err = "png_create_read_struct failed";
    return false;
  }
  png_infop pinfo = png_create_info_struct(png);
  PngReadSource src{bytes, 0};
  // Heap-held so the setjmp frame never sees modified automatic objects.
  struct Buffers {
    std::vector<png_byte> raw;
    std::vector<png_bytep> rows;
  };
  const auto buffers = std::make_unique<Buffers>();
  auto& raw = buffers->raw;
  auto& rows = buffers->rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &pinfo, nullptr);
    err = "corrupt PNG data";
    return false;
  }
  png_set_read_fn(png, &src, png_read_callback);
  png_read_info(png, pinfo);

  const int color = png_get_color_type(png, pinfo);
  int depth = png_get_bit_depth(png, pinfo);
  const auto w = static_cast<int>(png_get_image_width(png, pinfo));
  const auto h = static_cast<int>(png_get_image_height(png, pinfo));

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_swap(png);
  png_set_strip_alpha(png);
  if (png_get_valid(png, pinfo, PNG_INFO_tRNS)) {
    // tRNS would otherwise be expanded into an alpha channel; ignore it.
    png_free_data(png, pinfo, PNG_FREE_TRNS, -1);
    png_set_invalid(png, pinfo, PNG_INFO_tRNS);
  }
  png_read_update_info(png, pinfo);

  const int out_channels = png_get_channels(png, pinfo);
  depth = png_get_bit_depth(png, pinfo);
  info = ImageInfo{w, h, out_channels};
  if (out_channels != 1 && out_channels != 3) {
    png_destroy_read_struct(&png, &pinfo, nullptr);
    err = "unsupported PNG channel layout";
    return false;
  }
  if (header_only) {
    png_destroy_read_struct(&png, &pinfo, nullptr);
    return true;
  }

  const std::size_t rowbytes = png_get_rowbytes(png, pinfo);
  raw.resize(rowbytes * static_cast<std::size_t>(h));
  rows.resize(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = raw.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &pinfo, nullptr);

  img = ImageBuffer(w, h, out_channels);
  if (depth == 16) {
    for (int y = 0; y < h; ++y) {
      const auto* row = reinterpret_cast<const std::uint16_t*>(raw.data() + rowbytes * y);
      for (std::size_t i = 0; i < static_cast<std::size_t>(w) * out_channels; ++i)
        img.pixels[static_cast<std::size_t>(y) * w * out_channels + i] = row[i] / 65535.0;
    }
  } else {
    for (int y = 0; y < h; ++y) {
      const png_byte* row = raw.data() + rowbytes * y;
      for (std::size_t i = 0; i < static_cast<std::size_t>(w) * out_channels; ++i)
        img.pixels[static_cast<std::size_t>(y) * w * out_channels + i] = row[i] / 255.0;
    }
  }
  return true;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_callback(png_structp) {}

// ---- JPEG ------------------------------------------------------------------

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

bool jpeg_decode(std::span<const std::uint8_t> bytes, bool header_only, ImageBuffer& img,
                 ImageInfo& info, std::string& err) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  std::vector<std::uint8_t> scan;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    err = std::string("corrupt JPEG data: ") + jerr.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
    err = "CMYK JPEG is not supported";
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  const int w = static_cast<int>(cinfo.image_width);
  const int h = static_cast<int>(cinfo.image_height);
  const int c = cinfo.num_components == 1 ? 1 : 3;
  info = ImageInfo{w, h, c};
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return true;
  }
  jpeg_start_decompress(&cinfo);
  const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * cinfo.output_components;
  scan.resize(stride);
  img = ImageBuffer(w, h, c);
  while (cinfo.output_scanline < cinfo.output_height) {
    const auto y = cinfo.output_scanline;
    JSAMPROW row = scan.data();
    jpeg_read_scanlines(&cinfo, &row, 1);
    for (std::size_t i = 0; i < stride; ++i)
      img.pixels[static_cast<std::size_t>(y) * stride + i] = scan[i] / 255.0;
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageBuffer decode_bytes(std::span<const std::uint8_t> bytes, const std::string& name,
                         bool header_only, ImageInfo& info) {
  ImageBuffer img;
  std::string err;
  bool ok = false;
  switch (sniff(bytes)) {
    case Format::png: ok = png_decode(bytes, header_only, img, info, err); break;
    case Format::jpeg: ok = jpeg_decode(bytes, header_only, img, info, err); break;
    case Format::unknown: err = "not a PNG or JPEG file"; break;
  }
  if (!ok) throw IoError("cannot decode " + name + ": " + err);
  return img;
}

// Per-axis resampling kernel: for each output index the contributing source
// indices and their weights.
struct AxisTap {
  int index;
  double weight;
};
using AxisKernel = std::vector<std::vector<AxisTap>>;

AxisKernel area_kernel(int in, int out) {
  // Work in units of 1/(in*out): output cell i spans [i*in, (i+1)*in) and
  // source cell j spans [j*out, (j+1)*out). Weights are overlap / in.
  AxisKernel k(static_cast<std::size_t>(out));
  for (int i = 0; i < out; ++i) {
    const long long lo = static_cast<long long>(i) * in;
    const long long hi = lo + in;
    const int j0 = static_cast<int>(lo / out);
    const int j1 = static_cast<int>(std::min<long long>((hi + out - 1) / out, in));
    for (int j = j0; j < j1; ++j) {
      const long long s_lo = static_cast<long long>(j) * out;
      const long long s_hi = s_lo + out;
      const long long overlap = std::min(hi, s_hi) - std::max(lo, s_lo);
      if (overlap > 0) k[i].push_back({j, static_cast<double>(overlap) / static_cast<double>(in)});
    }
  }
  return k;
}

AxisKernel bilinear_kernel(int in, int out) {
  AxisKernel k(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int j0 = static_cast<int>(std::floor(src));
    const int j1 = std::min(j0 + 1, in - 1);
    const double f = src - j0;
    if (j1 == j0 || f == 0.0) {
      k[i].push_back({j0, 1.0});
    } else {
      k[i].push_back({j0, 1.0 - f});
      k[i].push_back({j1, f});
    }
  }
  return k;
}

ImageBuffer apply_separable(const ImageBuffer& img, int width, int height, const AxisKernel& kx,
                            const AxisKernel& ky) {
  const int c = img.channels;
  ImageBuffer tmp(width, img.height, c);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < width; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const auto& t : kx[x]) acc += t.weight * img.at(y, t.index, ch);
        tmp.at(y, x, ch) = acc;
      }
  ImageBuffer out(width, height, c);
  for (int y = 0; y < height; ++y)
    for (const auto& t : ky[y])
      for (int x = 0; x < width; ++x)
        for (int ch = 0; ch < c; ++ch) out.at(y, x, ch) += t.weight * tmp.at(t.index, x, ch);
  for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  return out;
}

void check_target(int width, int height) {
  if (width < 1 || height < 1) throw ValidationError("resize target must be at least 1x1");
}

}  // namespace

ImageBuffer decode_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ImageInfo info;
  return decode_bytes(bytes, path.string(), false, info);
}

ImageInfo read_image_info(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ImageInfo info;
  decode_bytes(bytes, path.string(), true, info);
  return info;
}

ImageBuffer decode_png_bytes(std::span<const std::uint8_t> bytes) {
  ImageInfo info;
  return decode_bytes(bytes, "<memory>", false, info);
}

namespace {

// Kept free of objects with destructors: libpng reports errors via longjmp.
bool png_encode_rows(const ImageBuffer& img, std::vector<std::uint8_t>* out, png_byte* row) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_silent);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  png_set_write_fn(png, out, png_write_callback, png_flush_callback);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    for (std::size_t i = 0; i < stride; ++i) row[i] = quantize_8bit(img.pixels[static_cast<std::size_t>(y) * stride + i]);
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  if (img.channels != 1 && img.channels != 3) throw ValidationError("PNG encoding needs 1 or 3 channels");
  if (img.width < 1 || img.height < 1) throw ValidationError("cannot encode an empty image");
  std::vector<std::uint8_t> out;
  std::vector<png_byte> row(static_cast<std::size_t>(img.width) * img.channels);
  if (!png_encode_rows(img, &out, row.data())) throw IoError("PNG encoding failed");
  return out;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ImageBuffer crop(const ImageBuffer& img, const BBox& box) {
  if (box.x < 0 || box.y < 0 || box.w < 1 || box.h < 1 || box.x + box.w > img.width ||
      box.y + box.h > img.height)
    throw ValidationError("bbox (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
                          std::to_string(box.w) + "," + std::to_string(box.h) + ") exceeds image bounds " +
                          std::to_string(img.width) + "x" + std::to_string(img.height));
  ImageBuffer out(box.w, box.h, img.channels);
  const std::size_t span = static_cast<std::size_t>(box.w) * img.channels;
  for (int y = 0; y < box.h; ++y) {
    const auto src = img.pixels.begin() + static_cast<std::ptrdiff_t>(img.index(box.y + y, box.x, 0));
    std::copy(src, src + static_cast<std::ptrdiff_t>(span),
              out.pixels.begin() + static_cast<std::ptrdiff_t>(out.index(y, 0, 0)));
  }
  return out;
}

ImageBuffer resize(const ImageBuffer& img, int width, int height) {
  check_target(width, height);
  if (width == img.width && height == img.height) return img;
  const auto kx = width <= img.width ? area_kernel(img.width, width) : bilinear_kernel(img.width, width);
  const auto ky = height <= img.height ? area_kernel(img.height, height) : bilinear_kernel(img.height, height);
  return apply_separable(img, width, height, kx, ky);
}

ImageBuffer resize_area(const ImageBuffer& img, int width, int height) {
  check_target(width, height);
  if (width == img.width && height == img.height) return img;
  return apply_separable(img, width, height, area_kernel(img.width, width), area_kernel(img.height, height));
}

ImageBuffer to_rgb(const ImageBuffer& img) {
  if (img.channels == 3) return img;
  ImageBuffer out(img.width, img.height, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = img.pixels[i];
  return out;
}

ImageBuffer upscale_nearest(const ImageBuffer& img, int factor) {
  if (factor < 1) throw ValidationError("upscale factor must be >= 1");
  if (factor == 1) return img;
  ImageBuffer out(img.width * factor, img.height * factor, img.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y / factor, x / factor, c);
  return out;
}

ImageBuffer flip_horizontal(const ImageBuffer& img) {
  ImageBuffer out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, img.width - 1 - x, c) = img.at(y, x, c);
  return out;
}

}  // namespace dsviz
