#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dsviz/data_matrix.hpp"
#include "dsviz/image.hpp"
#include "dsviz/manifest.hpp"

namespace dsviz {

struct Size2 {
  int width = 0;
  int height = 0;
  friend bool operator==(const Size2&, const Size2&) = default;
};

/// Parses "WxH" (e.g. "40x40").
Size2 parse_size(const std::string& text);

struct LoadOptions {
  bool crop_to_bbox = false;
  std::optional<Size2> target_size;
  bool force_rgb = false;

  void validate() const;
};

/// Decode, optional bbox crop, optional resize, optional gray->RGB.
/// Crop always precedes resize. A crop request on a record without a bbox
/// logs a warning and keeps the full frame.
ImageBuffer load_image(const SampleRecord& record, const std::filesystem::path& manifest_root,
                       const LoadOptions& opts);

/// One row per sample (optionally restricted to `split`), in manifest order.
/// Requires opts.target_size. Mixed channel counts are rejected unless
/// opts.force_rgb is set.
DataMatrix build_data_matrix(const DatasetManifest& manifest, const LoadOptions& opts,
                             const std::optional<std::string>& split = std::nullopt);

struct PatchSize {
  int height = 0;
  int width = 0;
};

/// Seeded random patch source. Each draw picks an eligible image uniformly,
/// then a top-left corner uniformly among all valid positions. Consecutive
/// next() calls continue one draw sequence, so drawing in chunks yields the
/// same rows as drawing everything at once.
class PatchSampler {
 public:
  PatchSampler(const DatasetManifest& manifest, PatchSize patch, std::uint64_t seed, bool force_rgb = false);

  DataMatrix next(std::size_t count);

  Shape shape() const { return shape_; }
  std::size_t eligible_images() const { return eligible_.size(); }
  std::size_t skipped_images() const { return skipped_; }

 private:
  struct Source {
    std::size_t sample;
    int width;
    int height;
  };

  const DatasetManifest& manifest_;
  PatchSize patch_;
  bool force_rgb_;
  Shape shape_;
  std::vector<Source> eligible_;
  std::size_t skipped_ = 0;
  std::mt19937_64 rng_;
};

DataMatrix sample_patches(const DatasetManifest& manifest, PatchSize patch, std::size_t count, std::uint64_t seed,
                          bool force_rgb = false);

}  // namespace dsviz
