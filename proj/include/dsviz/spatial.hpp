#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsviz/ingest.hpp"
#include "dsviz/manifest.hpp"

namespace dsviz {

/// Aggregated object occupancy for one category (and optionally one split).
struct SpatialHeatmap {
  std::string category;
  std::optional<std::string> split;
  int width = 640;
  int height = 640;
  std::vector<double> counts;     // row-major, summed fractional coverage
  std::vector<int> normalized;    // round-half-up(255 * v / max), 0..255
  std::size_t n_samples = 0;

  double max_count() const;
  double count_at(int y, int x) const { return counts[static_cast<std::size_t>(y) * width + x]; }
  int normalized_at(int y, int x) const { return normalized[static_cast<std::size_t>(y) * width + x]; }
};

/// v -> floor(255 * v / max + 0.5); all zero when max == 0.
std::vector<int> normalize_counts(const std::vector<double>& counts);

struct MaskSource {
  /// Directory searched for `<id>_<category>.png` when a record's own mask
  /// does not apply.
  std::optional<std::filesystem::path> mask_dir;
};

/// Mask for `category` attached to `record`, if any: the record's `mask`
/// when metadata["category"] matches, else `<mask_dir>/<id>_<category>.png`
/// when that file exists.
std::optional<std::filesystem::path> find_mask(const DatasetManifest& manifest, const SampleRecord& record,
                                               const std::string& category, const MaskSource& source);

/// Binarizes a mask (value > 0 -> 1) and box-resizes it, keeping fractional
/// coverage at cell boundaries.
ImageBuffer binarize_and_resize(const ImageBuffer& mask, int width, int height);

/// Sums binarized, resized masks in fixed point so the totals are exact and
/// independent of processing order, then normalizes to [0, 255].
SpatialHeatmap aggregate_masks(const DatasetManifest& manifest, const std::string& category,
                               const std::optional<std::string>& split, Size2 size = {640, 640},
                               const MaskSource& source = {});

/// Same aggregation over masks already in memory.
SpatialHeatmap aggregate_mask_images(const std::vector<ImageBuffer>& masks, const std::string& category,
                                     const std::optional<std::string>& split, Size2 size);

struct HeatmapComparison {
  double l1 = 0.0;           // between sum-normalized count grids, in [0, 2]
  double correlation = 0.0;  // Pearson over cells; NaN if either grid is constant
  std::vector<double> difference;  // a/sum(a) - b/sum(b), row-major
  int width = 0;
  int height = 0;
};

HeatmapComparison compare_heatmaps(const SpatialHeatmap& a, const SpatialHeatmap& b);

enum class CategorySource { label, metadata_list };

struct CategoryKey {
  CategorySource source = CategorySource::label;
  /// For metadata_list: metadata key holding a comma-separated category list.
  std::string metadata_key = "categories";
};

struct CooccurrenceMatrix {
  std::vector<std::string> categories;  // lexicographic
  std::vector<std::vector<std::size_t>> counts;
};

std::vector<std::string> sample_categories(const SampleRecord& record, const CategoryKey& key);

CooccurrenceMatrix cooccurrence(const DatasetManifest& manifest, const CategoryKey& key);

}  // namespace dsviz
