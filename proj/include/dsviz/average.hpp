#pragma once

#include <string>
#include <vector>

#include "dsviz/image.hpp"
#include "dsviz/ingest.hpp"
#include "dsviz/manifest.hpp"

namespace dsviz {

struct AverageEntry {
  std::string group_value;
  ImageBuffer mean;
  std::size_t n = 0;
};

struct AverageImageSet {
  std::string group_key;
  std::vector<AverageEntry> entries;  // descending n, then group value
  Size2 target_size;
  std::size_t skipped_missing_key = 0;
  std::vector<std::string> omitted_groups;  // below min_n
};

/// Running pixel-wise mean: adding the same image repeatedly leaves the mean
/// bitwise unchanged, and the result stays within the per-pixel range.
class ImageMean {
 public:
  void add(const ImageBuffer& img);
  std::size_t count() const { return n_; }
  const ImageBuffer& mean() const { return mean_; }

 private:
  ImageBuffer mean_;
  std::size_t n_ = 0;
};

/// Groups samples by `group_key` ("label" or a metadata key) and averages
/// each group's loaded images. Groups smaller than `min_n` are omitted with a
/// warning; samples without the key are counted and skipped.
AverageImageSet average_images(const DatasetManifest& manifest, const std::string& group_key,
                               const LoadOptions& opts, std::size_t min_n = 2);

/// `<key>=<value>_n<count>.png` with path separators in the value replaced.
std::string average_file_name(const std::string& key, const AverageEntry& entry);

}  // namespace dsviz
