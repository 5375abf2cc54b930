#include "dsviz/average.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "dsviz/error.hpp"
#include "dsviz/kernels.hpp"
#include "dsviz/parallel.hpp"

namespace dsviz {

void ImageMean::add(const ImageBuffer& img) {
  if (n_ == 0) {
    mean_ = img;
    n_ = 1;
    return;
  }
  if (img.width != mean_.width || img.height != mean_.height || img.channels != mean_.channels)
    throw ValidationError("cannot average images of different shapes");
  ++n_;
  kernels::omp::running_mean_update(mean_.pixels, img.pixels, n_);
}

AverageImageSet average_images(const DatasetManifest& manifest, const std::string& group_key,
                               const LoadOptions& opts, std::size_t min_n) {
  opts.validate();
  if (!opts.target_size) throw ValidationError("average_images needs a target size");

  AverageImageSet set;
  set.group_key = group_key;
  set.target_size = *opts.target_size;

  std::map<std::string, std::vector<const SampleRecord*>> groups;
  for (const auto& s : manifest.samples) {
    if (auto v = s.group_value(group_key)) {
      groups[*v].push_back(&s);
    } else {
      ++set.skipped_missing_key;
    }
  }
  if (set.skipped_missing_key > 0)
    spdlog::warn("{} sample(s) without '{}' were skipped", set.skipped_missing_key, group_key);
  if (groups.empty()) throw ValidationError("no samples carry the group key '" + group_key + "'");

  std::vector<std::pair<std::string, std::vector<const SampleRecord*>>> kept;
  for (auto& [value, members] : groups) {
    if (members.size() < min_n) {
      spdlog::warn("group {}={} has {} sample(s), below min_n = {}; omitted", group_key, value, members.size(), min_n);
      set.omitted_groups.push_back(value);
      continue;
    }
    kept.emplace_back(value, std::move(members));
  }
  if (kept.empty()) throw ValidationError("no group of '" + group_key + "' reaches min_n = " + std::to_string(min_n));

  // Groups are independent; members of a group are folded in manifest order.
  std::vector<AverageEntry> entries(kept.size());
  parallel_for(kept.size(), [&](std::size_t g) {
    ImageMean acc;
    for (const auto* rec : kept[g].second) acc.add(load_image(*rec, manifest.root, opts));
    entries[g] = AverageEntry{kept[g].first, acc.mean(), acc.count()};
  });

  const int channels = entries.front().mean.channels;
  for (const auto& e : entries)
    if (e.mean.channels != channels)
      throw ValidationError("channel mismatch between groups; use force_rgb");

  std::stable_sort(entries.begin(), entries.end(), [](const AverageEntry& a, const AverageEntry& b) {
    return a.n != b.n ? a.n > b.n : a.group_value < b.group_value;
  });
  set.entries = std::move(entries);
  return set;
}

std::string average_file_name(const std::string& key, const AverageEntry& entry) {
  std::string value = entry.group_value;
  std::replace_if(value.begin(), value.end(), [](char c) { return c == '/' || c == '\\'; }, '_');
  return key + "=" + value + "_n" + std::to_string(entry.n) + ".png";
}

}  // namespace dsviz
