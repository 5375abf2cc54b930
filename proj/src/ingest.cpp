#include "dsviz/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include <spdlog/spdlog.h>

#include "dsviz/error.hpp"
#include "dsviz/parallel.hpp"

namespace dsviz {

Size2 parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
      throw ValidationError("invalid size '" + text + "', expected WxH");
    return v;
  };
  if (x == std::string::npos) throw ValidationError("invalid size '" + text + "', expected WxH");
  const std::string_view sv(text);
  Size2 s{parse_int(sv.substr(0, x)), parse_int(sv.substr(x + 1))};
  if (s.width < 1 || s.height < 1) throw ValidationError("size components must be >= 1 in '" + text + "'");
  return s;
}

void LoadOptions::validate() const {
  if (target_size && (target_size->width < 1 || target_size->height < 1))
    throw ValidationError("target size components must be >= 1");
}

ImageBuffer load_image(const SampleRecord& record, const std::filesystem::path& manifest_root,
                       const LoadOptions& opts) {
  opts.validate();
  ImageBuffer img;
  try {
    img = decode_image(manifest_root / record.image);
  } catch (const IoError& e) {
    throw IoError("sample '" + record.id + "': " + e.what());
  }
  if (opts.crop_to_bbox) {
    if (record.bbox) {
      try {
        img = crop(img, *record.bbox);
      } catch (const ValidationError& e) {
        throw ValidationError("sample '" + record.id + "': " + e.what());
      }
    } else {
      spdlog::warn("sample '{}': crop requested but no bbox; using full image", record.id);
    }
  }
  if (opts.target_size) img = resize(img, opts.target_size->width, opts.target_size->height);
  if (opts.force_rgb) img = to_rgb(img);
  return img;
}

DataMatrix build_data_matrix(const DatasetManifest& manifest, const LoadOptions& opts,
                             const std::optional<std::string>& split) {
  opts.validate();
  if (!opts.target_size) throw ValidationError("build_data_matrix needs a target size so rows share one shape");

  std::vector<const SampleRecord*> selected;
  for (const auto& s : manifest.samples)
    if (!split || s.split == *split) selected.push_back(&s);
  if (selected.empty())
    throw ValidationError(split ? "no samples in split '" + *split + "'" : std::string("manifest has no samples"));

  std::vector<ImageBuffer> images(selected.size());
  parallel_for(selected.size(), [&](std::size_t i) { images[i] = load_image(*selected[i], manifest.root, opts); });

  const int channels = images.front().channels;
  for (std::size_t i = 0; i < images.size(); ++i)
    if (images[i].channels != channels)
      throw ValidationError("channel mismatch: sample '" + selected[i]->id + "' has " +
                            std::to_string(images[i].channels) + " channel(s), sample '" + selected.front()->id +
                            "' has " + std::to_string(channels) + "; use force_rgb");

  DataMatrix m;
  m.shape = Shape{opts.target_size->height, opts.target_size->width, channels};
  m.data.resize(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(m.shape.size()));
  m.row_ids.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    flatten_into(images[i], m.data, static_cast<Eigen::Index>(i));
    m.row_ids.push_back(selected[i]->id);
  }
  return m;
}

PatchSampler::PatchSampler(const DatasetManifest& manifest, PatchSize patch, std::uint64_t seed, bool force_rgb)
    : manifest_(manifest), patch_(patch), force_rgb_(force_rgb), rng_(seed) {
  if (patch.height < 1 || patch.width < 1) throw ValidationError("patch size must be at least 1x1");

  std::vector<ImageInfo> infos(manifest.samples.size());
  parallel_for(infos.size(), [&](std::size_t i) {
    try {
      infos[i] = read_image_info(manifest.resolve(manifest.samples[i].image));
    } catch (const IoError& e) {
      throw IoError("sample '" + manifest.samples[i].id + "': " + e.what());
    }
  });

  int channels = 0;
  for (std::size_t i = 0; i < infos.size(); ++i) {
    const auto& info = infos[i];
    if (info.width < patch.width || info.height < patch.height) {
      ++skipped_;
      continue;
    }
    const int c = force_rgb ? 3 : info.channels;
    if (channels == 0) channels = c;
    if (c != channels)
      throw ValidationError("channel mismatch at sample '" + manifest.samples[i].id + "'; use force_rgb");
    eligible_.push_back({i, info.width, info.height});
  }
  if (eligible_.empty())
    throw ValidationError("no image is large enough for a " + std::to_string(patch.width) + "x" +
                          std::to_string(patch.height) + " patch");
  if (skipped_ > 0) spdlog::warn("{} image(s) smaller than the patch size were skipped", skipped_);
  shape_ = Shape{patch.height, patch.width, channels};
}

DataMatrix PatchSampler::next(std::size_t count) {
  if (count < 1) throw ValidationError("patch count must be >= 1");

  struct Draw {
    std::size_t row;
    int y;
    int x;
  };
  // Draws grouped by source so each image is decoded once per call.
  std::map<std::size_t, std::vector<Draw>> by_source;
  std::uniform_int_distribution<std::size_t> pick(0, eligible_.size() - 1);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t src = pick(rng_);
    const auto& e = eligible_[src];
    std::uniform_int_distribution<int> py(0, e.height - patch_.height);
    std::uniform_int_distribution<int> px(0, e.width - patch_.width);
    const int y = py(rng_);
    const int x = px(rng_);
    by_source[src].push_back({r, y, x});
  }

  DataMatrix m;
  m.shape = shape_;
  m.data.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(shape_.size()));
  std::vector<std::pair<std::size_t, const std::vector<Draw>*>> jobs_list;
  jobs_list.reserve(by_source.size());
  for (const auto& [src, draws] : by_source) jobs_list.emplace_back(src, &draws);

  parallel_for(jobs_list.size(), [&](std::size_t j) {
    const auto& src = eligible_[jobs_list[j].first];
    const auto& record = manifest_.samples[src.sample];
    ImageBuffer img = decode_image(manifest_.resolve(record.image));
    if (force_rgb_) img = to_rgb(img);
    for (const auto& d : *jobs_list[j].second) {
      const ImageBuffer p = crop(img, BBox{d.x, d.y, patch_.width, patch_.height});
      flatten_into(p, m.data, static_cast<Eigen::Index>(d.row));
    }
  });
  return m;
}

DataMatrix sample_patches(const DatasetManifest& manifest, PatchSize patch, std::size_t count, std::uint64_t seed,
                          bool force_rgb) {
  PatchSampler sampler(manifest, patch, seed, force_rgb);
  return sampler.next(count);
}

}  // namespace dsviz
