#include "dsviz/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dsviz/error.hpp"
#include "dsviz/kernels.hpp"
#include "dsviz/parallel.hpp"

namespace dsviz {

double SpatialHeatmap::max_count() const {
  return counts.empty() ? 0.0 : *std::max_element(counts.begin(), counts.end());
}

std::vector<int> normalize_counts(const std::vector<double>& counts) {
  std::vector<int> out(counts.size(), 0);
  const double max = counts.empty() ? 0.0 : *std::max_element(counts.begin(), counts.end());
  if (max <= 0.0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    out[i] = static_cast<int>(std::floor(255.0 * counts[i] / max + 0.5));
  return out;
}

std::optional<std::filesystem::path> find_mask(const DatasetManifest& manifest, const SampleRecord& record,
                                               const std::string& category, const MaskSource& source) {
  if (record.mask) {
    auto it = record.metadata.find("category");
    if (it != record.metadata.end() && it->second == category) return manifest.resolve(*record.mask);
  }
  if (source.mask_dir) {
    auto candidate = *source.mask_dir / (record.id + "_" + category + ".png");
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

ImageBuffer binarize_and_resize(const ImageBuffer& mask, int width, int height) {
  ImageBuffer bin(mask.width, mask.height, 1);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      bool on = false;
      for (int c = 0; c < mask.channels; ++c) on = on || mask.at(y, x, c) > 0.0;
      bin.at(y, x, 0) = on ? 1.0 : 0.0;
    }
  return resize_area(bin, width, height);
}

namespace {

// Masks are processed in fixed-size chunks to bound memory; each chunk's
// grids are produced in parallel and folded into the exact fixed-point total.
constexpr std::size_t kMaskChunk = 64;

template <class LoadMask>
SpatialHeatmap aggregate(std::size_t count, LoadMask&& load, const std::string& category,
                         const std::optional<std::string>& split, Size2 size) {
  if (size.width < 1 || size.height < 1) throw ValidationError("heatmap size must be at least 1x1");
  const std::size_t cells = static_cast<std::size_t>(size.width) * size.height;
  std::vector<std::int64_t> total(cells, 0);

  for (std::size_t start = 0; start < count; start += kMaskChunk) {
    const std::size_t len = std::min(kMaskChunk, count - start);
    std::vector<std::vector<std::int64_t>> grids(len);
    parallel_for(len, [&](std::size_t i) {
      const ImageBuffer r = binarize_and_resize(load(start + i), size.width, size.height);
      auto& g = grids[i];
      g.resize(cells);
      for (std::size_t c = 0; c < cells; ++c) g[c] = kernels::to_fixed(r.pixels[c]);
    });
    for (const auto& g : grids) kernels::omp::accumulate_grid(g, total);
  }

  SpatialHeatmap h;
  h.category = category;
  h.split = split;
  h.width = size.width;
  h.height = size.height;
  h.n_samples = count;
  h.counts.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) h.counts[c] = kernels::from_fixed(total[c]);
  h.normalized = normalize_counts(h.counts);
  return h;
}

}  // namespace

SpatialHeatmap aggregate_mask_images(const std::vector<ImageBuffer>& masks, const std::string& category,
                                     const std::optional<std::string>& split, Size2 size) {
  if (masks.empty()) throw ValidationError("no masks to aggregate for category '" + category + "'");
  return aggregate(masks.size(), [&](std::size_t i) -> const ImageBuffer& { return masks[i]; }, category, split, size);
}

SpatialHeatmap aggregate_masks(const DatasetManifest& manifest, const std::string& category,
                               const std::optional<std::string>& split, Size2 size, const MaskSource& source) {
  std::vector<std::pair<std::string, std::filesystem::path>> selected;
  for (const auto& s : manifest.samples) {
    if (split && s.split != *split) continue;
    if (auto path = find_mask(manifest, s, category, source)) selected.emplace_back(s.id, *path);
  }
  if (selected.empty())
    throw ValidationError("no masks found for category '" + category + "'" +
                          (split ? " in split '" + *split + "'" : std::string()));
  return aggregate(
      selected.size(),
      [&](std::size_t i) {
        try {
          return decode_image(selected[i].second);
        } catch (const IoError& e) {
          throw IoError("sample '" + selected[i].first + "' mask: " + e.what());
        }
      },
      category, split, size);
}

HeatmapComparison compare_heatmaps(const SpatialHeatmap& a, const SpatialHeatmap& b) {
  if (a.width != b.width || a.height != b.height)
    throw ValidationError("heatmap size mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                          " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  const std::size_t n = a.counts.size();
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += a.counts[i];
    sb += b.counts[i];
  }
  if (sa <= 0.0 || sb <= 0.0) throw ValidationError("cannot compare an empty heatmap");

  HeatmapComparison out;
  out.width = a.width;
  out.height = a.height;
  out.difference.resize(n);
  double l1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.difference[i] = a.counts[i] / sa - b.counts[i] / sb;
    l1 += std::abs(out.difference[i]);
  }
  out.l1 = l1;

  const double ma = sa / static_cast<double>(n);
  const double mb = sb / static_cast<double>(n);
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a.counts[i] - ma;
    const double db = b.counts[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  out.correlation = (va > 0.0 && vb > 0.0) ? cov / std::sqrt(va * vb) : std::nan("");
  return out;
}

std::vector<std::string> sample_categories(const SampleRecord& record, const CategoryKey& key) {
  std::set<std::string> cats;
  if (key.source == CategorySource::label) {
    if (record.label && !record.label->empty()) cats.insert(*record.label);
  } else if (auto it = record.metadata.find(key.metadata_key); it != record.metadata.end()) {
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) cats.insert(item.substr(b, e - b + 1));
    }
  }
  return {cats.begin(), cats.end()};
}

CooccurrenceMatrix cooccurrence(const DatasetManifest& manifest, const CategoryKey& key) {
  std::vector<std::vector<std::string>> per_sample;
  std::set<std::string> all;
  for (const auto& s : manifest.samples) {
    auto cats = sample_categories(s, key);
    if (cats.empty()) continue;
    all.insert(cats.begin(), cats.end());
    per_sample.push_back(std::move(cats));
  }
  if (per_sample.empty()) throw ValidationError("no categorized samples for co-occurrence");

  CooccurrenceMatrix m;
  m.categories.assign(all.begin(), all.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.categories.size(); ++i) index[m.categories[i]] = i;
  m.counts.assign(m.categories.size(), std::vector<std::size_t>(m.categories.size(), 0));
  for (const auto& cats : per_sample)
    for (const auto& a : cats)
      for (const auto& b : cats) ++m.counts[index[a]][index[b]];
  return m;
}

}  // namespace dsviz
