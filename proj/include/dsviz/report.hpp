#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsviz/ablation.hpp"
#include "dsviz/average.hpp"
#include "dsviz/components.hpp"
#include "dsviz/image.hpp"
#include "dsviz/manifest.hpp"
#include "dsviz/render.hpp"
#include "dsviz/spatial.hpp"

namespace dsviz {

/// Histogram with fixed interior edges e_0 < ... < e_{m-1}: bin 0 is
/// (-inf, e_0), bin i is [e_{i-1}, e_i), bin m is [e_{m-1}, inf).
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;

  explicit Histogram(std::vector<double> edges);
  void add(double v);
  nlohmann::json to_json() const;
};

/// Aspect ratio (width / height) and resolution (megapixels) of every image,
/// read from file headers only.
struct MetadataSummary {
  std::size_t n_images = 0;
  Histogram aspect_ratio{{0.5, 0.75, 0.9, 1.1, 1.34, 1.5, 2.0}};
  Histogram megapixels{{0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0}};
  int min_width = 0, max_width = 0, min_height = 0, max_height = 0;

  nlohmann::json to_json() const;
};

MetadataSummary summarize_metadata(const DatasetManifest& manifest);

struct ComponentSection {
  nlohmann::json summary;  // basis_summary plus any extra fields
  ImageBuffer grid;
};

struct ImageSection {
  nlohmann::json summary;
  ImageBuffer image;
};

struct ReportBundle {
  std::uint64_t seed = 0;
  std::optional<ComponentSection> pca;
  std::optional<ComponentSection> patch_pca;
  std::optional<ComponentSection> ica;
  std::vector<ImageSection> heatmaps;
  std::vector<ImageSection> comparisons;
  std::optional<AblationReport> ablation;
  std::optional<AverageImageSet> averages;
  std::optional<MetadataSummary> metadata;

  /// True when no analysis output is present (metadata alone does not count).
  bool empty() const;
};

ComponentSection component_section(const ComponentBasis& basis, const RenderSpec& spec);

nlohmann::json report_json(const ReportBundle& bundle);
std::string report_html(const ReportBundle& bundle);

/// Writes `report.html` (images embedded as base64 PNG) and `report.json`
/// into `out_dir`.
void render_report(const ReportBundle& bundle, const std::filesystem::path& out_dir);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace dsviz
