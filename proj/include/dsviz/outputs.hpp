#pragma once

// On-disk forms of analysis results, shared by the CLI and the report.

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dsviz/ablation.hpp"
#include "dsviz/average.hpp"
#include "dsviz/components.hpp"
#include "dsviz/render.hpp"
#include "dsviz/spatial.hpp"

namespace dsviz {

/// Eigenvalues, ratios and cumulative ratios of a basis.
nlohmann::json basis_summary(const ComponentBasis& basis);

/// `<stem>.png` (colormapped), `<stem>.json` (category, split, n_samples,
/// max_count, size) and `<stem>.bin` (counts, little-endian float64).
void save_heatmap(const SpatialHeatmap& heatmap, const RenderSpec& spec, const std::filesystem::path& dir,
                  const std::string& stem, std::uint64_t seed);
SpatialHeatmap load_heatmap(const std::filesystem::path& json_path);
nlohmann::json heatmap_summary(const SpatialHeatmap& heatmap);

nlohmann::json comparison_summary(const HeatmapComparison& cmp, const std::string& a, const std::string& b);

/// Keys: baseline, rows[{channel, strategy, accuracy}], n_scored.
nlohmann::json ablation_json(const AblationReport& report);
AblationReport ablation_from_json(const nlohmann::json& j);

/// One PNG per group plus `index.json`.
void save_averages(const AverageImageSet& set, const std::filesystem::path& dir, std::uint64_t seed);
AverageImageSet load_averages(const std::filesystem::path& index_path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace dsviz
