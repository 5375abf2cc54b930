#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dsviz/image.hpp"
#include "dsviz/manifest.hpp"

namespace dsviz {

enum class Channel { red = 0, green = 1, blue = 2 };
enum class AblationStrategy { mean_of_others, gray };

struct AblationSpec {
  Channel channel = Channel::red;
  AblationStrategy strategy = AblationStrategy::mean_of_others;

  friend auto operator<=>(const AblationSpec&, const AblationSpec&) = default;
};

std::string to_string(Channel c);
std::string to_string(AblationStrategy s);
Channel parse_channel(const std::string& text);
AblationStrategy parse_strategy(const std::string& text);

/// mean_of_others: channel <- mean of the two other channels.
/// gray: channel <- mean of all three original channels.
ImageBuffer ablate_channel(const ImageBuffer& image, const AblationSpec& spec);

/// Writes every image, ablated, as PNG under `outdir` (mirroring relative
/// paths) and a `manifest.jsonl` next to them. The manifest is written only
/// after all images succeed; on failure the written images are removed.
DatasetManifest emit_ablated_dataset(const DatasetManifest& manifest, const AblationSpec& spec,
                                     const std::filesystem::path& outdir);

/// sample_id -> prediction from a `sample_id,prediction` CSV.
std::map<std::string, std::string> read_predictions(const std::filesystem::path& path);

/// Top-1 accuracy over labeled samples. Every labeled sample must appear
/// exactly once; offenders (up to 10) are listed in the error.
double score_predictions(const DatasetManifest& manifest, const std::filesystem::path& predictions);

struct AblationRow {
  AblationSpec spec;
  double accuracy = 0.0;
};

struct AblationReport {
  double baseline_accuracy = 0.0;
  std::vector<AblationRow> rows;  // red, green, blue; mean_of_others before gray
  std::size_t n_scored = 0;

  /// Aligned text table: one row per channel, one column per strategy.
  std::string to_table() const;
};

AblationReport ablation_report(const std::filesystem::path& baseline,
                               const std::map<AblationSpec, std::filesystem::path>& variants,
                               const DatasetManifest& manifest);

}  // namespace dsviz
