#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsviz/image.hpp"

namespace dsviz {

/// One line of a JSONL manifest.
///
/// Field names on disk: `id`, `image`, `split`, `label`, `bbox` ([x, y, w, h]),
/// `mask`, `metadata` (string -> string object).
struct SampleRecord {
  std::string id;
  std::filesystem::path image;
  std::string split;
  std::optional<std::string> label;
  std::optional<BBox> bbox;
  std::optional<std::filesystem::path> mask;
  std::map<std::string, std::string> metadata;

  /// Metadata lookup that also answers the pseudo-key "label".
  std::optional<std::string> group_value(const std::string& key) const;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<SampleRecord> samples;
  std::optional<std::vector<std::string>> class_names;

  std::filesystem::path resolve(const std::filesystem::path& relative) const { return root / relative; }
  const SampleRecord* find(const std::string& id) const;
};

/// Parses a JSONL manifest. `root` becomes the manifest's directory. A line
/// holding only `{"class_names": [...]}` sets the class list. Blank lines are
/// skipped. Throws IoError if unreadable, ValidationError (with line number)
/// for malformed records, bad bboxes, empty metadata keys, or duplicate ids.
DatasetManifest load_manifest(const std::filesystem::path& path);

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& root);

/// Writes records as JSONL; paths are written relative to the manifest root.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Checks every image path resolves; throws IoError naming the first missing id.
void check_paths(const DatasetManifest& manifest);

}  // namespace dsviz
