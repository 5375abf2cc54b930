#include "dsviz/manifest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "dsviz/error.hpp"

namespace dsviz {

using nlohmann::json;

std::optional<std::string> SampleRecord::group_value(const std::string& key) const {
  if (key == "label") return label;
  if (auto it = metadata.find(key); it != metadata.end()) return it->second;
  return std::nullopt;
}

const SampleRecord* DatasetManifest::find(const std::string& id) const {
  for (const auto& s : samples)
    if (s.id == id) return &s;
  return nullptr;
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ValidationError("manifest line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) fail(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

SampleRecord parse_record(const json& obj, std::size_t line) {
  SampleRecord r;
  r.id = require_string(obj, "id", line);
  if (r.id.empty()) fail(line, "empty id");
  r.image = require_string(obj, "image", line);
  r.split = require_string(obj, "split", line);
  r.label = optional_string(obj, "label", line);
  if (auto m = optional_string(obj, "mask", line)) r.mask = *m;

  if (auto it = obj.find("bbox"); it != obj.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 4) fail(line, "bbox must be a 4-element array [x, y, w, h]");
    int v[4];
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& e = (*it)[i];
      if (!e.is_number_integer()) fail(line, "bbox entries must be integers");
      v[i] = e.get<int>();
    }
    const BBox b{v[0], v[1], v[2], v[3]};
    if (b.x < 0 || b.y < 0) fail(line, "bbox for '" + r.id + "' has negative origin");
    if (b.w < 1 || b.h < 1) fail(line, "bbox for '" + r.id + "' needs w >= 1 and h >= 1");
    r.bbox = b;
  }

  if (auto it = obj.find("metadata"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) fail(line, "metadata must be an object");
    for (const auto& [k, v] : it->items()) {
      if (k.empty()) fail(line, "metadata keys must be non-empty");
      r.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return r;
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& root) {
  DatasetManifest m;
  m.root = root;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(lineno, std::string("invalid JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) fail(lineno, "record must be a JSON object");
    if (!obj.contains("id") && obj.contains("class_names")) {
      const auto& names = obj["class_names"];
      if (!names.is_array()) fail(lineno, "class_names must be an array");
      std::vector<std::string> list;
      for (const auto& n : names) {
        if (!n.is_string()) fail(lineno, "class_names entries must be strings");
        list.push_back(n.get<std::string>());
      }
      m.class_names = std::move(list);
      continue;
    }
    auto rec = parse_record(obj, lineno);
    if (!seen.insert(rec.id).second) fail(lineno, "duplicate id '" + rec.id + "'");
    m.samples.push_back(std::move(rec));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading manifest " + path.string());
  auto root = path.parent_path();
  if (root.empty()) root = ".";
  return parse_manifest(buf.str(), root);
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  if (manifest.class_names) out << json{{"class_names", *manifest.class_names}}.dump() << '\n';
  for (const auto& s : manifest.samples) {
    json obj = {{"id", s.id}, {"image", s.image.generic_string()}, {"split", s.split}};
    if (s.label) obj["label"] = *s.label;
    if (s.bbox) obj["bbox"] = {s.bbox->x, s.bbox->y, s.bbox->w, s.bbox->h};
    if (s.mask) obj["mask"] = s.mask->generic_string();
    if (!s.metadata.empty()) obj["metadata"] = s.metadata;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void check_paths(const DatasetManifest& manifest) {
  for (const auto& s : manifest.samples)
    if (!std::filesystem::exists(manifest.resolve(s.image)))
      throw IoError("sample '" + s.id + "': image not found at " + manifest.resolve(s.image).string());
}

}  // namespace dsviz
