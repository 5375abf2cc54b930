#include "dsviz/outputs.hpp"

#include <fstream>

#include "dsviz/error.hpp"

namespace dsviz {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json basis_summary(const ComponentBasis& basis) {
  const Eigen::VectorXd ratio = basis.explained_variance_ratio();
  std::vector<double> eig(basis.eigenvalues.data(), basis.eigenvalues.data() + basis.eigenvalues.size());
  std::vector<double> rat(ratio.data(), ratio.data() + ratio.size());
  std::vector<double> cum(rat.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < rat.size(); ++i) cum[i] = acc += rat[i];
  return {{"kind", to_string(basis.kind)},
          {"shape", {{"height", basis.shape.height}, {"width", basis.shape.width}, {"channels", basis.shape.channels}}},
          {"n_samples", basis.n_samples},
          {"dims", basis.dims()},
          {"k", basis.count()},
          {"total_variance", basis.total_variance},
          {"eigenvalues", eig},
          {"explained_variance_ratio", rat},
          {"cumulative_ratio", cum}};
}

json heatmap_summary(const SpatialHeatmap& h) {
  return {{"category", h.category},
          {"split", h.split ? json(*h.split) : json(nullptr)},
          {"width", h.width},
          {"height", h.height},
          {"n_samples", h.n_samples},
          {"max_count", h.max_count()}};
}

void save_heatmap(const SpatialHeatmap& h, const RenderSpec& spec, const std::filesystem::path& dir,
                  const std::string& stem, std::uint64_t seed) {
  write_png(dir / (stem + ".png"), render_heatmap(h, spec));
  {
    std::ofstream bin(dir / (stem + ".bin"), std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot write " + (dir / (stem + ".bin")).string());
    bin.write(reinterpret_cast<const char*>(h.counts.data()),
              static_cast<std::streamsize>(h.counts.size() * sizeof(double)));
    if (!bin) throw IoError("write failed for " + (dir / (stem + ".bin")).string());
  }
  json j = heatmap_summary(h);
  j["seed"] = seed;
  j["colormap"] = to_string(spec.colormap);
  j["image"] = stem + ".png";
  j["counts_file"] = stem + ".bin";
  write_json(dir / (stem + ".json"), j);
}

SpatialHeatmap load_heatmap(const std::filesystem::path& json_path) {
  const json j = read_json(json_path);
  SpatialHeatmap h;
  h.category = j.at("category").get<std::string>();
  if (!j.at("split").is_null()) h.split = j.at("split").get<std::string>();
  h.width = j.at("width").get<int>();
  h.height = j.at("height").get<int>();
  h.n_samples = j.at("n_samples").get<std::size_t>();
  const auto bin_path = json_path.parent_path() / j.at("counts_file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot read " + bin_path.string());
  h.counts.resize(static_cast<std::size_t>(h.width) * h.height);
  bin.read(reinterpret_cast<char*>(h.counts.data()), static_cast<std::streamsize>(h.counts.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(h.counts.size() * sizeof(double)))
    throw IoError(bin_path.string() + " is truncated");
  h.normalized = normalize_counts(h.counts);
  return h;
}

json comparison_summary(const HeatmapComparison& cmp, const std::string& a, const std::string& b) {
  return {{"a", a},
          {"b", b},
          {"l1", cmp.l1},
          {"correlation", std::isnan(cmp.correlation) ? json(nullptr) : json(cmp.correlation)}};
}

json ablation_json(const AblationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"channel", to_string(r.spec.channel)},
                    {"strategy", to_string(r.spec.strategy)},
                    {"accuracy", r.accuracy}});
  return {{"baseline", report.baseline_accuracy}, {"rows", rows}, {"n_scored", report.n_scored}};
}

AblationReport ablation_from_json(const json& j) {
  AblationReport r;
  r.baseline_accuracy = j.at("baseline").get<double>();
  r.n_scored = j.at("n_scored").get<std::size_t>();
  for (const auto& row : j.at("rows"))
    r.rows.push_back({AblationSpec{parse_channel(row.at("channel").get<std::string>()),
                                   parse_strategy(row.at("strategy").get<std::string>())},
                      row.at("accuracy").get<double>()});
  return r;
}

void save_averages(const AverageImageSet& set, const std::filesystem::path& dir, std::uint64_t seed) {
  json entries = json::array();
  for (const auto& e : set.entries) {
    const auto name = average_file_name(set.group_key, e);
    write_png(dir / name, e.mean);
    entries.push_back({{"group_value", e.group_value}, {"n", e.n}, {"image", name}});
  }
  write_json(dir / "index.json", {{"group_key", set.group_key},
                                  {"target_size", {{"width", set.target_size.width}, {"height", set.target_size.height}}},
                                  {"skipped_missing_key", set.skipped_missing_key},
                                  {"omitted_groups", set.omitted_groups},
                                  {"seed", seed},
                                  {"entries", entries}});
}

AverageImageSet load_averages(const std::filesystem::path& index_path) {
  const json j = read_json(index_path);
  AverageImageSet set;
  set.group_key = j.at("group_key").get<std::string>();
  set.target_size = {j.at("target_size").at("width").get<int>(), j.at("target_size").at("height").get<int>()};
  set.skipped_missing_key = j.value("skipped_missing_key", std::size_t{0});
  set.omitted_groups = j.value("omitted_groups", std::vector<std::string>{});
  for (const auto& e : j.at("entries"))
    set.entries.push_back({e.at("group_value").get<std::string>(),
                           decode_image(index_path.parent_path() / e.at("image").get<std::string>()),
                           e.at("n").get<std::size_t>()});
  return set;
}

}  // namespace dsviz
