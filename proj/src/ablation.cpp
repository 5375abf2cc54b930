#include "dsviz/ablation.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "dsviz/error.hpp"
#include "dsviz/parallel.hpp"

namespace dsviz {

std::string to_string(Channel c) {
  switch (c) {
    case Channel::red: return "red";
    case Channel::green: return "green";
    case Channel::blue: return "blue";
  }
  return "red";
}

std::string to_string(AblationStrategy s) { return s == AblationStrategy::gray ? "gray" : "mean_of_others"; }

Channel parse_channel(const std::string& text) {
  if (text == "red") return Channel::red;
  if (text == "green") return Channel::green;
  if (text == "blue") return Channel::blue;
  throw ValidationError("unknown channel '" + text + "' (expected red, green or blue)");
}

AblationStrategy parse_strategy(const std::string& text) {
  if (text == "mean_of_others") return AblationStrategy::mean_of_others;
  if (text == "gray") return AblationStrategy::gray;
  throw ValidationError("unknown strategy '" + text + "' (expected mean_of_others or gray)");
}

ImageBuffer ablate_channel(const ImageBuffer& image, const AblationSpec& spec) {
  if (image.channels != 3) throw ValidationError("channel ablation needs a 3-channel image");
  ImageBuffer out = image;
  const int c = static_cast<int>(spec.channel);
  const int o1 = (c + 1) % 3;
  const int o2 = (c + 2) % 3;
  const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < pixels; ++i) {
    const double* px = &image.pixels[3 * i];
    double v;
    if (spec.strategy == AblationStrategy::mean_of_others) {
      v = (px[o1] + px[o2]) / 2.0;
    } else {
      // Mean of all three, anchored on channel c.
      v = px[c] + ((px[o1] - px[c]) + (px[o2] - px[c])) / 3.0;
    }
    out.pixels[3 * i + static_cast<std::size_t>(c)] = v;
  }
  return out;
}

DatasetManifest emit_ablated_dataset(const DatasetManifest& manifest, const AblationSpec& spec,
                                     const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir.string() + ": " + ec.message());

  DatasetManifest out;
  out.root = outdir;
  out.class_names = manifest.class_names;
  out.samples = manifest.samples;
  for (auto& s : out.samples) {
    auto rel = s.image;
    rel.replace_extension(".png");
    if (rel.is_absolute()) rel = rel.relative_path();
    s.image = rel;
    // Masks stay with the source dataset.
    if (s.mask) s.mask = std::filesystem::absolute(manifest.resolve(*s.mask));
  }

  std::vector<char> written(out.samples.size(), 0);
  try {
    parallel_for(out.samples.size(), [&](std::size_t i) {
      const auto& src = manifest.samples[i];
      ImageBuffer img = decode_image(manifest.resolve(src.image));
      if (img.channels != 3) throw ValidationError("sample '" + src.id + "' is not a 3-channel image");
      const auto dst = outdir / out.samples[i].image;
      std::filesystem::create_directories(dst.parent_path());
      write_png(dst, ablate_channel(img, spec));
      written[i] = 1;
    });
  } catch (...) {
    for (std::size_t i = 0; i < written.size(); ++i)
      if (written[i]) std::filesystem::remove(outdir / out.samples[i].image, ec);
    throw;
  }
  write_manifest(out, outdir / "manifest.jsonl");
  return out;
}

std::map<std::string, std::string> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read predictions " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty predictions file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != "sample_id,prediction")
    throw ValidationError(path.string() + ": header must be 'sample_id,prediction'");

  std::map<std::string, std::string> preds;
  std::vector<std::string> duplicates;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError(path.string() + " line " + std::to_string(lineno) + ": expected 'sample_id,prediction'");
    auto id = line.substr(0, comma);
    auto pred = line.substr(comma + 1);
    if (!preds.emplace(id, pred).second) duplicates.push_back(id);
  }
  if (!duplicates.empty()) {
    std::string list;
    for (std::size_t i = 0; i < duplicates.size() && i < 10; ++i) list += (i ? ", " : "") + duplicates[i];
    throw ValidationError(path.string() + ": duplicate sample_id(s): " + list);
  }
  return preds;
}

namespace {

struct Scored {
  double accuracy;
  std::size_t labeled;
  std::set<std::string> predicted_ids;
};

Scored score(const DatasetManifest& manifest, const std::filesystem::path& predictions) {
  const auto preds = read_predictions(predictions);
  std::size_t labeled = 0;
  std::size_t correct = 0;
  std::vector<std::string> missing;
  Scored s{};
  for (const auto& r : manifest.samples) {
    if (!r.label) continue;
    ++labeled;
    auto it = preds.find(r.id);
    if (it == preds.end()) {
      missing.push_back(r.id);
      continue;
    }
    if (it->second == *r.label) ++correct;
  }
  if (labeled == 0) throw ValidationError("manifest has no labeled samples to score");
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) list += (i ? ", " : "") + missing[i];
    throw ValidationError(predictions.string() + ": " + std::to_string(missing.size()) +
                          " labeled sample(s) missing: " + list);
  }
  s.accuracy = static_cast<double>(correct) / static_cast<double>(labeled);
  s.labeled = labeled;
  for (const auto& kv : preds) s.predicted_ids.insert(kv.first);
  return s;
}

}  // namespace

double score_predictions(const DatasetManifest& manifest, const std::filesystem::path& predictions) {
  return score(manifest, predictions).accuracy;
}

std::string AblationReport::to_table() const {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "Baseline top-1: %.2f%%  (n = %zu)\n", 100.0 * baseline_accuracy, n_scored);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-8s  %-22s  %-10s\n", "Channel", "Mean of other channels", "Gray image");
  out << buf;
  for (Channel c : {Channel::red, Channel::green, Channel::blue}) {
    std::string cols[2] = {"-", "-"};
    for (const auto& r : rows)
      if (r.spec.channel == c) {
        std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * r.accuracy);
        cols[r.spec.strategy == AblationStrategy::gray ? 1 : 0] = buf;
      }
    std::snprintf(buf, sizeof buf, "%-8s  %-22s  %-10s\n", to_string(c).c_str(), cols[0].c_str(), cols[1].c_str());
    out << buf;
  }
  return out.str();
}

AblationReport ablation_report(const std::filesystem::path& baseline,
                               const std::map<AblationSpec, std::filesystem::path>& variants,
                               const DatasetManifest& manifest) {
  const Scored base = score(manifest, baseline);
  AblationReport report;
  report.baseline_accuracy = base.accuracy;
  report.n_scored = base.labeled;
  // std::map orders specs by (channel, strategy): red, green, blue.
  for (const auto& [spec, path] : variants) {
    const Scored v = score(manifest, path);
    if (v.predicted_ids != base.predicted_ids)
      throw ValidationError(path.string() + " covers a different set of samples than " + baseline.string());
    report.rows.push_back({spec, v.accuracy});
  }
  return report;
}

}  // namespace dsviz
