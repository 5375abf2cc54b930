#include "dsviz/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "dsviz/error.hpp"
#include "dsviz/outputs.hpp"
#include "dsviz/parallel.hpp"

namespace dsviz {

using nlohmann::json;

Histogram::Histogram(std::vector<double> e) : edges(std::move(e)), counts(edges.size() + 1, 0) {}

void Histogram::add(double v) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  ++counts[static_cast<std::size_t>(it - edges.begin())];
}

json Histogram::to_json() const { return {{"edges", edges}, {"counts", counts}}; }

json MetadataSummary::to_json() const {
  return {{"n_images", n_images},
          {"aspect_ratio", aspect_ratio.to_json()},
          {"megapixels", megapixels.to_json()},
          {"width", {{"min", min_width}, {"max", max_width}}},
          {"height", {{"min", min_height}, {"max", max_height}}}};
}

MetadataSummary summarize_metadata(const DatasetManifest& manifest) {
  std::vector<ImageInfo> infos(manifest.samples.size());
  parallel_for(infos.size(), [&](std::size_t i) { infos[i] = read_image_info(manifest.resolve(manifest.samples[i].image)); });
  MetadataSummary s;
  s.n_images = infos.size();
  for (std::size_t i = 0; i < infos.size(); ++i) {
    const auto& info = infos[i];
    s.aspect_ratio.add(static_cast<double>(info.width) / info.height);
    s.megapixels.add(static_cast<double>(info.width) * info.height / 1e6);
    if (i == 0) {
      s.min_width = s.max_width = info.width;
      s.min_height = s.max_height = info.height;
    }
    s.min_width = std::min(s.min_width, info.width);
    s.max_width = std::max(s.max_width, info.width);
    s.min_height = std::min(s.min_height, info.height);
    s.max_height = std::max(s.max_height, info.height);
  }
  return s;
}

bool ReportBundle::empty() const {
  return !pca && !patch_pca && !ica && heatmaps.empty() && comparisons.empty() && !ablation && !averages;
}

ComponentSection component_section(const ComponentBasis& basis, const RenderSpec& spec) {
  RenderSpec s = spec;
  s.top_k = std::min<int>(s.top_k, static_cast<int>(basis.count()));
  return {basis_summary(basis), render_component_grid(basis, s)};
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::vector<std::uint8_t>::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

json report_json(const ReportBundle& b) {
  if (b.empty()) throw ValidationError("report needs at least one analysis output");
  json j = {{"format", "dsviz-report"}, {"version", 1}, {"seed", b.seed}};
  if (b.pca) j["pca"] = b.pca->summary;
  if (b.patch_pca) j["patch_pca"] = b.patch_pca->summary;
  if (b.ica) j["ica"] = b.ica->summary;
  if (!b.heatmaps.empty()) {
    j["heatmaps"] = json::array();
    for (const auto& h : b.heatmaps) j["heatmaps"].push_back(h.summary);
  }
  if (!b.comparisons.empty()) {
    j["comparisons"] = json::array();
    for (const auto& c : b.comparisons) j["comparisons"].push_back(c.summary);
  }
  if (b.ablation) j["ablation"] = ablation_json(*b.ablation);
  if (b.averages) {
    json entries = json::array();
    for (const auto& e : b.averages->entries) entries.push_back({{"group_value", e.group_value}, {"n", e.n}});
    j["averages"] = {{"group_key", b.averages->group_key}, {"entries", entries}};
  }
  if (b.metadata) j["metadata"] = b.metadata->to_json();
  return j;
}

namespace {

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string img_tag(const ImageBuffer& img) {
  return "<img style=\"image-rendering:pixelated\" src=\"data:image/png;base64," + base64_encode(encode_png(img)) + "\">";
}

std::string pre(const json& j) { return "<pre>" + escape(j.dump(2)) + "</pre>\n"; }

void component_html(std::ostringstream& out, const char* title, const ComponentSection& s) {
  out << "<section><h2>" << title << "</h2>\n" << img_tag(s.grid) << '\n' << pre(s.summary) << "</section>\n";
}

}  // namespace

std::string report_html(const ReportBundle& b) {
  const json j = report_json(b);
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>dsviz report</title>\n"
         "<style>body{font-family:sans-serif;margin:2em}pre{background:#f4f4f4;padding:.5em}"
         "img{margin:.25em;border:1px solid #ccc}table{border-collapse:collapse}"
         "td,th{border:1px solid #ccc;padding:.25em .75em}</style></head><body>\n"
      << "<h1>Dataset report</h1>\n<p>seed " << b.seed << "</p>\n";
  if (b.pca) component_html(out, "Principal components", *b.pca);
  if (b.patch_pca) component_html(out, "Patch principal components", *b.patch_pca);
  if (b.ica) component_html(out, "Independent components", *b.ica);
  if (!b.heatmaps.empty()) {
    out << "<section><h2>Spatial heatmaps</h2>\n";
    for (const auto& h : b.heatmaps)
      out << "<figure>" << img_tag(h.image) << "<figcaption>" << escape(h.summary.dump()) << "</figcaption></figure>\n";
    out << "</section>\n";
  }
  if (!b.comparisons.empty()) {
    out << "<section><h2>Heatmap comparisons</h2>\n";
    for (const auto& c : b.comparisons)
      out << "<figure>" << img_tag(c.image) << "<figcaption>" << escape(c.summary.dump()) << "</figcaption></figure>\n";
    out << "</section>\n";
  }
  if (b.ablation) {
    out << "<section><h2>Channel ablation</h2>\n<pre>" << escape(b.ablation->to_table()) << "</pre>\n</section>\n";
  }
  if (b.averages) {
    out << "<section><h2>Average images by " << escape(b.averages->group_key) << "</h2>\n";
    for (const auto& e : b.averages->entries)
      out << "<figure>" << img_tag(upscale_nearest(e.mean, 4)) << "<figcaption>" << escape(e.group_value)
          << " (n=" << e.n << ")</figcaption></figure>\n";
    out << "</section>\n";
  }
  if (b.metadata) out << "<section><h2>Image metadata</h2>\n" << pre(j["metadata"]) << "</section>\n";
  out << "</body></html>\n";
  return out.str();
}

void render_report(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
  const json j = report_json(bundle);
  const std::string html = report_html(bundle);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::ofstream out(out_dir / "report.html", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (out_dir / "report.html").string());
  out << html;
  if (!out) throw IoError("write failed for " + (out_dir / "report.html").string());
  write_json(out_dir / "report.json", j);
}

}  // namespace dsviz
