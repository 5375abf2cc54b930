#include "dsviz/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <jpeglib.h>
#include <png.h>
#include <spdlog/sinks/ringbuffer_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dsviz/error.hpp"
#include "dsviz/outputs.hpp"
#include "dsviz/parallel.hpp"
#include "dsviz/report.hpp"

#ifndef DSVIZ_VERSION
#define DSVIZ_VERSION "0.0.0"
#endif

namespace dsviz::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Global {
  std::string manifest;
  std::string out = "dsviz_out";
  std::uint64_t seed = 0;
  int jobs = 0;
};

struct ComponentOpts {
  bool crop = false;
  std::string size = "40x40";
  int top_k = 15;
  int k = 0;
  std::string method = "auto";
  bool force_rgb = false;
  int cell_scale = 4;
  std::string split;
};

struct PatchOpts {
  std::string patch = "11x11";
  std::size_t count = 100000;
  std::size_t chunk = 65536;
  int top_k = 15;
  int k = 0;
  std::string method = "auto";
  bool force_rgb = false;
  int cell_scale = 8;
};

struct IcaOpts {
  int k = 0;
  int pre_pca_k = 0;
  std::string size = "40x40";
  bool crop = false;
  bool force_rgb = false;
  double tol = 1e-4;
  int max_iter = 200;
  int top_k = 15;
  int cell_scale = 4;
  std::string split;
};

struct SpatialOpts {
  std::string category;
  std::string split;
  std::vector<std::string> compare;
  std::string size = "640x640";
  std::string mask_dir;
  std::string colormap = "viridis";
  bool cooccurrence = false;
  std::string category_key = "label";
};

struct AverageOpts {
  std::string group_key = "label";
  std::string size = "64x64";
  bool crop = false;
  bool force_rgb = false;
  std::size_t min_n = 2;
  int cell_scale = 2;
};

struct AblateOpts {
  std::string channel;
  std::string strategy;
};

struct ScoreOpts {
  std::string predictions;
  std::vector<std::string> variants;
};

struct ReportOpts {
  int top_k = 15;
  int cell_scale = 4;
  std::string colormap = "viridis";
};

std::optional<std::string> opt_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

std::string file_token(const std::string& s) {
  std::string out;
  for (unsigned char ch : s) out += (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.') ? static_cast<char>(ch) : '_';
  return out;
}

fs::path make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

DatasetManifest open_manifest(const Global& g, const std::string& command) {
  if (g.manifest.empty()) throw ValidationError(command + ": --manifest is required");
  auto manifest = load_manifest(g.manifest);
  check_paths(manifest);
  return manifest;
}

PcaMethod resolve_method(PcaMethod m, Eigen::Index dims) {
  if (m != PcaMethod::automatic) return m;
  return dims <= kExactDimLimit ? PcaMethod::exact : PcaMethod::randomized;
}

RenderSpec render_spec(int top_k, int cell_scale, Colormap cm = Colormap::viridis) {
  RenderSpec spec{top_k, cell_scale, cm};
  spec.validate();
  return spec;
}

int fit_count(int k, int top_k) {
  if (k == 0) return top_k;
  if (top_k > k) throw ValidationError("--top-k (" + std::to_string(top_k) + ") must not exceed --k (" + std::to_string(k) + ")");
  return k;
}

void write_components(const fs::path& dir, const ComponentBasis& basis, const RenderSpec& spec, json summary) {
  save_basis(basis, dir / "basis.json", summary);
  write_png(dir / "components.png", render_component_grid(basis, spec));
  json j = basis_summary(basis);
  j.update(summary);
  write_json(dir / "summary.json", j);
}

void run_pca(const Global& g, const ComponentOpts& o) {
  const auto manifest = open_manifest(g, "pca");
  const int k = fit_count(o.k, o.top_k);
  const auto spec = render_spec(o.top_k, o.cell_scale);
  const auto method = parse_pca_method(o.method);
  LoadOptions lo{o.crop, parse_size(o.size), o.force_rgb};
  const auto matrix = build_data_matrix(manifest, lo, opt_string(o.split));
  const auto basis = fit_pca(matrix, k, method, g.seed);
  write_components(make_dir(fs::path(g.out) / "pca"), basis, spec,
                   {{"seed", g.seed},
                    {"method", to_string(resolve_method(method, basis.dims()))},
                    {"split", o.split.empty() ? json(nullptr) : json(o.split)},
                    {"crop_bbox", o.crop}});
  std::cout << "pca: " << matrix.rows() << " x " << matrix.dims() << ", PC1 explains "
            << basis.explained_variance_ratio()[0] * 100.0 << "%\n";
}

void run_patch_pca(const Global& g, const PatchOpts& o) {
  const auto manifest = open_manifest(g, "patch-pca");
  const int k = fit_count(o.k, o.top_k);
  const auto spec = render_spec(o.top_k, o.cell_scale);
  if (o.count < 1) throw ValidationError("--count must be >= 1");
  if (o.chunk < 1) throw ValidationError("--chunk must be >= 1");
  const Size2 ps = parse_size(o.patch);
  const PatchSize patch{ps.height, ps.width};
  const auto method = parse_pca_method(o.method);

  PatchSampler sampler(manifest, patch, g.seed, o.force_rgb);
  const auto dims = static_cast<Eigen::Index>(sampler.shape().size());
  const auto used = resolve_method(method, dims);
  ComponentBasis basis;
  if (used == PcaMethod::exact) {
    CovarianceAccumulator acc(dims);
    for (std::size_t done = 0; done < o.count;) {
      const std::size_t take = std::min(o.chunk, o.count - done);
      acc.add(sampler.next(take).data);
      done += take;
    }
    basis = fit_pca_from_covariance(acc.finish(), k, sampler.shape());
  } else {
    basis = fit_pca(sampler.next(o.count), k, PcaMethod::randomized, g.seed);
  }
  write_components(make_dir(fs::path(g.out) / "patch_pca"), basis, spec,
                   {{"seed", g.seed},
                    {"method", to_string(used)},
                    {"patch", {{"height", patch.height}, {"width", patch.width}}},
                    {"count", o.count},
                    {"skipped_images", sampler.skipped_images()}});
  std::cout << "patch-pca: " << o.count << " patches of " << to_string(sampler.shape()) << '\n';
}

void run_ica(const Global& g, const IcaOpts& o) {
  const auto manifest = open_manifest(g, "ica");
  IcaParams params;
  params.k = o.k;
  params.pre_pca_k = o.pre_pca_k;
  params.tol = o.tol;
  params.max_iter = o.max_iter;
  params.seed = g.seed;
  const auto spec = render_spec(std::min(o.top_k, o.k), o.cell_scale);
  LoadOptions lo{o.crop, parse_size(o.size), o.force_rgb};
  const auto matrix = build_data_matrix(manifest, lo, opt_string(o.split));
  const auto result = fit_ica(matrix, params);
  write_components(make_dir(fs::path(g.out) / "ica"), result.basis, spec,
                   {{"seed", g.seed},
                    {"pre_pca_k", o.pre_pca_k},
                    {"converged", result.converged},
                    {"iterations", result.iterations},
                    {"last_change", result.last_change}});
  std::cout << "ica: " << (result.converged ? "converged" : "did not converge") << " after " << result.iterations
            << " iterations\n";
}

void run_spatial(const Global& g, const SpatialOpts& o) {
  const auto manifest = open_manifest(g, "spatial");
  if (o.category.empty() && !o.cooccurrence) throw ValidationError("spatial: give --category and/or --cooccurrence");
  const auto dir = make_dir(fs::path(g.out) / "spatial");
  const Size2 size = parse_size(o.size);
  const auto spec = render_spec(1, 1, parse_colormap(o.colormap));
  MaskSource source;
  if (!o.mask_dir.empty()) source.mask_dir = fs::path(o.mask_dir);

  if (o.cooccurrence) {
    CategoryKey key;
    if (o.category_key != "label") key = {CategorySource::metadata_list, o.category_key};
    const auto m = cooccurrence(manifest, key);
    write_json(dir / "cooccurrence.json",
               {{"categories", m.categories}, {"counts", m.counts}, {"category_key", o.category_key}, {"seed", g.seed}});
  }
  if (o.category.empty()) return;

  const auto stem = [&](const std::optional<std::string>& split) {
    return "heatmap_" + file_token(o.category) + (split ? "_" + file_token(*split) : "");
  };
  if (o.compare.size() == 2) {
    const auto a = aggregate_masks(manifest, o.category, o.compare[0], size, source);
    const auto b = aggregate_masks(manifest, o.category, o.compare[1], size, source);
    save_heatmap(a, spec, dir, stem(o.compare[0]), g.seed);
    save_heatmap(b, spec, dir, stem(o.compare[1]), g.seed);
    const auto cmp = compare_heatmaps(a, b);
    const std::string name =
        "compare_" + file_token(o.category) + "_" + file_token(o.compare[0]) + "_vs_" + file_token(o.compare[1]);
    json j = comparison_summary(cmp, o.compare[0], o.compare[1]);
    j["category"] = o.category;
    j["seed"] = g.seed;
    j["image"] = name + ".png";
    write_png(dir / (name + ".png"), render_difference(cmp));
    write_json(dir / (name + ".json"), j);
    std::cout << "spatial: " << o.category << " " << o.compare[0] << " vs " << o.compare[1] << ": L1 = " << cmp.l1
              << '\n';
  } else {
    const auto split = opt_string(o.split);
    const auto h = aggregate_masks(manifest, o.category, split, size, source);
    save_heatmap(h, spec, dir, stem(split), g.seed);
    std::cout << "spatial: " << h.n_samples << " mask(s) for " << o.category << '\n';
  }
}

void run_average(const Global& g, const AverageOpts& o) {
  const auto manifest = open_manifest(g, "average");
  LoadOptions lo{o.crop, parse_size(o.size), o.force_rgb};
  const auto set = average_images(manifest, o.group_key, lo, o.min_n);
  const auto dir = make_dir(fs::path(g.out) / "average");
  save_averages(set, dir, g.seed);
  write_png(dir / "sheet.png", render_average_sheet(set, o.cell_scale));
  std::cout << "average: " << set.entries.size() << " group(s) by " << o.group_key << '\n';
}

void run_ablate(const Global& g, const AblateOpts& o) {
  const auto manifest = open_manifest(g, "ablate");
  const AblationSpec spec{parse_channel(o.channel), parse_strategy(o.strategy)};
  const auto name = to_string(spec.channel) + "_" + to_string(spec.strategy);
  const auto dir = make_dir(fs::path(g.out) / "ablate" / name);
  const auto emitted = emit_ablated_dataset(manifest, spec, dir);
  write_json(dir / "variant.json", {{"channel", to_string(spec.channel)},
                                    {"strategy", to_string(spec.strategy)},
                                    {"n_images", emitted.samples.size()},
                                    {"manifest", "manifest.jsonl"},
                                    {"seed", g.seed}});
  std::cout << "ablate: " << emitted.samples.size() << " image(s) written to " << dir.string() << '\n';
}

std::pair<AblationSpec, fs::path> parse_variant(const std::string& text) {
  const auto eq = text.find('=');
  const auto slash = text.find('/');
  if (eq == std::string::npos || slash == std::string::npos || slash > eq)
    throw ValidationError("--variant expects CHANNEL/STRATEGY=PATH, got '" + text + "'");
  return {AblationSpec{parse_channel(text.substr(0, slash)), parse_strategy(text.substr(slash + 1, eq - slash - 1))},
          fs::path(text.substr(eq + 1))};
}

void run_score(const Global& g, const ScoreOpts& o) {
  const auto manifest = open_manifest(g, "score");
  const auto dir = make_dir(fs::path(g.out) / "score");
  if (o.variants.empty()) {
    const double acc = score_predictions(manifest, o.predictions);
    std::size_t labeled = 0;
    for (const auto& s : manifest.samples) labeled += s.label.has_value();
    write_json(dir / "score.json", {{"accuracy", acc}, {"n_scored", labeled}, {"seed", g.seed}});
    std::cout << "score: accuracy " << acc << " over " << labeled << " labeled sample(s)\n";
    return;
  }
  std::map<AblationSpec, fs::path> variants;
  for (const auto& v : o.variants) {
    auto [spec, path] = parse_variant(v);
    if (!variants.emplace(spec, path).second)
      throw ValidationError("--variant " + to_string(spec.channel) + "/" + to_string(spec.strategy) + " given twice");
  }
  const auto report = ablation_report(o.predictions, variants, manifest);
  json j = ablation_json(report);
  j["seed"] = g.seed;
  write_json(dir / "ablation.json", j);
  const auto table = report.to_table();
  std::ofstream(dir / "ablation.txt") << table;
  std::cout << table;
}

std::vector<fs::path> sorted_matches(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void run_report(const Global& g, const ReportOpts& o) {
  const fs::path out(g.out);
  const auto spec = render_spec(o.top_k, o.cell_scale, parse_colormap(o.colormap));
  ReportBundle b;
  b.seed = g.seed;

  const auto component = [&](const char* name, const std::vector<const char*>& keys) -> std::optional<ComponentSection> {
    const auto path = out / name / "basis.json";
    if (!fs::exists(path)) return std::nullopt;
    auto section = component_section(load_basis(path), spec);
    const json header = read_json(path);
    for (const char* key : keys)
      if (header.contains(key)) section.summary[key] = header[key];
    return section;
  };
  b.pca = component("pca", {"method"});
  b.patch_pca = component("patch_pca", {"method"});
  b.ica = component("ica", {"converged", "iterations"});

  for (const auto& path : sorted_matches(out / "spatial", "heatmap_", ".json")) {
    const auto h = load_heatmap(path);
    b.heatmaps.push_back({heatmap_summary(h), render_heatmap(h, spec)});
  }
  for (const auto& path : sorted_matches(out / "spatial", "compare_", ".json")) {
    json j = read_json(path);
    const auto image = decode_image(path.parent_path() / j.at("image").get<std::string>());
    j.erase("image");
    j.erase("seed");
    b.comparisons.push_back({j, image});
  }
  if (fs::exists(out / "score" / "ablation.json")) b.ablation = ablation_from_json(read_json(out / "score" / "ablation.json"));
  if (fs::exists(out / "average" / "index.json")) b.averages = load_averages(out / "average" / "index.json");
  if (b.empty())
    throw ValidationError("report: no analysis outputs under " + out.string() + "; run pca, spatial, average, ... first");
  if (!g.manifest.empty()) b.metadata = summarize_metadata(open_manifest(g, "report"));

  render_report(b, out);
  std::cout << "report: " << (out / "report.html").string() << '\n';
}

std::shared_ptr<spdlog::sinks::ringbuffer_sink_mt> install_logger() {
  auto ring = std::make_shared<spdlog::sinks::ringbuffer_sink_mt>(256);
  ring->set_level(spdlog::level::warn);
  ring->set_pattern("%l: %v");
  auto err = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
  err->set_pattern("dsviz: %l: %v");
  auto logger = std::make_shared<spdlog::logger>("dsviz", spdlog::sinks_init_list{err, ring});
  spdlog::set_default_logger(logger);
  return ring;
}

json versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return {{"dsviz", DSVIZ_VERSION},
          {"eigen", eigen.str()},
          {"libpng", PNG_LIBPNG_VER_STRING},
          {"libjpeg", JPEG_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION},
          {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                         std::to_string(SPDLOG_VER_PATCH)},
          {"compiler", __VERSION__}};
}

json option_values(const CLI::App& app) {
  json j = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names[0] == "help" || names[0] == "config") continue;
    if (opt->get_expected_min() == 0) {
      j[names[0]] = opt->count() > 0;
    } else if (!opt->results().empty()) {
      const auto& r = opt->results();
      j[names[0]] = r.size() == 1 ? json(r[0]) : json(r);
    } else {
      j[names[0]] = opt->get_default_str().empty() ? json(nullptr) : json(opt->get_default_str());
    }
  }
  return j;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string scan_out(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--out" || a == "-o") && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--out=", 0) == 0) return a.substr(6);
  }
  return Global{}.out;
}

}  // namespace

int run(int argc, const char* const* argv) {
  const auto ring = install_logger();
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();

  CLI::App app{"Dataset-level visual analysis of image collections"};
  app.name("dsviz");
  app.set_config("--config", "", "INI/TOML file with option values; [section] names match subcommands");
  app.require_subcommand(1);
  Global g;
  app.add_option("--manifest,-m", g.manifest, "JSON-lines dataset manifest");
  app.add_option("--out,-o", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--jobs,-j", g.jobs, "Worker threads (0 = all cores)")
      ->envname("DSVIZ_JOBS")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  ComponentOpts pca;
  auto* pca_cmd = app.add_subcommand("pca", "Whole-image PCA with a component grid");
  pca_cmd->add_flag("--crop-bbox", pca.crop, "Crop to each sample's bbox before resizing");
  pca_cmd->add_option("--size", pca.size, "Resize target WxH")->capture_default_str();
  pca_cmd->add_option("--top-k", pca.top_k, "Components shown in the grid")->capture_default_str();
  pca_cmd->add_option("--k", pca.k, "Components fitted (default: --top-k)");
  pca_cmd->add_option("--method", pca.method, "auto | exact | randomized")->capture_default_str();
  pca_cmd->add_flag("--force-rgb", pca.force_rgb, "Replicate gray images to RGB");
  pca_cmd->add_option("--cell-scale", pca.cell_scale, "Nearest-neighbor upscale of each cell")->capture_default_str();
  pca_cmd->add_option("--split", pca.split, "Use only samples of this split");

  PatchOpts patch;
  auto* patch_cmd = app.add_subcommand("patch-pca", "PCA on randomly sampled image patches");
  patch_cmd->add_option("--patch", patch.patch, "Patch size WxH")->capture_default_str();
  patch_cmd->add_option("--count", patch.count, "Number of patches")->capture_default_str();
  patch_cmd->add_option("--chunk", patch.chunk, "Patches drawn per streaming block")->capture_default_str();
  patch_cmd->add_option("--top-k", patch.top_k, "Components shown in the grid")->capture_default_str();
  patch_cmd->add_option("--k", patch.k, "Components fitted (default: --top-k)");
  patch_cmd->add_option("--method", patch.method, "auto | exact | randomized")->capture_default_str();
  patch_cmd->add_flag("--force-rgb", patch.force_rgb, "Replicate gray images to RGB");
  patch_cmd->add_option("--cell-scale", patch.cell_scale, "Nearest-neighbor upscale of each cell")->capture_default_str();

  IcaOpts ica;
  auto* ica_cmd = app.add_subcommand("ica", "FastICA after PCA reduction");
  ica_cmd->add_option("--k", ica.k, "Independent components")->required();
  ica_cmd->add_option("--pre-pca-k", ica.pre_pca_k, "Dimensions kept by the PCA reduction")->required();
  ica_cmd->add_option("--size", ica.size, "Resize target WxH")->capture_default_str();
  ica_cmd->add_flag("--crop-bbox", ica.crop, "Crop to each sample's bbox before resizing");
  ica_cmd->add_flag("--force-rgb", ica.force_rgb, "Replicate gray images to RGB");
  ica_cmd->add_option("--tol", ica.tol, "Convergence tolerance")->capture_default_str();
  ica_cmd->add_option("--max-iter", ica.max_iter, "Iteration limit")->capture_default_str();
  ica_cmd->add_option("--top-k", ica.top_k, "Components shown in the grid")->capture_default_str();
  ica_cmd->add_option("--cell-scale", ica.cell_scale, "Nearest-neighbor upscale of each cell")->capture_default_str();
  ica_cmd->add_option("--split", ica.split, "Use only samples of this split");

  SpatialOpts spatial;
  auto* spatial_cmd = app.add_subcommand("spatial", "Mask-aggregation heatmaps and category co-occurrence");
  spatial_cmd->add_option("--category", spatial.category, "Object category");
  auto* split_opt = spatial_cmd->add_option("--split", spatial.split, "Use only samples of this split");
  spatial_cmd->add_option("--compare", spatial.compare, "Compare two splits: SPLIT_A SPLIT_B")
      ->expected(2)
      ->excludes(split_opt);
  spatial_cmd->add_option("--size", spatial.size, "Heatmap size WxH")->capture_default_str();
  spatial_cmd->add_option("--mask-dir", spatial.mask_dir, "Directory of <id>_<category>.png masks");
  spatial_cmd->add_option("--colormap", spatial.colormap, "viridis | grayscale")->capture_default_str();
  spatial_cmd->add_flag("--cooccurrence", spatial.cooccurrence, "Write the category co-occurrence matrix");
  spatial_cmd->add_option("--category-key", spatial.category_key,
                          "'label' or a metadata key holding comma-separated categories")
      ->capture_default_str();

  AverageOpts average;
  auto* average_cmd = app.add_subcommand("average", "Per-group average images");
  average_cmd->add_option("--group-key", average.group_key, "'label' or a metadata key")->capture_default_str();
  average_cmd->add_option("--size", average.size, "Resize target WxH")->capture_default_str();
  average_cmd->add_flag("--crop-bbox", average.crop, "Crop to each sample's bbox before resizing");
  average_cmd->add_flag("--force-rgb", average.force_rgb, "Replicate gray images to RGB");
  average_cmd->add_option("--min-n", average.min_n, "Smallest group kept")->capture_default_str();
  average_cmd->add_option("--cell-scale", average.cell_scale, "Upscale in the contact sheet")->capture_default_str();

  AblateOpts ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Write a channel-ablated copy of the dataset");
  ablate_cmd->add_option("--channel", ablate.channel, "red | green | blue")->required();
  ablate_cmd->add_option("--strategy", ablate.strategy, "mean_of_others | gray")->required();

  ScoreOpts score;
  auto* score_cmd = app.add_subcommand("score", "Top-1 accuracy from prediction CSVs");
  score_cmd->add_option("--predictions", score.predictions, "Baseline sample_id,prediction CSV")->required();
  score_cmd->add_option("--variant", score.variants, "Ablated predictions as CHANNEL/STRATEGY=PATH (repeatable)");

  ReportOpts report;
  auto* report_cmd = app.add_subcommand("report", "HTML + JSON report of the outputs under --out");
  report_cmd->add_option("--top-k", report.top_k, "Components shown per grid")->capture_default_str();
  report_cmd->add_option("--cell-scale", report.cell_scale, "Upscale of component cells")->capture_default_str();
  report_cmd->add_option("--colormap", report.colormap, "viridis | grayscale")->capture_default_str();

  int code = kExitOk;
  std::string error;
  std::string command;
  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    code = kExitIo;
    error = e.what();
    g.out = scan_out(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    code = kExitValidation;
    error = e.what();
    g.out = scan_out(argc, argv);
  }

  if (code == kExitOk) {
    command = app.get_subcommands().front()->get_name();
    try {
      set_jobs(g.jobs);
      if (command == "pca") run_pca(g, pca);
      else if (command == "patch-pca") run_patch_pca(g, patch);
      else if (command == "ica") run_ica(g, ica);
      else if (command == "spatial") run_spatial(g, spatial);
      else if (command == "average") run_average(g, average);
      else if (command == "ablate") run_ablate(g, ablate);
      else if (command == "score") run_score(g, score);
      else if (command == "report") run_report(g, report);
    } catch (const ValidationError& e) {
      code = kExitValidation;
      error = e.what();
    } catch (const json::exception& e) {
      code = kExitValidation;
      error = e.what();
    } catch (const IoError& e) {
      code = kExitIo;
      error = e.what();
    } catch (const std::exception& e) {
      code = kExitIo;
      error = e.what();
    }
  }
  if (!error.empty()) std::cerr << "dsviz: error: " << error << '\n';

  json config = {{"global", option_values(app)}};
  if (!command.empty()) config[command] = option_values(*app.get_subcommand(command));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::vector<std::string> args(argv, argv + argc);
  const json record = {{"command", command.empty() ? json(nullptr) : json(command)},
                       {"argv", args},
                       {"config", config},
                       {"seed", g.seed},
                       {"jobs", jobs()},
                       {"versions", versions()},
                       {"timing", {{"started_at", started_at}, {"elapsed_seconds", elapsed}}},
                       {"warnings", ring->last_formatted()},
                       {"exit_code", code},
                       {"error", error.empty() ? json(nullptr) : json(error)}};
  try {
    make_dir(g.out);
    write_json(fs::path(g.out) / "run.json", record);
  } catch (const std::exception& e) {
    std::cerr << "dsviz: error: " << e.what() << '\n';
    if (code == kExitOk) code = kExitIo;
  }
  return code;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace dsviz::cli
