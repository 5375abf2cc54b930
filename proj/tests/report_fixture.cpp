// Writes report.json for a bundle holding every section.
#include <iostream>

#include "dsviz/outputs.hpp"
#include "dsviz/report.hpp"
#include "support.hpp"

using namespace dsviz;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: report_fixture OUT_DIR\n";
    return 2;
  }
  ComponentBasis b;
  b.shape = {4, 4, 1};
  b.components = testing_support::gaussian_matrix(3, 16, 1);
  b.mean = Eigen::VectorXd::Zero(16);
  b.eigenvalues = Eigen::Vector3d(3, 2, 1);
  b.total_variance = 8.0;
  b.n_samples = 30;
  RenderSpec spec;
  spec.top_k = 3;

  ReportBundle bundle;
  bundle.seed = 42;
  bundle.pca = component_section(b, spec);
  bundle.pca->summary["method"] = "exact";
  bundle.patch_pca = component_section(b, spec);
  b.kind = BasisKind::ica;
  bundle.ica = component_section(b, spec);
  bundle.ica->summary["converged"] = true;
  bundle.ica->summary["iterations"] = 12;

  SpatialHeatmap h1, h2;
  for (auto* h : {&h1, &h2}) {
    h->category = "cat";
    h->width = h->height = 2;
    h->n_samples = 3;
  }
  h1.split = "train";
  h2.split = "val";
  h1.counts = {2, 1, 0, 0};
  h2.counts = {0, 1, 1, 0};
  h1.normalized = normalize_counts(h1.counts);
  h2.normalized = normalize_counts(h2.counts);
  bundle.heatmaps.push_back({heatmap_summary(h1), render_heatmap(h1, spec)});
  bundle.heatmaps.push_back({heatmap_summary(h2), render_heatmap(h2, spec)});
  const auto cmp = compare_heatmaps(h1, h2);
  bundle.comparisons.push_back({comparison_summary(cmp, "train", "val"), render_difference(cmp)});

  AblationReport ab;
  ab.baseline_accuracy = 0.9;
  ab.n_scored = 10;
  ab.rows = {{{Channel::red, AblationStrategy::mean_of_others}, 0.6}, {{Channel::red, AblationStrategy::gray}, 0.7}};
  bundle.ablation = ab;

  AverageImageSet avg;
  avg.group_key = "label";
  avg.target_size = {2, 2};
  avg.entries = {{"a", ImageBuffer(2, 2, 3, 0.5), 4}};
  bundle.averages = avg;

  MetadataSummary meta;
  meta.n_images = 1;
  meta.aspect_ratio.add(1.0);
  meta.megapixels.add(0.3);
  meta.min_width = meta.max_width = 640;
  meta.min_height = meta.max_height = 640;
  bundle.metadata = meta;

  render_report(bundle, argv[1]);
  return 0;
}
