#pragma once

#include <vector>

#include "dsviz/average.hpp"
#include "dsviz/colormap.hpp"
#include "dsviz/components.hpp"
#include "dsviz/image.hpp"
#include "dsviz/spatial.hpp"

namespace dsviz {

struct RenderSpec {
  int top_k = 15;
  int cell_scale = 4;
  Colormap colormap = Colormap::viridis;

  void validate() const;
};

/// One component shown as two images: its positive entries and its negated
/// negative entries, both divided by the component's peak magnitude, so that
/// pos - neg == v / max|v| and the brighter of the two peaks is exactly 1.
struct ComponentCard {
  int index = 0;          // 1-based
  ImageBuffer pos_image;  // basis shape, upscaled by cell_scale
  ImageBuffer neg_image;
  double scale = 0.0;         // 1 / max|v|
  double bar_fraction = 0.0;  // lambda_i / lambda_1
  double ratio = 0.0;         // explained-variance fraction
};

ComponentCard render_component_card(const ComponentBasis& basis, int index, const RenderSpec& spec);

/// Pixel layout of a component grid. With m = 4, label_w = 18, text_w = 36,
/// cell_w = W * scale, cell_h = H * scale, row_h = max(cell_h, 7):
///
///   width  = 6m + label_w + 4 cell_w + text_w
///   height = m + top_k (row_h + m) + 7 + m
///
/// Each row is [index label | pos | neg | bar (max 2 cell_w) | percent]; the
/// bottom strip holds the cumulative explained variance of the shown rows.
struct GridLayout {
  int margin = 4;
  int label_w = 18;
  int text_w = 36;
  int cell_w = 0;
  int cell_h = 0;
  int row_h = 0;
  int bar_w = 0;
  int caption_h = 7;
  int width = 0;
  int height = 0;

  int pos_x() const { return margin + label_w + margin; }
  int neg_x() const { return pos_x() + cell_w + margin; }
  int bar_x() const { return neg_x() + cell_w + margin; }
  int text_x() const { return bar_x() + bar_w + margin; }
  int row_y(int row) const { return margin + row * (row_h + margin); }
  int bar_length(double fraction) const;
};

GridLayout grid_layout(int top_k, const Shape& shape, int cell_scale);

/// RGB sheet of the first top_k components on a white background.
ImageBuffer render_component_grid(const ComponentBasis& basis, const RenderSpec& spec);

/// Normalized grid through the colormap; value v -> table[v].
ImageBuffer render_heatmap(const SpatialHeatmap& heatmap, const RenderSpec& spec);

/// Signed difference grid as gray: 0.5 + 0.5 * d / max|d|.
ImageBuffer render_difference(const HeatmapComparison& comparison);

/// Group means side by side in entry order, separated by margins.
ImageBuffer render_average_sheet(const AverageImageSet& set, int cell_scale);

/// Pastes `src` into `dst` at (x, y); gray sources are replicated into RGB.
void blit(ImageBuffer& dst, const ImageBuffer& src, int x, int y);

}  // namespace dsviz
