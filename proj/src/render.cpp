#include "dsviz/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dsviz/error.hpp"
#include "font.hpp"

namespace dsviz {

void RenderSpec::validate() const {
  if (top_k < 1) throw ValidationError("top_k must be >= 1");
  if (cell_scale < 1) throw ValidationError("cell_scale must be >= 1");
}

ComponentCard render_component_card(const ComponentBasis& basis, int index, const RenderSpec& spec) {
  spec.validate();
  if (index < 1 || index > basis.count())
    throw ValidationError("component index " + std::to_string(index) + " out of range [1, " +
                          std::to_string(basis.count()) + "]");
  const auto row = basis.components.row(index - 1);
  const double peak = row.cwiseAbs().maxCoeff();

  ImageBuffer pos(basis.shape.width, basis.shape.height, basis.shape.channels);
  ImageBuffer neg(basis.shape.width, basis.shape.height, basis.shape.channels);
  if (peak > 0.0) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      const double v = row[j];
      pos.pixels[static_cast<std::size_t>(j)] = std::max(v, 0.0) / peak;
      neg.pixels[static_cast<std::size_t>(j)] = std::max(-v, 0.0) / peak;
    }
  }

  ComponentCard card;
  card.index = index;
  card.pos_image = upscale_nearest(pos, spec.cell_scale);
  card.neg_image = upscale_nearest(neg, spec.cell_scale);
  card.scale = peak > 0.0 ? 1.0 / peak : 0.0;
  const double lead = basis.eigenvalues[0];
  card.bar_fraction = lead > 0.0 ? basis.eigenvalues[index - 1] / lead : 0.0;
  card.ratio = basis.total_variance > 0.0 ? basis.eigenvalues[index - 1] / basis.total_variance : 0.0;
  return card;
}

int GridLayout::bar_length(double fraction) const {
  const int len = static_cast<int>(std::lround(std::clamp(fraction, 0.0, 1.0) * bar_w));
  return fraction > 0.0 ? std::max(len, 1) : 0;
}

GridLayout grid_layout(int top_k, const Shape& shape, int cell_scale) {
  GridLayout g;
  g.cell_w = shape.width * cell_scale;
  g.cell_h = shape.height * cell_scale;
  g.row_h = std::max(g.cell_h, font::kGlyphHeight);
  g.bar_w = 2 * g.cell_w;
  g.caption_h = font::kGlyphHeight;
  g.width = 6 * g.margin + g.label_w + 4 * g.cell_w + g.text_w;
  g.height = g.margin + top_k * (g.row_h + g.margin) + g.caption_h + g.margin;
  return g;
}

void blit(ImageBuffer& dst, const ImageBuffer& src, int x, int y) {
  for (int sy = 0; sy < src.height; ++sy)
    for (int sx = 0; sx < src.width; ++sx) {
      const int dx = x + sx;
      const int dy = y + sy;
      if (dx < 0 || dy < 0 || dx >= dst.width || dy >= dst.height) continue;
      for (int c = 0; c < dst.channels; ++c)
        dst.at(dy, dx, c) = src.at(sy, sx, src.channels == 1 ? 0 : std::min(c, src.channels - 1));
    }
}

namespace {

void fill_rect(ImageBuffer& img, int x, int y, int w, int h, double value) {
  for (int yy = std::max(y, 0); yy < std::min(y + h, img.height); ++yy)
    for (int xx = std::max(x, 0); xx < std::min(x + w, img.width); ++xx)
      for (int c = 0; c < img.channels; ++c) img.at(yy, xx, c) = value;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

}  // namespace

ImageBuffer render_component_grid(const ComponentBasis& basis, const RenderSpec& spec) {
  spec.validate();
  if (spec.top_k > basis.count())
    throw ValidationError("top_k = " + std::to_string(spec.top_k) + " exceeds the " + std::to_string(basis.count()) +
                          " available components");
  const GridLayout g = grid_layout(spec.top_k, basis.shape, spec.cell_scale);
  ImageBuffer sheet(g.width, g.height, 3, 1.0);

  double cumulative = 0.0;
  for (int i = 0; i < spec.top_k; ++i) {
    const ComponentCard card = render_component_card(basis, i + 1, spec);
    const int y = g.row_y(i);
    const int cell_y = y + (g.row_h - g.cell_h) / 2;
    const int text_y = y + (g.row_h - font::kGlyphHeight) / 2;
    font::draw_text(sheet, g.margin, text_y, std::to_string(i + 1), 0.0);
    blit(sheet, card.pos_image, g.pos_x(), cell_y);
    blit(sheet, card.neg_image, g.neg_x(), cell_y);
    const int bar_h = std::max(2, g.row_h / 2);
    fill_rect(sheet, g.bar_x(), y + (g.row_h - bar_h) / 2, g.bar_length(card.bar_fraction), bar_h, 0.5);
    font::draw_text(sheet, g.text_x(), text_y, percent(card.ratio), 0.0);
    cumulative += card.ratio;
  }
  const std::string caption = "1-" + std::to_string(spec.top_k) + ": " + percent(cumulative);
  font::draw_text(sheet, g.margin, g.row_y(spec.top_k), caption, 0.0);
  return sheet;
}

ImageBuffer render_heatmap(const SpatialHeatmap& heatmap, const RenderSpec& spec) {
  const auto& table = colormap_table(spec.colormap);
  ImageBuffer img(heatmap.width, heatmap.height, 3);
  for (std::size_t i = 0; i < heatmap.normalized.size(); ++i) {
    const auto& rgb = table[static_cast<std::size_t>(std::clamp(heatmap.normalized[i], 0, 255))];
    img.pixels[3 * i] = rgb.r / 255.0;
    img.pixels[3 * i + 1] = rgb.g / 255.0;
    img.pixels[3 * i + 2] = rgb.b / 255.0;
  }
  return img;
}

ImageBuffer render_difference(const HeatmapComparison& comparison) {
  ImageBuffer img(comparison.width, comparison.height, 1, 0.5);
  double peak = 0.0;
  for (double d : comparison.difference) peak = std::max(peak, std::abs(d));
  if (peak > 0.0)
    for (std::size_t i = 0; i < comparison.difference.size(); ++i)
      img.pixels[i] = 0.5 + 0.5 * comparison.difference[i] / peak;
  return img;
}

ImageBuffer render_average_sheet(const AverageImageSet& set, int cell_scale) {
  if (set.entries.empty()) throw ValidationError("no average images to render");
  if (cell_scale < 1) throw ValidationError("cell_scale must be >= 1");
  constexpr int m = 4;
  const int w = set.target_size.width * cell_scale;
  const int h = set.target_size.height * cell_scale;
  const int count = static_cast<int>(set.entries.size());
  ImageBuffer sheet(m + count * (w + m), m + h + m, 3, 1.0);
  for (int i = 0; i < count; ++i)
    blit(sheet, upscale_nearest(set.entries[static_cast<std::size_t>(i)].mean, cell_scale), m + i * (w + m), m);
  return sheet;
}

}  // namespace dsviz
