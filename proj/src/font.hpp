#pragma once

// Minimal 5x7 bitmap font: digits and ".%-: PC". Unknown characters advance
// without drawing.

#include <string_view>

#include "dsviz/image.hpp"

namespace dsviz::font {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kAdvance = 6;

void draw_text(ImageBuffer& img, int x, int y, std::string_view text, double value);

}  // namespace dsviz::font
