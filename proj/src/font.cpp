#include "font.hpp"

#include <array>

namespace dsviz::font {

namespace {

struct Glyph {
  char ch;
  std::array<std::uint8_t, kGlyphHeight> rows;  // low 5 bits, MSB = leftmost
};

constexpr std::array<Glyph, 17> kGlyphs = {{
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
}};

const Glyph* find(char ch) {
  for (const auto& g : kGlyphs)
    if (g.ch == ch) return &g;
  return nullptr;
}

}  // namespace

void draw_text(ImageBuffer& img, int x, int y, std::string_view text, double value) {
  for (char ch : text) {
    if (const Glyph* g = find(ch)) {
      for (int r = 0; r < kGlyphHeight; ++r)
        for (int c = 0; c < kGlyphWidth; ++c) {
          if (!((g->rows[static_cast<std::size_t>(r)] >> (kGlyphWidth - 1 - c)) & 1)) continue;
          const int px = x + c;
          const int py = y + r;
          if (px < 0 || py < 0 || px >= img.width || py >= img.height) continue;
          for (int k = 0; k < img.channels; ++k) img.at(py, px, k) = value;
        }
    }
    x += kAdvance;
  }
}

}  // namespace dsviz::font
