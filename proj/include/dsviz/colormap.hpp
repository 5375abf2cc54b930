#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace dsviz {

struct Rgb8 {
  std::uint8_t r, g, b;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

enum class Colormap { grayscale, viridis };

/// Fixed 256-entry lookup tables. grayscale maps i to (i, i, i).
const std::array<Rgb8, 256>& colormap_table(Colormap map);

Colormap parse_colormap(const std::string& text);
std::string to_string(Colormap map);

}  // namespace dsviz
