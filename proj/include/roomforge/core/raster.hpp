#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roomforge {

using Rgba = std::array<std::uint8_t, 4>;

// 8-bit RGBA image, row-major, top-left origin.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, Rgba fill = {0, 0, 0, 0});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  Rgba at(int x, int y) const;
  void set(int x, int y, Rgba color);
  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// PNG codec (libpng simplified API). Decoding always yields RGBA.
Raster decode_png(std::string_view bytes);
std::string encode_png(const Raster& image);
bool png_has_alpha_channel(std::string_view bytes);

// Draws a segment of the given stroke width (pixels); endpoints in pixel
// coordinates, clipped to the raster.
void draw_segment(Raster& image, double x0, double y0, double x1, double y1, double stroke,
                  Rgba color);

// Draws ASCII text with a built-in 5x7 bitmap font; lowercase renders as
// uppercase, unsupported glyphs as blanks. (x, y) is the top-left corner.
void draw_text(Raster& image, int x, int y, std::string_view text, int scale, Rgba color);

}  // namespace roomforge
