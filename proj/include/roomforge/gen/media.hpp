#pragma once

// Media helpers shared by the mock and live backends.

#include <string>
#include <string_view>
#include <vector>

#include "roomforge/core/linalg.hpp"
#include "roomforge/core/raster.hpp"

namespace roomforge::gen {

// Forward-reverse loop without repeating the end frames: N=3 -> [0,1,2,1].
// Played cyclically it has period 2N-2 (1 for N=1).
std::vector<int> loop_playlist(int frame_count);

inline constexpr int kSkyboxFps = 24;
inline constexpr int kSkyboxDurationS = 10;
inline constexpr int kSkyboxFrames = kSkyboxFps * kSkyboxDurationS;

// Binary glTF box of the given z-up extents (x, y, z), centered at the origin.
// glTF is y-up, so positions are written as (x, z, -y). 8 vertices, 12 triangles.
std::string write_box_glb(const Vec3& extents);

struct GlbSummary {
  Vec3 extents = Vec3::Zero();  // z-up
  std::size_t triangles = 0;
  std::size_t vertices = 0;
};

// Reads the POSITION bounds and index count of the first mesh primitive.
// Throws ValidationError on anything that is not a well-formed GLB.
GlbSummary read_glb(std::string_view bytes);

// Albedo texture whose last row/column repeat the first, so it tiles.
Raster tileable_texture(const Rgba& a, const Rgba& b, int size = 256, int cells = 5);
// Flat tangent-space normal map (128, 128, 255).
Raster flat_normal_map(int size = 256);
Raster constant_map(std::uint8_t value, int size = 256);

// 2:1 equirectangular gradient; horizontally periodic.
Raster gradient_panorama(const Rgba& zenith, const Rgba& horizon, double phase, int width = 512);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);  // throws ValidationError

}  // namespace roomforge::gen
