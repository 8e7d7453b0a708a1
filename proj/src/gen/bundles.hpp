#pragma once

// Multi-file assets shared by the mock and live backends.

#include "roomforge/gen/asset_store.hpp"

namespace roomforge::gen {

// Stores albedo, a flat normal map and a constant metallic map, then the
// texture-set document that references them.
AssetRecord store_texture_set(AssetStore& store, std::string_view albedo_png, const Json& surface,
                              std::uint8_t metallic, const Json& provenance);

// Stores the panorama, then the motion-playlist document that references it.
AssetRecord store_skybox(AssetStore& store, std::string_view panorama_png, int duration_s,
                         const Json& provenance);

}  // namespace roomforge::gen
