#include "bundles.hpp"

#include "roomforge/gen/media.hpp"

namespace roomforge::gen {

AssetRecord store_texture_set(AssetStore& store, std::string_view albedo_png, const Json& surface,
                              std::uint8_t metallic, const Json& provenance) {
  const auto albedo = store.put(AssetKind::image, albedo_png, ".png", provenance);
  const auto normal = store.put(AssetKind::image, encode_png(flat_normal_map()), ".png", provenance);
  const auto metal = store.put(AssetKind::image, encode_png(constant_map(metallic)), ".png", provenance);
  const Json set{{"albedo", albedo.asset_id},
                 {"normal", normal.asset_id},
                 {"metallic", metal.asset_id},
                 {"surface", surface}};
  return store.put(AssetKind::texture_set, canonical_dump(set), ".json", provenance);
}

AssetRecord store_skybox(AssetStore& store, std::string_view panorama_png, int duration_s,
                         const Json& provenance) {
  const auto pano = store.put(AssetKind::panorama, panorama_png, ".png", provenance);
  const int frames = std::max(1, duration_s * kSkyboxFps);
  const Json playlist{{"panorama", pano.asset_id},
                      {"fps", kSkyboxFps},
                      {"duration_s", duration_s},
                      {"frame_count", frames},
                      {"playlist", loop_playlist(frames)}};
  return store.put(AssetKind::motion_playlist, canonical_dump(playlist), ".json", provenance);
}

}  // namespace roomforge::gen
