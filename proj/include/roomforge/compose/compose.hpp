#pragma once

// Scene composition: placed objects, wall panels, floor and skybox gathered
// into the manifest that renderers consume.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "roomforge/compose/registration.hpp"
#include "roomforge/core/canonical_json.hpp"
#include "roomforge/gen/asset_store.hpp"
#include "roomforge/scene/scene_model.hpp"

namespace roomforge::compose {

inline constexpr double kWallOffset = 0.05;
inline constexpr double kFloorTileSize = 1.0;
// Wall endpoints closer than this are treated as the same corner.
inline constexpr double kCornerTolerance = 0.1;

struct PlacedObject {
  std::string entity_id;
  scene::EntityKind kind = scene::EntityKind::object;
  std::string asset_id;
  Vec3 translation = Vec3::Zero();
  double yaw = 0.0;
  Flip flip = Flip::none;
  Vec3 per_axis_scale = Vec3::Ones();
  Vec3 extents = Vec3::Ones();
  double achieved_iou = 0.0;
};

struct WallPanel {
  std::string wall_id;
  // Bottom a, bottom b, top b, top a.
  std::array<Vec3, 4> corners;
  Vec3 outward_normal = Vec3::UnitX();
  std::optional<std::string> texture;
};

struct Floor {
  std::vector<Vec3> polygon;  // counter-clockwise seen from above
  bool closed_loop = true;    // false when the convex-hull fallback was used
  double area = 0.0;
  double tile_size = kFloorTileSize;
  std::optional<std::string> texture;
};

struct Skybox {
  std::string asset_id;  // motion playlist document
  std::string panorama;
  int fps = 0;
  std::vector<int> playlist;
};

struct Unplaced {
  std::string entity_id;
  scene::ObjectStatus status = scene::ObjectStatus::pending;
};

struct ComposedScene {
  std::vector<PlacedObject> placed;
  std::vector<WallPanel> wall_panels;
  Floor floor;
  std::optional<Skybox> skybox;
  std::optional<std::string> audio;
  std::vector<Unplaced> unplaced;  // in-scene entities without a finished asset
  std::int64_t source_revision = 0;
};

struct ComposeOptions {
  double opening_thickness = kOpeningThickness;
};

// Ids of in-scene entities in needs-attention, in scene order.
std::vector<std::string> attention_ids(const scene::SceneModel& scene);

// Floor from the closed wall loop, or the convex hull of the wall endpoints
// when the loop is open. Throws DegenerateRoom without enclosed area.
Floor place_floor(const scene::SceneModel& scene, std::optional<std::string> texture = std::nullopt);

// One panel per wall, pushed kWallOffset along the normal pointing away from
// the floor centroid. Throws DegenerateRoom when a wall passes through it.
std::vector<WallPanel> place_walls(const scene::SceneModel& scene, std::optional<std::string> texture = std::nullopt);

// Throws BlockedByAttention, MissingAsset, MissingHostWall, DegenerateRoom.
ComposedScene compose_scene(const scene::SceneModel& scene, const gen::AssetStore& store,
                            const ComposeOptions& options = {});

Json manifest_to_json(const ComposedScene& composed);
// canonical_dump of manifest_to_json.
std::string manifest_text(const ComposedScene& composed);

// Structural check of a manifest document; throws SchemaError naming the path.
void validate_manifest(const Json& manifest);

}  // namespace roomforge::compose
