#pragma once

// Canonical scene document: walls, scaffolds (oriented boxes) for doors,
// windows and furniture, the object lifecycle, and the strict JSON codec.
//
// Conventions: meters and radians, right-handed, z-up. Yaw is measured about
// +z and normalized to (-pi, pi].

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roomforge/core/canonical_json.hpp"
#include "roomforge/core/linalg.hpp"

namespace roomforge::scene {

double normalize_yaw(double yaw);

struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();  // extents along the box's local x, y, z
  double yaw = 0.0;

  double bottom() const { return center.z() - size.z() / 2.0; }
  double volume() const { return size.prod(); }

  // Throws InvariantError (with `path`) on a nonpositive extent or
  // non-finite value.
  void validate(const std::string& path = "box") const;

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;
};

// Corner order: bottom quad counter-clockwise seen from above, starting at
// local (-x, -y), then the top quad in the same order:
//   0 (-,-,-) 1 (+,-,-) 2 (+,+,-) 3 (-,+,-) 4 (-,-,+) 5 (+,-,+) 6 (+,+,+) 7 (-,+,+)
std::array<Vec3, 8> box_corners(const OrientedBox& box);

// Inverse of box_corners for corner sets in that order.
OrientedBox box_from_corners(const std::array<Vec3, 8>& corners);

enum class EntityKind { wall, door, window, object };
enum class ObjectStatus { pending, generating, complete, needs_attention, confirmed };

std::string_view to_string(EntityKind kind);
std::string_view to_string(ObjectStatus status);
std::optional<EntityKind> parse_entity_kind(std::string_view text);
std::optional<ObjectStatus> parse_object_status(std::string_view text);

inline bool is_architectural(EntityKind kind) { return kind != EntityKind::object; }
// Entities that receive a mapping row and a generated asset.
inline bool is_in_scene(EntityKind kind) { return kind != EntityKind::wall; }

// One row of the transformation table. Column order is fixed.
struct MappingRow {
  std::string object_id;
  std::string label;
  std::string object_function;
  std::string replica;
  std::string replica_function;
  std::string appearance_prompt;
  bool collision_risk = false;

  static constexpr std::array<std::string_view, 7> kColumns = {
      "object_id",        "label",             "object_function", "replica",
      "replica_function", "appearance_prompt", "collision_risk"};

  friend bool operator==(const MappingRow&, const MappingRow&) = default;
};

struct StyleSpec {
  std::string raw_text;
  std::optional<std::string> reference_image;
  std::vector<std::string> keywords;
  bool degraded = false;  // fallback style applied

  friend bool operator==(const StyleSpec&, const StyleSpec&) = default;
};

struct SceneEntity {
  std::string id;
  EntityKind kind = EntityKind::object;
  std::string label;
  OrientedBox box;
  std::optional<std::string> host_wall_id;
  ObjectStatus status = ObjectStatus::pending;
  std::optional<Mat4> best_frame_pose;  // camera-from-SLAM, rigid
  std::optional<double> best_view_yaw;  // world yaw anchor for registration
  std::optional<MappingRow> mapping;
  bool mapping_stale = false;
  std::optional<std::string> asset_id;
  Json extra = Json::object();  // unknown fields, preserved verbatim

  friend bool operator==(const SceneEntity&, const SceneEntity&) = default;
};

struct WallSegment {
  std::string id;
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::UnitX();
  double height = 2.4;
  double thickness = 0.0;
  Json extra = Json::object();

  double length() const { return (b - a).norm(); }
  friend bool operator==(const WallSegment&, const WallSegment&) = default;
};

// Lossless conversions: the box spans (length, thickness, height) with its
// local x along a->b and its bottom face at the wall base.
OrientedBox wall_to_box(const WallSegment& wall);
WallSegment box_to_wall(std::string id, const OrientedBox& box);

struct OriginCalibration {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  friend bool operator==(const OriginCalibration&, const OriginCalibration&) = default;
};

// Scene-level generated assets (boundary textures and skybox).
struct EnvironmentAssets {
  std::optional<std::string> wall_texture;
  std::optional<std::string> floor_texture;
  std::optional<std::string> skybox;
  friend bool operator==(const EnvironmentAssets&, const EnvironmentAssets&) = default;
};

struct SceneModel {
  std::vector<WallSegment> walls;
  std::vector<SceneEntity> entities;
  OriginCalibration origin_calibration;
  std::optional<StyleSpec> style;
  EnvironmentAssets environment;
  std::int64_t revision = 0;
  Json extra = Json::object();

  const SceneEntity* find_entity(std::string_view id) const;
  SceneEntity* find_entity(std::string_view id);
  const WallSegment* find_wall(std::string_view id) const;

  // Checks every cross-field invariant; throws InvariantError.
  void validate() const;

  friend bool operator==(const SceneModel&, const SceneModel&) = default;
};

SceneModel parse_scene(std::string_view document);
std::string serialize_scene(const SceneModel& scene);

Json scene_to_json(const SceneModel& scene);
SceneModel scene_from_json(const Json& doc);

Json entity_to_json(const SceneEntity& entity);
SceneEntity entity_from_json(const Json& doc, const std::string& path);
Json box_to_json(const OrientedBox& box);
OrientedBox box_from_json(const Json& doc, const std::string& path);
Json mapping_to_json(const MappingRow& row);
MappingRow mapping_from_json(const Json& doc, const std::string& path);
Json style_to_json(const StyleSpec& style);
StyleSpec style_from_json(const Json& doc, const std::string& path);

// Rigid check for 4x4 poses: orthonormal rotation block within `tol`,
// det +1, last row (0,0,0,1).
bool is_rigid_transform(const Mat4& pose, double tol);

// Legal lifecycle edges:
//   pending -> generating -> {complete | needs-attention}
//   needs-attention -> confirmed
//   any -> generating (regeneration)
//   generating -> pending (failed or cancelled job)
// Architectural entities never enter needs-attention or confirmed.
bool is_legal_transition(EntityKind kind, ObjectStatus from, ObjectStatus to);

// Returns the entity with its status replaced; throws IllegalTransition.
SceneEntity advance_status(SceneEntity entity, ObjectStatus target);

}  // namespace roomforge::scene
