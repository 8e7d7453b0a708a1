#pragma once

// Registration of generated meshes into their scaffolds: isotropic
// longest-edge scaling, yaw (and, for flat meshes, axis-flip) search by IoU,
// the per-axis guard and bottom-face grounding.
//
// A placed mesh is rendered as
//   world = T(translation) * Rz(yaw) * diag(per_axis_scale) * R_flip * mesh
// where `mesh` is in its own z-up frame, centered on its bounding box.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roomforge/core/linalg.hpp"
#include "roomforge/scene/scene_model.hpp"

namespace roomforge::compose {

using scene::OrientedBox;

inline constexpr double kGuardFactor = 1.3;
inline constexpr double kFlatRatio = 0.15;
inline constexpr double kYawWindowDeg = 45.0;
inline constexpr double kYawStepDeg = 5.0;
inline constexpr int kYawSteps = 19;  // window / step on each side, plus the center
inline constexpr double kOpeningThickness = 0.05;

enum class Flip { none, Rx90, Ry90, Rz90 };
inline constexpr Flip kFlips[] = {Flip::none, Flip::Rx90, Flip::Ry90, Flip::Rz90};

std::string_view to_string(Flip flip);
std::optional<Flip> parse_flip(std::string_view text);

// s such that s * max(mesh_extents) == max(scaffold.size).
double longest_edge_scale(const Vec3& mesh_extents, const OrientedBox& scaffold);

bool detect_flat(const Vec3& extents);

// A 90 degree turn about one axis swaps the other two extents.
Vec3 flip_extents(const Vec3& extents, Flip flip);

// theta_star - 45deg ... theta_star + 45deg in 5deg steps, ascending.
std::vector<double> yaw_grid(double theta_star);

struct YawSearch {
  double yaw = 0.0;
  double iou = 0.0;
};

// Candidate boxes share the scaffold center. Ties keep the lowest angle.
YawSearch yaw_search(const Vec3& extents, const OrientedBox& scaffold, double theta_star);

struct FlatSearch {
  Flip flip = Flip::none;
  double yaw = 0.0;
  double iou = 0.0;
};

// Joint flip x yaw search; ties keep the earlier flip (none, Rx90, Ry90,
// Rz90), then the lowest angle.
FlatSearch flat_orientation_search(const Vec3& extents, const OrientedBox& scaffold, double theta_star);

// min(1, 1.3 * scaffold / extent) per axis; never enlarges.
Vec3 refine_axis_scale(const Vec3& extents, const Vec3& scaffold_extents);

// Center height that puts the bottom face of a box `placed_height` tall on
// the scaffold's bottom face.
double align_bottom(double placed_height, const OrientedBox& scaffold);

struct Registration {
  double isotropic_scale = 1.0;
  Flip flip = Flip::none;
  double yaw = 0.0;
  Vec3 per_axis_scale = Vec3::Ones();  // applied to the flipped mesh extents
  Vec3 extents = Vec3::Ones();         // final extents in the placed box's axes
  Vec3 translation = Vec3::Zero();
  double achieved_iou = 0.0;

  OrientedBox box() const { return {translation, extents, yaw}; }
};

// General objects: scale, orient (flip search when flat), guard, ground.
Registration register_object(const Vec3& mesh_extents, const OrientedBox& scaffold, double theta_star);

// Doors and windows: wall-aligned yaw, thickness forced to `thickness`,
// in-plane guard against the scaffold. Doors stand on the wall base; windows
// keep the scaffold bottom.
Registration register_opening(const Vec3& mesh_extents, const scene::SceneEntity& opening,
                              const scene::WallSegment& wall, double thickness = kOpeningThickness);

// The scaffold re-expressed in the wall frame: (along wall, across, height).
OrientedBox opening_frame_scaffold(const OrientedBox& scaffold, const scene::WallSegment& wall);

}  // namespace roomforge::compose
