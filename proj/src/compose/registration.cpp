#include "roomforge/compose/registration.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "roomforge/core/error.hpp"
#include "roomforge/geometry/geometry.hpp"

namespace roomforge::compose {

namespace {

// IoU differences below this are treated as ties, so float noise between
// symmetric candidates cannot override the documented tie-break order.
constexpr double kTieEps = 1e-12;

void require_positive(const Vec3& extents, std::string_view what) {
  if (!extents.allFinite() || (extents.array() <= 0).any()) {
    throw InvariantError(fmt::format("{} must be positive and finite", what), std::string(what));
  }
}

}  // namespace

std::string_view to_string(Flip flip) {
  switch (flip) {
    case Flip::none: return "none";
    case Flip::Rx90: return "Rx90";
    case Flip::Ry90: return "Ry90";
    case Flip::Rz90: return "Rz90";
  }
  return "none";
}

std::optional<Flip> parse_flip(std::string_view text) {
  for (auto f : kFlips) {
    if (to_string(f) == text) return f;
  }
  return std::nullopt;
}

double longest_edge_scale(const Vec3& mesh_extents, const OrientedBox& scaffold) {
  require_positive(mesh_extents, "mesh_extents");
  return scaffold.size.maxCoeff() / mesh_extents.maxCoeff();
}

bool detect_flat(const Vec3& extents) { return extents.minCoeff() < kFlatRatio * extents.maxCoeff(); }

Vec3 flip_extents(const Vec3& e, Flip flip) {
  switch (flip) {
    case Flip::none: return e;
    case Flip::Rx90: return {e.x(), e.z(), e.y()};
    case Flip::Ry90: return {e.z(), e.y(), e.x()};
    case Flip::Rz90: return {e.y(), e.x(), e.z()};
  }
  return e;
}

std::vector<double> yaw_grid(double theta_star) {
  std::vector<double> grid;
  grid.reserve(kYawSteps);
  const int half = kYawSteps / 2;
  for (int k = -half; k <= half; ++k) grid.push_back(theta_star + deg_to_rad(k * kYawStepDeg));
  return grid;
}

YawSearch yaw_search(const Vec3& extents, const OrientedBox& scaffold, double theta_star) {
  YawSearch best{theta_star, -1.0};
  for (double yaw : yaw_grid(theta_star)) {
    const double iou = geometry::box_iou({scaffold.center, extents, yaw}, scaffold);
    if (iou > best.iou + kTieEps) best = {yaw, iou};
  }
  return best;
}

FlatSearch flat_orientation_search(const Vec3& extents, const OrientedBox& scaffold, double theta_star) {
  FlatSearch best{Flip::none, theta_star, -1.0};
  const auto grid = yaw_grid(theta_star);
  for (auto flip : kFlips) {
    const Vec3 e = flip_extents(extents, flip);
    for (double yaw : grid) {
      const double iou = geometry::box_iou({scaffold.center, e, yaw}, scaffold);
      if (iou > best.iou + kTieEps) best = {flip, yaw, iou};
    }
  }
  return best;
}

Vec3 refine_axis_scale(const Vec3& extents, const Vec3& scaffold_extents) {
  Vec3 r;
  for (int i = 0; i < 3; ++i) r[i] = std::min(1.0, kGuardFactor * scaffold_extents[i] / extents[i]);
  return r;
}

double align_bottom(double placed_height, const OrientedBox& scaffold) {
  return scaffold.bottom() + placed_height / 2.0;
}

Registration register_object(const Vec3& mesh_extents, const OrientedBox& scaffold, double theta_star) {
  scaffold.validate("scaffold");
  Registration reg;
  reg.isotropic_scale = longest_edge_scale(mesh_extents, scaffold);
  Vec3 e = reg.isotropic_scale * mesh_extents;
  if (detect_flat(mesh_extents)) {
    const auto found = flat_orientation_search(e, scaffold, theta_star);
    reg.flip = found.flip;
    reg.yaw = found.yaw;
    e = flip_extents(e, found.flip);
  } else {
    reg.yaw = yaw_search(e, scaffold, theta_star).yaw;
  }
  const Vec3 r = refine_axis_scale(e, scaffold.size);
  reg.per_axis_scale = reg.isotropic_scale * r;
  reg.extents = e.cwiseProduct(r);
  reg.yaw = scene::normalize_yaw(reg.yaw);
  reg.translation = {scaffold.center.x(), scaffold.center.y(), align_bottom(reg.extents.z(), scaffold)};
  reg.achieved_iou = geometry::box_iou(reg.box(), scaffold);
  return reg;
}

OrientedBox opening_frame_scaffold(const OrientedBox& scaffold, const scene::WallSegment& wall) {
  const Vec3 d = wall.b - wall.a;
  if (std::hypot(d.x(), d.y()) <= 0) throw InvariantError("wall has zero length", wall.id);
  const double wall_yaw = std::atan2(d.y(), d.x());
  // Whichever scaffold axis runs closer to the wall is its width.
  const double delta = scaffold.yaw - wall_yaw;
  const bool along_x = std::abs(std::cos(delta)) >= std::abs(std::sin(delta));
  const Vec3 size = along_x ? scaffold.size : Vec3(scaffold.size.y(), scaffold.size.x(), scaffold.size.z());
  return {scaffold.center, size, scene::normalize_yaw(wall_yaw)};
}

Registration register_opening(const Vec3& mesh_extents, const scene::SceneEntity& opening,
                              const scene::WallSegment& wall, double thickness) {
  if (!(thickness > 0)) throw InvariantError("opening thickness must be positive", "thickness");
  opening.box.validate(opening.id);
  const OrientedBox frame = opening_frame_scaffold(opening.box, wall);
  Registration reg;
  reg.isotropic_scale = longest_edge_scale(mesh_extents, opening.box);
  // The wider horizontal mesh axis runs along the wall.
  reg.flip = mesh_extents.y() > mesh_extents.x() ? Flip::Rz90 : Flip::none;
  const Vec3 flipped = flip_extents(mesh_extents, reg.flip);
  const Vec3 e = reg.isotropic_scale * flipped;
  const Vec3 r = refine_axis_scale(e, frame.size);
  reg.per_axis_scale = reg.isotropic_scale * r;
  reg.per_axis_scale.y() = thickness / flipped.y();
  reg.extents = e.cwiseProduct(r);
  reg.extents.y() = thickness;
  reg.yaw = frame.yaw;
  const double z = opening.kind == scene::EntityKind::door ? std::min(wall.a.z(), wall.b.z()) + reg.extents.z() / 2.0
                                                             : align_bottom(reg.extents.z(), opening.box);
  reg.translation = {opening.box.center.x(), opening.box.center.y(), z};
  reg.achieved_iou = geometry::box_iou(reg.box(), frame);
  return reg;
}

}  // namespace roomforge::compose
