#pragma once

// 3D/2D math shared by best-view selection and registration: Sim(3)
// world<->SLAM mapping, pinhole projection, convex hulls, convex polygon
// clipping and volumetric IoU of yaw-oriented, z-up boxes.

#include <optional>
#include <span>
#include <vector>

#include "roomforge/core/linalg.hpp"
#include "roomforge/scene/scene_model.hpp"

namespace roomforge::geometry {

using scene::OrientedBox;

// World <- SLAM similarity: X_world = scale * rotation * X_slam + translation.
struct Sim3Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  void validate() const;
  Vec3 slam_to_world(const Vec3& x) const { return scale * (rotation * x) + translation; }
  Vec3 world_to_slam(const Vec3& x) const {
    return rotation.transpose() * (x - translation) / scale;
  }
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void validate() const;
};

// Camera-from-SLAM extrinsics of one sampled frame: X_cam = R * X_slam + t.
struct CameraPose {
  int frame_index = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& x_slam) const { return rotation * x_slam + translation; }
  Mat4 matrix() const;
};

// Ordered vertices, counter-clockwise. One or two vertices describe a
// degenerate (zero-area) point or segment.
struct Polygon2D {
  std::vector<Vec2> vertices;
  std::size_t size() const { return vertices.size(); }
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

// Maps a world-frame scaffold into SLAM coordinates. The yaw mapping projects
// the rotated heading onto the SLAM xy-plane, so it is exactly invertible
// when the alignment rotation is gravity-preserving (rotation about z).
OrientedBox world_to_slam_box(const OrientedBox& box, const Sim3Transform& t);
OrientedBox slam_to_world_box(const OrientedBox& box, const Sim3Transform& t);

// Pinhole projection; std::nullopt unless z > 0, 0 < u < W and 0 < v < H.
std::optional<Projection> project_camera_point(const Vec3& x_cam, const CameraIntrinsics& k);
std::optional<Projection> project_point(const Vec3& x_slam, const CameraPose& pose,
                                        const CameraIntrinsics& k);

Polygon2D convex_hull(std::span<const Vec2> points);
double polygon_area(const Polygon2D& polygon);
double signed_area(const Polygon2D& polygon);
Vec2 polygon_centroid(const Polygon2D& polygon);

// Boundary-inclusive containment test for simple polygons (convex or not);
// degenerate polygons contain exactly their points / segment.
bool point_in_polygon(const Vec2& q, const Polygon2D& polygon);

Polygon2D footprint_polygon(const OrientedBox& box);

// Sutherland-Hodgman clip of `subject` against the convex, counter-clockwise
// polygon `clip`.
Polygon2D clip_convex(const Polygon2D& subject, const Polygon2D& clip);

double intersection_volume(const OrientedBox& a, const OrientedBox& b);

// Volumetric IoU of two z-up yaw boxes: footprint intersection area times
// vertical overlap, over the union volume.
double box_iou(const OrientedBox& a, const OrientedBox& b);

}  // namespace roomforge::geometry
