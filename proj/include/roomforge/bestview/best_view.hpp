#pragma once

// Per-object best-view frame selection over a sampled SLAM camera track.
//
// For every frame, the object's scaffold is mapped world -> SLAM, its eight
// corners are projected, and a corner is dropped when it falls inside another
// object's projected hull while lying deeper than that occluder's nearest
// corner plus a depth margin. Frames are ranked lexicographically by
// (visible corner count up, distance of the corners' mean pixel to the
// image center down, hull area of the visible corners up).

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roomforge/core/raster.hpp"
#include "roomforge/geometry/geometry.hpp"
#include "roomforge/scene/scene_model.hpp"

namespace roomforge::bestview {

using geometry::CameraIntrinsics;
using geometry::CameraPose;
using geometry::Polygon2D;
using geometry::Sim3Transform;

inline constexpr double kDefaultDepthMargin = 0.05;  // SLAM units

struct CameraTrack {
  CameraIntrinsics intrinsics;
  std::vector<CameraPose> poses;  // strictly increasing frame_index
  Sim3Transform sim3;
  std::vector<std::filesystem::path> frame_images;  // parallel to poses; may be empty

  void validate() const;
  std::optional<std::filesystem::path> image_for(int frame_index) const;
};

// Parses the camera track document; relative image paths resolve against
// `base_dir`. Rotations within 1e-4 of orthonormal are projected onto SO(3).
CameraTrack parse_track(std::string_view document, const std::filesystem::path& base_dir = {});
CameraTrack load_track(const std::filesystem::path& path);
Json track_to_json(const CameraTrack& track, const std::filesystem::path& base_dir = {});

struct VisibleCorner {
  int corner_index = 0;
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

class FrameScore {
 public:
  // The -infinity score of a frame where nothing survives.
  static FrameScore none() { return FrameScore{}; }
  FrameScore(int vis_cnt, double center_dist, double vis_area)
      : valid_(true), vis_cnt_(vis_cnt), center_dist_(center_dist), vis_area_(vis_area) {}

  bool valid() const noexcept { return valid_; }
  int vis_cnt() const noexcept { return vis_cnt_; }
  double center_dist() const noexcept { return center_dist_; }
  double vis_area() const noexcept { return vis_area_; }

  friend bool operator==(const FrameScore&, const FrameScore&) = default;

 private:
  FrameScore() = default;
  bool valid_ = false;
  int vis_cnt_ = 0;
  double center_dist_ = 0.0;
  double vis_area_ = 0.0;
};

struct BestViewResult {
  std::string object_id;
  int frame_index = 0;
  CameraPose pose;
  FrameScore score = FrameScore::none();
  Polygon2D annotation;  // hull of the surviving corners, pixels
};

// Projection of one occluder in one frame.
struct OccluderView {
  Polygon2D hull;
  double near_depth = 0.0;
};

std::optional<OccluderView> occluder_view(const scene::OrientedBox& world_box, const CameraPose& pose,
                                          const CameraTrack& track);

std::vector<VisibleCorner> visible_corners(const scene::SceneEntity& object, const CameraPose& frame,
                                           const CameraTrack& track,
                                           std::span<const scene::SceneEntity> occluders,
                                           double depth_margin = kDefaultDepthMargin);

FrameScore score_frame(std::span<const VisibleCorner> survivors, const CameraIntrinsics& k);

// Strict lexicographic comparison; a sentinel never beats anything.
bool lex_better(const FrameScore& a, const FrameScore& b);

// Occluders for `object`: every other door, window and furniture entity.
std::vector<scene::SceneEntity> occluders_for(const scene::SceneEntity& object,
                                              const scene::SceneModel& scene);

// Scores of every frame, in track order.
std::vector<FrameScore> score_all_frames(const scene::SceneEntity& object,
                                         const scene::SceneModel& scene, const CameraTrack& track,
                                         double depth_margin = kDefaultDepthMargin);

// Lowest frame index wins ties. Throws NoVisibleFrame.
BestViewResult select_best_view(const scene::SceneEntity& object, const scene::SceneModel& scene,
                                const CameraTrack& track,
                                double depth_margin = kDefaultDepthMargin);

// World yaw that turns a model's front (its local -y axis) toward the
// camera; nullopt when the camera looks straight up or down.
std::optional<double> camera_facing_yaw(const CameraPose& pose, const Sim3Transform& sim3);

// Writes the selected pose (camera-from-SLAM, 4x4) and the facing yaw into
// the entity.
void apply_best_view(scene::SceneEntity& entity, const BestViewResult& result,
                     const Sim3Transform& sim3);

struct PixelRect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
};
PixelRect bounding_rect(const Polygon2D& polygon);

inline constexpr Rgba kAnnotationGreen = {0, 255, 0, 255};
inline constexpr double kAnnotationStroke = 3.0;

// Copy of `image` with the hull outline stroked in pure green and the label
// drawn above the hull's top vertex.
Raster annotate_frame(const Raster& image, const Polygon2D& annotation, std::string_view label);

// Decoding wrapper: throws ImageDecodeError on undecodable bytes or when the
// image size differs from the intrinsics.
Raster annotate_frame_png(std::string_view png_bytes, const CameraIntrinsics& k,
                          const Polygon2D& annotation, std::string_view label);

// "<dir>/<stem>_<object>_bestview.png" next to the source frame.
std::filesystem::path annotated_frame_path(const std::filesystem::path& frame_image,
                                           std::string_view object_id);

}  // namespace roomforge::bestview
