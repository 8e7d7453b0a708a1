#include "roomforge/bestview/best_view.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "roomforge/core/error.hpp"

namespace roomforge::bestview {

using scene::EntityKind;
using scene::SceneEntity;

namespace {

Mat3 nearest_rotation(const Mat3& m, const std::string& path) {
  if (!m.allFinite()) throw InvariantError("rotation has non-finite entries", path);
  if (((m.transpose() * m) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-4 || m.determinant() <= 0) {
    throw InvariantError("rotation is not orthonormal", path);
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

const Json& field(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(fmt::format("missing field '{}'", key), fmt::format("{}.{}", path, key));
  }
  return *it;
}

double number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError("expected a number", path);
  return v.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> numbers(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != N) throw SchemaError(fmt::format("expected {} numbers", N), path);
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = number(v[i], fmt::format("{}[{}]", path, i));
  return out;
}

Mat3 row_major(const Eigen::Matrix<double, 9, 1>& v) {
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = v[i];
  return m;
}

Json row_major_json(const Mat3& m) {
  Json out = Json::array();
  for (int i = 0; i < 9; ++i) out.push_back(m(i / 3, i % 3));
  return out;
}

}  // namespace

void CameraTrack::validate() const {
  intrinsics.validate();
  sim3.validate();
  if (poses.empty()) throw InvariantError("camera track has no frames", "frames");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto path = fmt::format("frames[{}]", i);
    if (poses[i].frame_index < 0) throw InvariantError("frame index must be >= 0", path + ".index");
    if (i > 0 && poses[i].frame_index <= poses[i - 1].frame_index) {
      throw InvariantError("frame indices must be strictly increasing", path + ".index");
    }
    const Mat3& r = poses[i].rotation;
    if (((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
      throw InvariantError("R_cw must be orthonormal", path + ".R_cw");
    }
  }
  if (!frame_images.empty() && frame_images.size() != poses.size()) {
    throw InvariantError("frame image list must parallel the poses", "frames");
  }
}

std::optional<std::filesystem::path> CameraTrack::image_for(int frame_index) const {
  for (std::size_t i = 0; i < poses.size() && i < frame_images.size(); ++i) {
    if (poses[i].frame_index == frame_index && !frame_images[i].empty()) return frame_images[i];
  }
  return std::nullopt;
}

CameraTrack parse_track(std::string_view document, const std::filesystem::path& base_dir) {
  const Json doc = parse_json(document, "camera track");
  CameraTrack track;
  const Json& k = field(doc, "intrinsics", "$");
  track.intrinsics.fx = number(field(k, "fx", "intrinsics"), "intrinsics.fx");
  track.intrinsics.fy = number(field(k, "fy", "intrinsics"), "intrinsics.fy");
  track.intrinsics.cx = number(field(k, "cx", "intrinsics"), "intrinsics.cx");
  track.intrinsics.cy = number(field(k, "cy", "intrinsics"), "intrinsics.cy");
  const Json& w = field(k, "W", "intrinsics");
  const Json& h = field(k, "H", "intrinsics");
  if (!w.is_number_integer() || !h.is_number_integer()) {
    throw SchemaError("image size must be integral", "intrinsics");
  }
  track.intrinsics.width = w.get<int>();
  track.intrinsics.height = h.get<int>();

  const Json& s = field(doc, "sim3", "$");
  track.sim3.rotation = nearest_rotation(row_major(numbers<9>(field(s, "R", "sim3"), "sim3.R")), "sim3.R");
  track.sim3.translation = numbers<3>(field(s, "t", "sim3"), "sim3.t");
  track.sim3.scale = number(field(s, "s", "sim3"), "sim3.s");

  const Json& frames = field(doc, "frames", "$");
  if (!frames.is_array()) throw SchemaError("expected an array", "frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto path = fmt::format("frames[{}]", i);
    const Json& f = frames[i];
    CameraPose pose;
    const Json& idx = field(f, "index", path);
    if (!idx.is_number_integer()) throw SchemaError("expected an integer", path + ".index");
    pose.frame_index = idx.get<int>();
    pose.rotation = nearest_rotation(row_major(numbers<9>(field(f, "R_cw", path), path + ".R_cw")),
                                     path + ".R_cw");
    pose.translation = numbers<3>(field(f, "t_cw", path), path + ".t_cw");
    track.poses.push_back(pose);
    std::filesystem::path image;
    if (auto it = f.find("image"); it != f.end() && it->is_string()) {
      image = it->get<std::string>();
      if (image.is_relative() && !base_dir.empty()) image = base_dir / image;
    }
    track.frame_images.push_back(image);
  }
  track.validate();
  return track;
}

CameraTrack load_track(const std::filesystem::path& path) {
  return parse_track(read_file(path), path.parent_path());
}

Json track_to_json(const CameraTrack& track, const std::filesystem::path& base_dir) {
  Json frames = Json::array();
  for (std::size_t i = 0; i < track.poses.size(); ++i) {
    const auto& p = track.poses[i];
    Json f{{"index", p.frame_index},
           {"R_cw", row_major_json(p.rotation)},
           {"t_cw", {p.translation.x(), p.translation.y(), p.translation.z()}}};
    if (i < track.frame_images.size() && !track.frame_images[i].empty()) {
      auto image = track.frame_images[i];
      if (!base_dir.empty()) image = std::filesystem::relative(image, base_dir);
      f["image"] = image.generic_string();
    }
    frames.push_back(std::move(f));
  }
  const auto& k = track.intrinsics;
  const auto& t = track.sim3.translation;
  return Json{{"intrinsics",
               {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"W", k.width}, {"H", k.height}}},
              {"sim3", {{"R", row_major_json(track.sim3.rotation)}, {"t", {t.x(), t.y(), t.z()}},
                        {"s", track.sim3.scale}}},
              {"frames", std::move(frames)}};
}

std::optional<OccluderView> occluder_view(const scene::OrientedBox& world_box, const CameraPose& pose,
                                          const CameraTrack& track) {
  const auto slam_box = geometry::world_to_slam_box(world_box, track.sim3);
  const auto& k = track.intrinsics;
  std::vector<Vec2> pixels;
  double near = std::numeric_limits<double>::infinity();
  for (const auto& corner : scene::box_corners(slam_box)) {
    const Vec3 xc = pose.to_camera(corner);
    if (!(xc.z() > 0.0)) continue;
    near = std::min(near, xc.z());
    pixels.emplace_back(k.fx * xc.x() / xc.z() + k.cx, k.fy * xc.y() / xc.z() + k.cy);
  }
  if (pixels.empty()) return std::nullopt;
  return OccluderView{geometry::convex_hull(pixels), near};
}

namespace {

std::vector<VisibleCorner> visible_corners_with(const SceneEntity& object, const CameraPose& frame,
                                                const CameraTrack& track,
                                                std::span<const OccluderView> views,
                                                double depth_margin) {
  const auto slam_box = geometry::world_to_slam_box(object.box, track.sim3);
  const auto corners = scene::box_corners(slam_box);
  std::vector<VisibleCorner> out;
  for (int k = 0; k < 8; ++k) {
    const auto proj = geometry::project_point(corners[k], frame, track.intrinsics);
    if (!proj) continue;
    const Vec2 pixel(proj->u, proj->v);
    bool occluded = false;
    for (const auto& view : views) {
      if (view.near_depth + depth_margin < proj->depth && geometry::point_in_polygon(pixel, view.hull)) {
        occluded = true;
        break;
      }
    }
    if (!occluded) out.push_back({k, proj->u, proj->v, proj->depth});
  }
  return out;
}

std::vector<OccluderView> views_for(std::span<const SceneEntity> occluders, const CameraPose& frame,
                                    const CameraTrack& track) {
  std::vector<OccluderView> views;
  for (const auto& occ : occluders) {
    if (auto v = occluder_view(occ.box, frame, track)) views.push_back(std::move(*v));
  }
  return views;
}

}  // namespace

std::vector<VisibleCorner> visible_corners(const SceneEntity& object, const CameraPose& frame,
                                           const CameraTrack& track,
                                           std::span<const SceneEntity> occluders, double depth_margin) {
  const auto views = views_for(occluders, frame, track);
  return visible_corners_with(object, frame, track, views, depth_margin);
}

FrameScore score_frame(std::span<const VisibleCorner> survivors, const CameraIntrinsics& k) {
  if (survivors.empty()) return FrameScore::none();
  Vec2 mean = Vec2::Zero();
  std::vector<Vec2> pixels;
  pixels.reserve(survivors.size());
  for (const auto& c : survivors) {
    pixels.emplace_back(c.u, c.v);
    mean += pixels.back();
  }
  mean /= static_cast<double>(survivors.size());
  const double dist = (mean - Vec2(k.width / 2.0, k.height / 2.0)).norm();
  const double area = geometry::polygon_area(geometry::convex_hull(pixels));
  return FrameScore(static_cast<int>(survivors.size()), dist, area);
}

bool lex_better(const FrameScore& a, const FrameScore& b) {
  if (!a.valid()) return false;
  if (!b.valid()) return true;
  if (a.vis_cnt() != b.vis_cnt()) return a.vis_cnt() > b.vis_cnt();
  if (a.center_dist() != b.center_dist()) return a.center_dist() < b.center_dist();
  return a.vis_area() > b.vis_area();
}

std::vector<SceneEntity> occluders_for(const SceneEntity& object, const scene::SceneModel& scene) {
  std::vector<SceneEntity> out;
  for (const auto& e : scene.entities) {
    if (e.id != object.id && e.kind != EntityKind::wall) out.push_back(e);
  }
  return out;
}

std::vector<FrameScore> score_all_frames(const SceneEntity& object, const scene::SceneModel& scene,
                                         const CameraTrack& track, double depth_margin) {
  const auto occluders = occluders_for(object, scene);
  std::vector<FrameScore> scores;
  scores.reserve(track.poses.size());
  for (const auto& pose : track.poses) {
    const auto views = views_for(occluders, pose, track);
    const auto survivors = visible_corners_with(object, pose, track, views, depth_margin);
    scores.push_back(score_frame(survivors, track.intrinsics));
  }
  return scores;
}

BestViewResult select_best_view(const SceneEntity& object, const scene::SceneModel& scene,
                                const CameraTrack& track, double depth_margin) {
  if (object.kind == EntityKind::wall) {
    throw InvariantError("best-view selection applies to objects, doors and windows", object.id);
  }
  if (track.poses.empty()) throw InvariantError("camera track has no frames", "frames");
  const auto occluders = occluders_for(object, scene);
  BestViewResult best;
  best.object_id = object.id;
  std::vector<VisibleCorner> best_survivors;
  for (const auto& pose : track.poses) {
    const auto views = views_for(occluders, pose, track);
    auto survivors = visible_corners_with(object, pose, track, views, depth_margin);
    const auto score = score_frame(survivors, track.intrinsics);
    if (lex_better(score, best.score)) {
      best.score = score;
      best.frame_index = pose.frame_index;
      best.pose = pose;
      best_survivors = std::move(survivors);
    }
  }
  if (!best.score.valid()) {
    throw NoVisibleFrame(fmt::format("object '{}' is not visible in any frame", object.id), object.id);
  }
  std::vector<Vec2> pixels;
  for (const auto& c : best_survivors) pixels.emplace_back(c.u, c.v);
  best.annotation = geometry::convex_hull(pixels);
  return best;
}

std::optional<double> camera_facing_yaw(const CameraPose& pose, const Sim3Transform& sim3) {
  const Vec3 forward_world = sim3.rotation * (pose.rotation.transpose() * Vec3::UnitZ());
  if (forward_world.head<2>().norm() < 1e-9) return std::nullopt;
  return scene::normalize_yaw(std::atan2(-forward_world.x(), forward_world.y()));
}

void apply_best_view(SceneEntity& entity, const BestViewResult& result, const Sim3Transform& sim3) {
  entity.best_frame_pose = result.pose.matrix();
  entity.best_view_yaw = camera_facing_yaw(result.pose, sim3);
}

PixelRect bounding_rect(const Polygon2D& polygon) {
  PixelRect r;
  if (polygon.vertices.empty()) return r;
  r.min = r.max = polygon.vertices.front();
  for (const auto& v : polygon.vertices) {
    r.min = r.min.cwiseMin(v);
    r.max = r.max.cwiseMax(v);
  }
  return r;
}

Raster annotate_frame(const Raster& image, const Polygon2D& annotation, std::string_view label) {
  Raster out = image;
  const auto& v = annotation.vertices;
  if (v.empty()) return out;
  if (v.size() == 1) {
    draw_segment(out, v[0].x(), v[0].y(), v[0].x(), v[0].y(), kAnnotationStroke, kAnnotationGreen);
  } else if (v.size() == 2) {
    draw_segment(out, v[0].x(), v[0].y(), v[1].x(), v[1].y(), kAnnotationStroke, kAnnotationGreen);
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % v.size()];
      draw_segment(out, a.x(), a.y(), b.x(), b.y(), kAnnotationStroke, kAnnotationGreen);
    }
  }
  const auto top = *std::min_element(v.begin(), v.end(),
                                     [](const Vec2& a, const Vec2& b) { return a.y() < b.y(); });
  constexpr int kScale = 2;
  const int text_h = 7 * kScale;
  const int text_w = static_cast<int>(label.size()) * 6 * kScale;
  int x = static_cast<int>(std::lround(top.x())) - text_w / 2;
  int y = static_cast<int>(std::lround(top.y())) - text_h - 4;
  x = std::clamp(x, 0, std::max(0, out.width() - text_w));
  if (y < 0) y = static_cast<int>(std::lround(top.y())) + 4;
  draw_text(out, x, y, label, kScale, kAnnotationGreen);
  return out;
}

Raster annotate_frame_png(std::string_view png_bytes, const CameraIntrinsics& k,
                          const Polygon2D& annotation, std::string_view label) {
  Raster image = decode_png(png_bytes);
  if (image.width() != k.width || image.height() != k.height) {
    throw ImageDecodeError(fmt::format("frame is {}x{}, intrinsics expect {}x{}", image.width(),
                                       image.height(), k.width, k.height));
  }
  return annotate_frame(image, annotation, label);
}

std::filesystem::path annotated_frame_path(const std::filesystem::path& frame_image,
                                           std::string_view object_id) {
  auto name = fmt::format("{}_{}_bestview.png", frame_image.stem().string(), object_id);
  return frame_image.parent_path() / name;
}

}  // namespace roomforge::bestview
