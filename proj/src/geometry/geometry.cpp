#include "roomforge/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "roomforge/core/error.hpp"

namespace roomforge::geometry {

void Sim3Transform::validate() const {
  if (!rotation.allFinite() || !translation.allFinite() || !std::isfinite(scale)) {
    throw InvariantError("sim3 has non-finite values", "sim3");
  }
  if (!(scale > 0.0)) throw InvariantError("sim3 scale must be positive", "sim3.s");
  if (((rotation.transpose() * rotation) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      rotation.determinant() < 0.0) {
    throw InvariantError("sim3 rotation must be orthonormal with det +1", "sim3.R");
  }
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvariantError("focal lengths must be positive", "intrinsics");
  if (width <= 0 || height <= 0) throw InvariantError("image size must be positive", "intrinsics");
}

Mat4 CameraPose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

namespace {

double heading_of(const Vec3& dir) { return std::atan2(dir.y(), dir.x()); }

}  // namespace

OrientedBox world_to_slam_box(const OrientedBox& box, const Sim3Transform& t) {
  OrientedBox out;
  out.center = t.world_to_slam(box.center);
  out.size = box.size / t.scale;
  const Vec3 ex_world = rot_z(box.yaw) * Vec3::UnitX();
  out.yaw = scene::normalize_yaw(heading_of(t.rotation.transpose() * ex_world));
  return out;
}

OrientedBox slam_to_world_box(const OrientedBox& box, const Sim3Transform& t) {
  OrientedBox out;
  out.center = t.slam_to_world(box.center);
  out.size = box.size * t.scale;
  const Vec3 ex_slam = rot_z(box.yaw) * Vec3::UnitX();
  out.yaw = scene::normalize_yaw(heading_of(t.rotation * ex_slam));
  return out;
}

std::optional<Projection> project_camera_point(const Vec3& x, const CameraIntrinsics& k) {
  const double z = x.z();
  if (!(z > 0.0)) return std::nullopt;
  const double u = k.fx * x.x() / z + k.cx;
  const double v = k.fy * x.y() / z + k.cy;
  if (!(u > 0.0 && u < k.width && v > 0.0 && v < k.height)) return std::nullopt;
  return Projection{u, v, z};
}

std::optional<Projection> project_point(const Vec3& x_slam, const CameraPose& pose,
                                        const CameraIntrinsics& k) {
  return project_camera_point(pose.to_camera(x_slam), k);
}

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

Polygon2D convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());
  if (pts.size() <= 2) return Polygon2D{pts};

  // Andrew's monotone chain; `<= 0` drops collinear points.
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return Polygon2D{std::move(hull)};
}

double signed_area(const Polygon2D& p) {
  const auto& v = p.vertices;
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return twice / 2.0;
}

double polygon_area(const Polygon2D& p) { return std::abs(signed_area(p)); }

Vec2 polygon_centroid(const Polygon2D& p) {
  const auto& v = p.vertices;
  const double a = signed_area(p);
  if (v.empty()) return Vec2::Zero();
  if (std::abs(a) < 1e-15) {
    Vec2 mean = Vec2::Zero();
    for (const auto& q : v) mean += q;
    return mean / static_cast<double>(v.size());
  }
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const auto& p0 = v[i];
    const auto& p1 = v[(i + 1) % n];
    const double w = p0.x() * p1.y() - p1.x() * p0.y();
    c += (p0 + p1) * w;
  }
  return c / (6.0 * a);
}

namespace {

bool on_segment(const Vec2& q, const Vec2& a, const Vec2& b, double eps) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (q - a).norm() <= eps;
  const double t = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return (a + t * ab - q).norm() <= eps;
}

}  // namespace

bool point_in_polygon(const Vec2& q, const Polygon2D& polygon) {
  const auto& v = polygon.vertices;
  if (v.empty()) return false;
  double scale = 1.0;
  for (const auto& p : v) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-9 * scale;
  if (v.size() == 1) return (q - v[0]).norm() <= eps;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    if (on_segment(q, v[i], v[(i + 1) % n], eps)) return true;
  }
  if (v.size() == 2) return false;
  // Even-odd ray cast for interior points.
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const auto& a = v[i];
    const auto& b = v[j];
    if ((a.y() > q.y()) != (b.y() > q.y())) {
      const double x = a.x() + (q.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (q.x() < x) inside = !inside;
    }
  }
  return inside;
}

Polygon2D footprint_polygon(const OrientedBox& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hx = box.size.x() / 2.0;
  const double hy = box.size.y() / 2.0;
  static constexpr double kSigns[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  Polygon2D out;
  out.vertices.reserve(4);
  for (const auto& sg : kSigns) {
    const double lx = sg[0] * hx;
    const double ly = sg[1] * hy;
    out.vertices.emplace_back(box.center.x() + c * lx - s * ly, box.center.y() + s * lx + c * ly);
  }
  return out;
}

Polygon2D clip_convex(const Polygon2D& subject, const Polygon2D& clip) {
  std::vector<Vec2> output = subject.vertices;
  const auto& c = clip.vertices;
  if (c.size() < 3) return Polygon2D{};
  for (std::size_t i = 0, n = c.size(); i < n && !output.empty(); ++i) {
    const Vec2& e0 = c[i];
    const Vec2& e1 = c[(i + 1) % n];
    auto side = [&](const Vec2& p) { return cross(e0, e1, p); };
    std::vector<Vec2> input;
    input.swap(output);
    for (std::size_t j = 0, m = input.size(); j < m; ++j) {
      const Vec2& cur = input[j];
      const Vec2& prev = input[(j + m - 1) % m];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        output.push_back(cur);
      } else if (sp >= 0.0) {
        output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return Polygon2D{std::move(output)};
}

double intersection_volume(const OrientedBox& a, const OrientedBox& b) {
  const double lo = std::max(a.bottom(), b.bottom());
  const double hi = std::min(a.center.z() + a.size.z() / 2.0, b.center.z() + b.size.z() / 2.0);
  if (hi <= lo) return 0.0;
  // Quick reject on bounding circles.
  const double ra = a.size.head<2>().norm() / 2.0;
  const double rb = b.size.head<2>().norm() / 2.0;
  if ((a.center.head<2>() - b.center.head<2>()).norm() > ra + rb) return 0.0;
  const double area = polygon_area(clip_convex(footprint_polygon(a), footprint_polygon(b)));
  return area * (hi - lo);
}

double box_iou(const OrientedBox& a, const OrientedBox& b) {
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace roomforge::geometry
