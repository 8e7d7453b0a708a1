#pragma once

// Test-only oracles. These deliberately avoid the library's geometry code
// paths (no polygon clipping, no hull routines) so they can check them.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace oracle {

struct YawBox {
  double cx, cy, cz;
  double sx, sy, sz;
  double yaw;
};

inline bool in_footprint(const YawBox& b, double x, double y) {
  const double dx = x - b.cx;
  const double dy = y - b.cy;
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::abs(lx) <= b.sx / 2 && std::abs(ly) <= b.sy / 2;
}

inline bool in_z(const YawBox& b, double z) { return std::abs(z - b.cz) <= b.sz / 2; }

inline double half_extent_x(const YawBox& b) {
  return (std::abs(std::cos(b.yaw)) * b.sx + std::abs(std::sin(b.yaw)) * b.sy) / 2;
}
inline double half_extent_y(const YawBox& b) {
  return (std::abs(std::sin(b.yaw)) * b.sx + std::abs(std::cos(b.yaw)) * b.sy) / 2;
}

// Voxel-sampled IoU: counts cell-center samples of an n^3 grid spanning the
// union AABB of the two boxes. Membership separates into footprint and
// vertical tests, which is the same count as a plain triple loop.
inline double voxel_iou(const YawBox& a, const YawBox& b, int n = 128) {
  const double x0 = std::min(a.cx - half_extent_x(a), b.cx - half_extent_x(b));
  const double x1 = std::max(a.cx + half_extent_x(a), b.cx + half_extent_x(b));
  const double y0 = std::min(a.cy - half_extent_y(a), b.cy - half_extent_y(b));
  const double y1 = std::max(a.cy + half_extent_y(a), b.cy + half_extent_y(b));
  const double z0 = std::min(a.cz - a.sz / 2, b.cz - b.sz / 2);
  const double z1 = std::max(a.cz + a.sz / 2, b.cz + b.sz / 2);
  std::vector<char> za(n), zb(n);
  for (int k = 0; k < n; ++k) {
    const double z = z0 + (k + 0.5) * (z1 - z0) / n;
    za[k] = in_z(a, z);
    zb[k] = in_z(b, z);
  }
  long long both = 0, either = 0;
  for (int i = 0; i < n; ++i) {
    const double x = x0 + (i + 0.5) * (x1 - x0) / n;
    for (int j = 0; j < n; ++j) {
      const double y = y0 + (j + 0.5) * (y1 - y0) / n;
      const bool fa = in_footprint(a, x, y);
      const bool fb = in_footprint(b, x, y);
      if (!fa && !fb) continue;
      for (int k = 0; k < n; ++k) {
        const bool ia = fa && za[k];
        const bool ib = fb && zb[k];
        both += ia && ib;
        either += ia || ib;
      }
    }
  }
  return either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
}

// Pinhole projection written out longhand.
struct Pixel {
  double u, v, z;
};

inline std::optional<Pixel> project(const std::array<double, 9>& r, const std::array<double, 3>& t,
                                    const std::array<double, 3>& x, double fx, double fy, double cx,
                                    double cy, double w, double h) {
  const double xc = r[0] * x[0] + r[1] * x[1] + r[2] * x[2] + t[0];
  const double yc = r[3] * x[0] + r[4] * x[1] + r[5] * x[2] + t[1];
  const double zc = r[6] * x[0] + r[7] * x[1] + r[8] * x[2] + t[2];
  if (!(zc > 0)) return std::nullopt;
  const double u = fx * xc / zc + cx;
  const double v = fy * yc / zc + cy;
  if (!(u > 0 && u < w && v > 0 && v < h)) return std::nullopt;
  return Pixel{u, v, zc};
}

}  // namespace oracle
