#include "roomforge/compose/compose.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "roomforge/core/error.hpp"
#include "roomforge/geometry/geometry.hpp"

namespace roomforge::compose {

namespace {

using scene::EntityKind;
using scene::ObjectStatus;
using scene::SceneModel;

Vec2 xy(const Vec3& v) { return {v.x(), v.y()}; }

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Proper crossings only; shared endpoints of adjacent edges are excluded by
// the caller.
bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross2(q2 - q1, p1 - q1);
  const double d2 = cross2(q2 - q1, p2 - q1);
  const double d3 = cross2(p2 - p1, q1 - p1);
  const double d4 = cross2(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

bool is_simple(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

// Chains walls end to start. Returns the corner sequence when every wall is
// used and the chain closes on itself.
std::optional<std::vector<Vec2>> wall_loop(const std::vector<scene::WallSegment>& walls) {
  if (walls.size() < 3) return std::nullopt;
  std::vector<bool> used(walls.size(), false);
  std::vector<Vec2> corners{xy(walls[0].a)};
  Vec2 cur = xy(walls[0].b);
  used[0] = true;
  for (std::size_t step = 1; step < walls.size(); ++step) {
    std::optional<std::size_t> best;
    bool reversed = false;
    double best_d = kCornerTolerance;
    for (std::size_t i = 0; i < walls.size(); ++i) {
      if (used[i]) continue;
      const double da = (xy(walls[i].a) - cur).norm();
      const double db = (xy(walls[i].b) - cur).norm();
      if (da <= best_d) best = i, reversed = false, best_d = da;
      if (db < best_d) best = i, reversed = true, best_d = db;
    }
    if (!best) return std::nullopt;
    used[*best] = true;
    corners.push_back(cur);
    cur = xy(reversed ? walls[*best].a : walls[*best].b);
  }
  if ((cur - corners.front()).norm() > kCornerTolerance) return std::nullopt;
  return corners;
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json optional_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

std::string entity_path(const scene::SceneEntity& e) { return "entities[" + e.id + "]"; }

}  // namespace

std::vector<std::string> attention_ids(const SceneModel& scene) {
  std::vector<std::string> ids;
  for (const auto& e : scene.entities) {
    if (scene::is_in_scene(e.kind) && e.status == ObjectStatus::needs_attention) ids.push_back(e.id);
  }
  return ids;
}

Floor place_floor(const SceneModel& scene, std::optional<std::string> texture) {
  if (scene.walls.size() < 3) throw DegenerateRoom("a floor needs at least three walls", "walls");
  Floor floor;
  floor.texture = std::move(texture);
  std::vector<Vec2> corners;
  if (auto loop = wall_loop(scene.walls); loop && loop->size() >= 3 && is_simple(*loop)) {
    corners = std::move(*loop);
  } else {
    std::vector<Vec2> points;
    for (const auto& w : scene.walls) {
      points.push_back(xy(w.a));
      points.push_back(xy(w.b));
    }
    corners = geometry::convex_hull(points).vertices;
    floor.closed_loop = false;
  }
  geometry::Polygon2D poly{corners};
  if (geometry::signed_area(poly) < 0) std::reverse(poly.vertices.begin(), poly.vertices.end());
  floor.area = geometry::polygon_area(poly);
  double span = 0.0;
  for (const auto& p : poly.vertices) {
    for (const auto& q : poly.vertices) span = std::max(span, (p - q).norm());
  }
  // Relative threshold: a sliver of nearly collinear walls encloses nothing.
  if (poly.size() < 3 || floor.area <= 1e-3 * span * span) {
    throw DegenerateRoom("walls do not enclose any floor area", "walls");
  }
  double z = scene.walls.front().a.z();
  for (const auto& w : scene.walls) z = std::min({z, w.a.z(), w.b.z()});
  for (const auto& p : poly.vertices) floor.polygon.emplace_back(p.x(), p.y(), z);
  return floor;
}

std::vector<WallPanel> place_walls(const SceneModel& scene, std::optional<std::string> texture) {
  const auto floor = place_floor(scene);
  geometry::Polygon2D poly;
  for (const auto& p : floor.polygon) poly.vertices.push_back(xy(p));
  const Vec2 centroid = geometry::polygon_centroid(poly);
  std::vector<WallPanel> panels;
  for (const auto& w : scene.walls) {
    const Vec2 d = xy(w.b - w.a);
    if (d.norm() <= 0) throw DegenerateRoom("wall has zero length", w.id);
    const Vec2 dir = d / d.norm();
    Vec2 n(dir.y(), -dir.x());
    const double side = n.dot(centroid - xy(w.a));
    if (std::abs(side) < 1e-9) throw DegenerateRoom("wall passes through the room centroid", w.id);
    if (side > 0) n = -n;
    const Vec3 offset(kWallOffset * n.x(), kWallOffset * n.y(), 0.0);
    const Vec3 up(0.0, 0.0, w.height);
    WallPanel panel;
    panel.wall_id = w.id;
    panel.corners = {w.a + offset, w.b + offset, w.b + offset + up, w.a + offset + up};
    panel.outward_normal = Vec3(n.x(), n.y(), 0.0);
    panel.texture = texture;
    panels.push_back(std::move(panel));
  }
  return panels;
}

ComposedScene compose_scene(const SceneModel& scene, const gen::AssetStore& store, const ComposeOptions& options) {
  if (auto blocked = attention_ids(scene); !blocked.empty()) throw BlockedByAttention(std::move(blocked));

  ComposedScene out;
  out.source_revision = scene.revision;
  for (const auto& e : scene.entities) {
    if (!scene::is_in_scene(e.kind)) continue;
    if (e.status != ObjectStatus::complete && e.status != ObjectStatus::confirmed) {
      out.unplaced.push_back({e.id, e.status});
      continue;
    }
    if (!e.asset_id) throw MissingAsset(fmt::format("'{}' is {} but has no asset", e.id, to_string(e.status)), entity_path(e));
    const auto record = store.find(*e.asset_id);
    if (!record || record->kind != gen::AssetKind::mesh || !record->extents) {
      throw MissingAsset(fmt::format("mesh asset '{}' of '{}' is not in the store", *e.asset_id, e.id),
                         entity_path(e) + ".asset_id");
    }
    Registration reg;
    if (e.kind == EntityKind::object) {
      reg = register_object(*record->extents, e.box, e.best_view_yaw.value_or(e.box.yaw));
    } else {
      const auto* wall = e.host_wall_id ? scene.find_wall(*e.host_wall_id) : nullptr;
      if (!wall) {
        throw MissingHostWall(fmt::format("'{}' has no resolvable host wall", e.id), entity_path(e) + ".host_wall_id");
      }
      reg = register_opening(*record->extents, e, *wall, options.opening_thickness);
    }
    out.placed.push_back({e.id, e.kind, *e.asset_id, reg.translation, reg.yaw, reg.flip, reg.per_axis_scale,
                          reg.extents, reg.achieved_iou});
  }

  const auto& env = scene.environment;
  for (const auto* id : {&env.wall_texture, &env.floor_texture}) {
    if (*id && !store.find(**id)) throw MissingAsset(fmt::format("texture '{}' is not in the store", **id), "environment");
  }
  out.floor = place_floor(scene, env.floor_texture);
  out.wall_panels = place_walls(scene, env.wall_texture);

  if (env.skybox) {
    const auto record = store.find(*env.skybox);
    if (!record || record->kind != gen::AssetKind::motion_playlist) {
      throw MissingAsset(fmt::format("skybox '{}' is not in the store", *env.skybox), "environment.skybox");
    }
    const auto doc = parse_json(store.read(*record), "skybox playlist");
    out.skybox = Skybox{*env.skybox, doc.at("panorama").get<std::string>(), doc.at("fps").get<int>(),
                        doc.at("playlist").get<std::vector<int>>()};
  }
  return out;
}

Json manifest_to_json(const ComposedScene& composed) {
  Json placed = Json::array();
  for (const auto& p : composed.placed) {
    placed.push_back({{"entity_id", p.entity_id},
                      {"kind", scene::to_string(p.kind)},
                      {"asset_id", p.asset_id},
                      {"translation", vec_json(p.translation)},
                      {"yaw", p.yaw},
                      {"flip", to_string(p.flip)},
                      {"per_axis_scale", vec_json(p.per_axis_scale)},
                      {"extents", vec_json(p.extents)},
                      {"achieved_iou", p.achieved_iou}});
  }
  Json walls = Json::array();
  for (const auto& w : composed.wall_panels) {
    Json corners = Json::array();
    for (const auto& c : w.corners) corners.push_back(vec_json(c));
    walls.push_back({{"wall_id", w.wall_id},
                     {"corners", corners},
                     {"outward_normal", vec_json(w.outward_normal)},
                     {"texture", optional_string(w.texture)}});
  }
  Json polygon = Json::array();
  for (const auto& p : composed.floor.polygon) polygon.push_back(vec_json(p));
  Json unplaced = Json::array();
  for (const auto& u : composed.unplaced) {
    unplaced.push_back({{"entity_id", u.entity_id}, {"status", scene::to_string(u.status)}});
  }
  Json skybox = nullptr;
  if (composed.skybox) {
    skybox = {{"asset_id", composed.skybox->asset_id},
              {"panorama", composed.skybox->panorama},
              {"fps", composed.skybox->fps},
              {"playlist", composed.skybox->playlist}};
  }
  return {{"placed", placed},
          {"walls", walls},
          {"floor",
           {{"polygon", polygon},
            {"closed_loop", composed.floor.closed_loop},
            {"area", composed.floor.area},
            {"tile_size", composed.floor.tile_size},
            {"texture", optional_string(composed.floor.texture)}}},
          {"skybox", skybox},
          {"audio", optional_string(composed.audio)},
          {"unplaced", unplaced},
          {"source_revision", composed.source_revision}};
}

std::string manifest_text(const ComposedScene& composed) { return canonical_dump(manifest_to_json(composed)); }

namespace {

const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(fmt::format("missing '{}'", key), path + "." + key);
  return obj.at(key);
}

void expect(bool ok, const std::string& path, std::string_view what) {
  if (!ok) throw SchemaError(fmt::format("{} must be {}", path, what), path);
}

void check_vec3(const Json& v, const std::string& path, bool positive = false) {
  expect(v.is_array() && v.size() == 3, path, "an array of 3 numbers");
  for (const auto& x : v) {
    expect(x.is_number() && std::isfinite(x.get<double>()), path, "an array of 3 numbers");
    if (positive) expect(x.get<double>() > 0, path, "positive");
  }
}

void check_optional_string(const Json& v, const std::string& path) {
  expect(v.is_null() || v.is_string(), path, "a string or null");
}

}  // namespace

void validate_manifest(const Json& m) {
  expect(m.is_object(), "$", "an object");
  const auto& placed = field(m, "placed", "$");
  expect(placed.is_array(), "$.placed", "an array");
  for (std::size_t i = 0; i < placed.size(); ++i) {
    const auto path = fmt::format("$.placed[{}]", i);
    const auto& p = placed[i];
    expect(field(p, "entity_id", path).is_string(), path + ".entity_id", "a string");
    expect(field(p, "asset_id", path).is_string(), path + ".asset_id", "a string");
    const auto& kind = field(p, "kind", path);
    expect(kind.is_string() && scene::parse_entity_kind(kind.get<std::string>()) &&
               *scene::parse_entity_kind(kind.get<std::string>()) != EntityKind::wall,
           path + ".kind", "object, door or window");
    check_vec3(field(p, "translation", path), path + ".translation");
    expect(field(p, "yaw", path).is_number(), path + ".yaw", "a number");
    const auto& flip = field(p, "flip", path);
    expect(flip.is_string() && parse_flip(flip.get<std::string>()), path + ".flip", "none, Rx90, Ry90 or Rz90");
    check_vec3(field(p, "per_axis_scale", path), path + ".per_axis_scale", true);
    check_vec3(field(p, "extents", path), path + ".extents", true);
    const auto& iou = field(p, "achieved_iou", path);
    expect(iou.is_number() && iou.get<double>() >= 0 && iou.get<double>() <= 1, path + ".achieved_iou", "in [0, 1]");
  }
  const auto& walls = field(m, "walls", "$");
  expect(walls.is_array(), "$.walls", "an array");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto path = fmt::format("$.walls[{}]", i);
    expect(field(walls[i], "wall_id", path).is_string(), path + ".wall_id", "a string");
    const auto& corners = field(walls[i], "corners", path);
    expect(corners.is_array() && corners.size() == 4, path + ".corners", "4 corners");
    for (std::size_t k = 0; k < 4; ++k) check_vec3(corners[k], fmt::format("{}.corners[{}]", path, k));
    check_vec3(field(walls[i], "outward_normal", path), path + ".outward_normal");
    check_optional_string(field(walls[i], "texture", path), path + ".texture");
  }
  const auto& floor = field(m, "floor", "$");
  const auto& polygon = field(floor, "polygon", "$.floor");
  expect(polygon.is_array() && polygon.size() >= 3, "$.floor.polygon", "at least 3 points");
  for (std::size_t k = 0; k < polygon.size(); ++k) check_vec3(polygon[k], fmt::format("$.floor.polygon[{}]", k));
  expect(field(floor, "tile_size", "$.floor").is_number(), "$.floor.tile_size", "a number");
  check_optional_string(field(floor, "texture", "$.floor"), "$.floor.texture");
  const auto& sky = field(m, "skybox", "$");
  if (!sky.is_null()) {
    expect(field(sky, "asset_id", "$.skybox").is_string(), "$.skybox.asset_id", "a string");
    const auto& playlist = field(sky, "playlist", "$.skybox");
    expect(playlist.is_array() && !playlist.empty(), "$.skybox.playlist", "a non-empty array");
    for (const auto& f : playlist) expect(f.is_number_integer() && f.get<int>() >= 0, "$.skybox.playlist", "frame indices");
  }
  check_optional_string(field(m, "audio", "$"), "$.audio");
  expect(field(m, "source_revision", "$").is_number_integer(), "$.source_revision", "an integer");
}

}  // namespace roomforge::compose
