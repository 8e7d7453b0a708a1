#include "roomforge/scene/scene_model.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

#include "roomforge/core/error.hpp"

namespace roomforge::scene {

double normalize_yaw(double yaw) {
  double r = std::fmod(yaw, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

void OrientedBox::validate(const std::string& path) const {
  if (!center.allFinite() || !size.allFinite() || !std::isfinite(yaw)) {
    throw InvariantError("box has non-finite values", path);
  }
  for (int i = 0; i < 3; ++i) {
    if (!(size[i] > 0.0)) {
      throw InvariantError(fmt::format("size[{}] = {} must be strictly positive", i, size[i]),
                           path + ".size");
    }
  }
}

std::array<Vec3, 8> box_corners(const OrientedBox& box) {
  static constexpr double kSigns[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                                          {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
  const Mat3 r = rot_z(box.yaw);
  std::array<Vec3, 8> out;
  for (int k = 0; k < 8; ++k) {
    const Vec3 local(kSigns[k][0] * box.size.x() / 2.0, kSigns[k][1] * box.size.y() / 2.0,
                     kSigns[k][2] * box.size.z() / 2.0);
    out[k] = box.center + r * local;
  }
  return out;
}

OrientedBox box_from_corners(const std::array<Vec3, 8>& c) {
  OrientedBox box;
  box.center = Vec3::Zero();
  for (const auto& p : c) box.center += p;
  box.center /= 8.0;
  const Vec3 ex = c[1] - c[0];
  const Vec3 ey = c[3] - c[0];
  const Vec3 ez = c[4] - c[0];
  box.size = Vec3(ex.norm(), ey.norm(), ez.norm());
  box.yaw = normalize_yaw(std::atan2(ex.y(), ex.x()));
  return box;
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::wall: return "wall";
    case EntityKind::door: return "door";
    case EntityKind::window: return "window";
    case EntityKind::object: return "object";
  }
  return "object";
}

std::string_view to_string(ObjectStatus status) {
  switch (status) {
    case ObjectStatus::pending: return "pending";
    case ObjectStatus::generating: return "generating";
    case ObjectStatus::complete: return "complete";
    case ObjectStatus::needs_attention: return "needs-attention";
    case ObjectStatus::confirmed: return "confirmed";
  }
  return "pending";
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) {
  for (auto k : {EntityKind::wall, EntityKind::door, EntityKind::window, EntityKind::object}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<ObjectStatus> parse_object_status(std::string_view text) {
  for (auto s : {ObjectStatus::pending, ObjectStatus::generating, ObjectStatus::complete,
                 ObjectStatus::needs_attention, ObjectStatus::confirmed}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

OrientedBox wall_to_box(const WallSegment& wall) {
  OrientedBox box;
  const Vec3 mid = (wall.a + wall.b) / 2.0;
  box.center = Vec3(mid.x(), mid.y(), wall.a.z() + wall.height / 2.0);
  box.size = Vec3(wall.length(), wall.thickness, wall.height);
  box.yaw = normalize_yaw(std::atan2(wall.b.y() - wall.a.y(), wall.b.x() - wall.a.x()));
  return box;
}

WallSegment box_to_wall(std::string id, const OrientedBox& box) {
  WallSegment wall;
  wall.id = std::move(id);
  const Vec3 half = rot_z(box.yaw) * Vec3(box.size.x() / 2.0, 0.0, 0.0);
  const Vec3 base(box.center.x(), box.center.y(), box.bottom());
  wall.a = base - half;
  wall.b = base + half;
  wall.height = box.size.z();
  wall.thickness = box.size.y();
  return wall;
}

const SceneEntity* SceneModel::find_entity(std::string_view id) const {
  for (const auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

SceneEntity* SceneModel::find_entity(std::string_view id) {
  for (auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const WallSegment* SceneModel::find_wall(std::string_view id) const {
  for (const auto& w : walls) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

bool is_rigid_transform(const Mat4& pose, double tol) {
  if (!pose.allFinite()) return false;
  const Mat3 r = pose.topLeftCorner<3, 3>();
  if (((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(r.determinant() - 1.0) > 3.0 * tol) return false;
  return (pose.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() <= tol;
}

namespace {

// Poses round-tripped through the six-decimal document format carry up to
// ~5e-7 quantization per entry, so parsed poses get a looser bound than
// freshly computed ones.
constexpr double kParsedPoseTolerance = 1e-5;

void validate_wall(const WallSegment& w, const std::string& path) {
  if (w.id.empty()) throw InvariantError("wall id must be non-empty", path + ".id");
  if (!w.a.allFinite() || !w.b.allFinite() || !std::isfinite(w.height) ||
      !std::isfinite(w.thickness)) {
    throw InvariantError("wall has non-finite values", path);
  }
  if (!(w.length() > 0.0)) throw InvariantError("wall endpoints coincide", path);
  if (std::abs(w.a.z() - w.b.z()) > 1e-9) {
    throw InvariantError("wall endpoints must share the floor height", path + ".b");
  }
  if (!(w.height > 0.0)) throw InvariantError("wall height must be positive", path + ".height");
  if (!(w.thickness >= 0.0)) {
    throw InvariantError("wall thickness must be non-negative", path + ".thickness");
  }
}

}  // namespace

void SceneModel::validate() const {
  std::set<std::string> wall_ids;
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto path = fmt::format("walls[{}]", i);
    validate_wall(walls[i], path);
    if (!wall_ids.insert(walls[i].id).second) {
      throw InvariantError(fmt::format("duplicate wall id '{}'", walls[i].id), path + ".id");
    }
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& e = entities[i];
    const auto path = fmt::format("entities[{}]", i);
    if (e.id.empty()) throw InvariantError("entity id must be non-empty", path + ".id");
    if (!ids.insert(e.id).second) {
      throw InvariantError(fmt::format("duplicate entity id '{}'", e.id), path + ".id");
    }
    e.box.validate(path + ".box");
    if (e.kind == EntityKind::door || e.kind == EntityKind::window) {
      if (!e.host_wall_id) {
        throw InvariantError(fmt::format("{} '{}' needs host_wall_id", to_string(e.kind), e.id),
                             path + ".host_wall_id");
      }
      if (!wall_ids.count(*e.host_wall_id)) {
        throw InvariantError(fmt::format("host_wall_id '{}' does not name a wall", *e.host_wall_id),
                             path + ".host_wall_id");
      }
    }
    if (is_architectural(e.kind) && (e.status == ObjectStatus::needs_attention ||
                                     e.status == ObjectStatus::confirmed)) {
      throw InvariantError(
          fmt::format("{} entities cannot be {}", to_string(e.kind), to_string(e.status)),
          path + ".status");
    }
    if (e.best_frame_pose && !is_rigid_transform(*e.best_frame_pose, kParsedPoseTolerance)) {
      throw InvariantError("best_frame_pose is not a rigid transform", path + ".best_frame_pose");
    }
    if (e.best_view_yaw && !std::isfinite(*e.best_view_yaw)) {
      throw InvariantError("best_view_yaw must be finite", path + ".best_view_yaw");
    }
    if (e.mapping) {
      const auto& m = *e.mapping;
      for (const auto* field : {&m.object_id, &m.label, &m.object_function, &m.replica,
                                &m.replica_function, &m.appearance_prompt}) {
        if (field->empty()) throw InvariantError("mapping fields must be non-empty", path + ".mapping");
      }
      if (m.object_id != e.id) {
        throw InvariantError("mapping.object_id must match the entity id", path + ".mapping.object_id");
      }
    }
  }
  if (style && !style->keywords.empty()) {
    for (const auto& k : style->keywords) {
      if (k.empty()) throw InvariantError("style keywords must be non-empty", "style.keywords");
    }
  }
  if (!origin_calibration.position.allFinite() || !std::isfinite(origin_calibration.yaw)) {
    throw InvariantError("origin_calibration must be finite", "origin_calibration");
  }
  if (revision < 0) throw InvariantError("revision must be non-negative", "revision");
}

// ---------------------------------------------------------------------------
// JSON codec
// ---------------------------------------------------------------------------

namespace {

const Json& require(const Json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(fmt::format("missing field '{}'", key), fmt::format("{}.{}", path, key));
  }
  return *it;
}

const Json* optional_field(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

void expect_object(const Json& v, const std::string& path) {
  if (!v.is_object()) throw SchemaError("expected an object", path);
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError("expected a number", path);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError("expected a finite number", path);
  return d;
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError("expected a string", path);
  return v.get<std::string>();
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw SchemaError("expected a boolean", path);
  return v.get<bool>();
}

Vec3 as_vec3(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw SchemaError("expected an array of 3 numbers", path);
  return Vec3(as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]"),
              as_number(v[2], path + "[2]"));
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json extras(const Json& obj, std::initializer_list<std::string_view> known) {
  Json out = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (auto k : known) is_known = is_known || it.key() == k;
    if (!is_known) out[it.key()] = it.value();
  }
  return out;
}

void merge_extras(Json& target, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    if (!target.contains(it.key())) target[it.key()] = it.value();
  }
}

Json opt_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

}  // namespace

Json box_to_json(const OrientedBox& box) {
  return Json{{"center", vec_json(box.center)}, {"size", vec_json(box.size)}, {"yaw", box.yaw}};
}

OrientedBox box_from_json(const Json& doc, const std::string& path) {
  expect_object(doc, path);
  OrientedBox box;
  box.center = as_vec3(require(doc, "center", path), path + ".center");
  box.size = as_vec3(require(doc, "size", path), path + ".size");
  box.yaw = normalize_yaw(as_number(require(doc, "yaw", path), path + ".yaw"));
  return box;
}

Json mapping_to_json(const MappingRow& row) {
  return Json{{"object_id", row.object_id},
              {"label", row.label},
              {"object_function", row.object_function},
              {"replica", row.replica},
              {"replica_function", row.replica_function},
              {"appearance_prompt", row.appearance_prompt},
              {"collision_risk", row.collision_risk}};
}

MappingRow mapping_from_json(const Json& doc, const std::string& path) {
  expect_object(doc, path);
  MappingRow row;
  row.object_id = as_string(require(doc, "object_id", path), path + ".object_id");
  row.label = as_string(require(doc, "label", path), path + ".label");
  row.object_function = as_string(require(doc, "object_function", path), path + ".object_function");
  row.replica = as_string(require(doc, "replica", path), path + ".replica");
  row.replica_function =
      as_string(require(doc, "replica_function", path), path + ".replica_function");
  row.appearance_prompt =
      as_string(require(doc, "appearance_prompt", path), path + ".appearance_prompt");
  row.collision_risk = as_bool(require(doc, "collision_risk", path), path + ".collision_risk");
  return row;
}

Json style_to_json(const StyleSpec& style) {
  return Json{{"text", style.raw_text},
              {"keywords", style.keywords},
              {"reference_image", opt_string(style.reference_image)},
              {"degraded", style.degraded}};
}

StyleSpec style_from_json(const Json& doc, const std::string& path) {
  expect_object(doc, path);
  StyleSpec style;
  style.raw_text = as_string(require(doc, "text", path), path + ".text");
  if (const Json* kw = optional_field(doc, "keywords")) {
    if (!kw->is_array()) throw SchemaError("expected an array of strings", path + ".keywords");
    for (std::size_t i = 0; i < kw->size(); ++i) {
      style.keywords.push_back(as_string((*kw)[i], fmt::format("{}.keywords[{}]", path, i)));
    }
  }
  if (const Json* ref = optional_field(doc, "reference_image")) {
    style.reference_image = as_string(*ref, path + ".reference_image");
  }
  if (const Json* d = optional_field(doc, "degraded")) style.degraded = as_bool(*d, path + ".degraded");
  return style;
}

Json entity_to_json(const SceneEntity& e) {
  Json out{{"id", e.id},
           {"kind", std::string(to_string(e.kind))},
           {"label", e.label},
           {"box", box_to_json(e.box)},
           {"host_wall_id", opt_string(e.host_wall_id)},
           {"status", std::string(to_string(e.status))},
           {"best_frame_pose", nullptr},
           {"best_view_yaw", e.best_view_yaw ? Json(*e.best_view_yaw) : Json(nullptr)},
           {"mapping", e.mapping ? mapping_to_json(*e.mapping) : Json(nullptr)},
           {"mapping_stale", e.mapping_stale},
           {"asset_id", opt_string(e.asset_id)}};
  if (e.best_frame_pose) {
    Json m = Json::array();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) m.push_back((*e.best_frame_pose)(r, c));
    }
    out["best_frame_pose"] = std::move(m);
  }
  merge_extras(out, e.extra);
  return out;
}

SceneEntity entity_from_json(const Json& doc, const std::string& path) {
  expect_object(doc, path);
  SceneEntity e;
  e.id = as_string(require(doc, "id", path), path + ".id");
  const auto kind_text = as_string(require(doc, "kind", path), path + ".kind");
  const auto kind = parse_entity_kind(kind_text);
  if (!kind) throw SchemaError(fmt::format("unknown kind '{}'", kind_text), path + ".kind");
  e.kind = *kind;
  e.label = as_string(require(doc, "label", path), path + ".label");
  e.box = box_from_json(require(doc, "box", path), path + ".box");
  e.box.validate(path + ".box");
  if (const Json* h = optional_field(doc, "host_wall_id")) {
    e.host_wall_id = as_string(*h, path + ".host_wall_id");
  }
  const auto status_text = as_string(require(doc, "status", path), path + ".status");
  const auto status = parse_object_status(status_text);
  if (!status) throw SchemaError(fmt::format("unknown status '{}'", status_text), path + ".status");
  e.status = *status;
  if (const Json* p = optional_field(doc, "best_frame_pose")) {
    const auto ppath = path + ".best_frame_pose";
    if (!p->is_array() || p->size() != 16) throw SchemaError("expected 16 numbers", ppath);
    Mat4 m;
    for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = as_number((*p)[i], fmt::format("{}[{}]", ppath, i));
    e.best_frame_pose = m;
  }
  if (const Json* y = optional_field(doc, "best_view_yaw")) {
    e.best_view_yaw = as_number(*y, path + ".best_view_yaw");
  }
  if (const Json* m = optional_field(doc, "mapping")) e.mapping = mapping_from_json(*m, path + ".mapping");
  if (const Json* s = optional_field(doc, "mapping_stale")) {
    e.mapping_stale = as_bool(*s, path + ".mapping_stale");
  }
  if (const Json* a = optional_field(doc, "asset_id")) e.asset_id = as_string(*a, path + ".asset_id");
  e.extra = extras(doc, {"id", "kind", "label", "box", "host_wall_id", "status", "best_frame_pose",
                         "best_view_yaw", "mapping", "mapping_stale", "asset_id"});
  return e;
}

Json scene_to_json(const SceneModel& scene) {
  Json walls = Json::array();
  for (const auto& w : scene.walls) {
    Json jw{{"id", w.id},
            {"a", vec_json(w.a)},
            {"b", vec_json(w.b)},
            {"height", w.height},
            {"thickness", w.thickness}};
    merge_extras(jw, w.extra);
    walls.push_back(std::move(jw));
  }
  Json entities = Json::array();
  for (const auto& e : scene.entities) entities.push_back(entity_to_json(e));
  Json out{{"origin_calibration",
            {{"position", vec_json(scene.origin_calibration.position)},
             {"yaw", scene.origin_calibration.yaw}}},
           {"style", scene.style ? style_to_json(*scene.style) : Json(nullptr)},
           {"environment",
            {{"wall_texture", opt_string(scene.environment.wall_texture)},
             {"floor_texture", opt_string(scene.environment.floor_texture)},
             {"skybox", opt_string(scene.environment.skybox)}}},
           {"walls", std::move(walls)},
           {"entities", std::move(entities)},
           {"revision", scene.revision}};
  merge_extras(out, scene.extra);
  return out;
}

SceneModel scene_from_json(const Json& doc) {
  const std::string root = "$";
  expect_object(doc, root);
  SceneModel scene;
  {
    const auto path = std::string("origin_calibration");
    const Json& oc = require(doc, "origin_calibration", root);
    expect_object(oc, path);
    scene.origin_calibration.position = as_vec3(require(oc, "position", path), path + ".position");
    scene.origin_calibration.yaw = as_number(require(oc, "yaw", path), path + ".yaw");
  }
  if (const Json* st = optional_field(doc, "style")) scene.style = style_from_json(*st, "style");
  if (const Json* env = optional_field(doc, "environment")) {
    expect_object(*env, "environment");
    auto read = [&](std::string_view key, std::optional<std::string>& out) {
      if (const Json* v = optional_field(*env, key)) out = as_string(*v, fmt::format("environment.{}", key));
    };
    read("wall_texture", scene.environment.wall_texture);
    read("floor_texture", scene.environment.floor_texture);
    read("skybox", scene.environment.skybox);
  }
  const Json& walls = require(doc, "walls", root);
  if (!walls.is_array()) throw SchemaError("expected an array", "walls");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto path = fmt::format("walls[{}]", i);
    const Json& jw = walls[i];
    expect_object(jw, path);
    WallSegment w;
    w.id = as_string(require(jw, "id", path), path + ".id");
    w.a = as_vec3(require(jw, "a", path), path + ".a");
    w.b = as_vec3(require(jw, "b", path), path + ".b");
    w.height = as_number(require(jw, "height", path), path + ".height");
    w.thickness = as_number(require(jw, "thickness", path), path + ".thickness");
    w.extra = extras(jw, {"id", "a", "b", "height", "thickness"});
    scene.walls.push_back(std::move(w));
  }
  const Json& entities = require(doc, "entities", root);
  if (!entities.is_array()) throw SchemaError("expected an array", "entities");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    scene.entities.push_back(entity_from_json(entities[i], fmt::format("entities[{}]", i)));
  }
  const Json& rev = require(doc, "revision", root);
  if (!rev.is_number_integer()) throw SchemaError("expected an integer", "revision");
  scene.revision = rev.get<std::int64_t>();
  scene.extra =
      extras(doc, {"origin_calibration", "style", "environment", "walls", "entities", "revision"});
  scene.validate();
  return scene;
}

SceneModel parse_scene(std::string_view document) {
  return scene_from_json(parse_json(document, "scene document"));
}

std::string serialize_scene(const SceneModel& scene) { return canonical_dump(scene_to_json(scene)); }

// ---------------------------------------------------------------------------
// Lifecycle
// ---------------------------------------------------------------------------

bool is_legal_transition(EntityKind kind, ObjectStatus from, ObjectStatus to) {
  using S = ObjectStatus;
  if (is_architectural(kind) && (to == S::needs_attention || to == S::confirmed)) return false;
  if (to == S::generating) return true;
  switch (from) {
    case S::generating:
      return to == S::complete || to == S::needs_attention || to == S::pending;
    case S::needs_attention:
      return to == S::confirmed;
    default:
      return false;
  }
}

SceneEntity advance_status(SceneEntity entity, ObjectStatus target) {
  if (!is_legal_transition(entity.kind, entity.status, target)) {
    throw IllegalTransition(fmt::format("{} '{}': {} -> {} is not a legal transition",
                                        to_string(entity.kind), entity.id, to_string(entity.status),
                                        to_string(target)),
                            entity.id);
  }
  entity.status = target;
  return entity;
}

}  // namespace roomforge::scene
