#include <doctest.h>

#include <random>

#include "roomforge/core/error.hpp"
#include "roomforge/scene/scene_model.hpp"
#include "test_paths.hpp"

using namespace roomforge;
using namespace roomforge::scene;

namespace {

std::string fixture_room() { return read_file(test::fixture_dir() / "room.json"); }

bool near(const Vec3& a, const Vec3& b, double tol = 1e-12) { return (a - b).cwiseAbs().maxCoeff() <= tol; }

}  // namespace

TEST_CASE("fixture room parses with 22 entities and 4 walls") {
  const auto text = fixture_room();
  // Independent count straight off the raw JSON.
  const auto raw = Json::parse(text);
  std::size_t objects = 0, doors = 0, walls = 0;
  for (const auto& e : raw["entities"]) {
    const auto kind = e["kind"].get<std::string>();
    objects += kind == "object";
    doors += kind == "door";
    walls += kind == "wall";
  }
  CHECK(objects == 15);
  CHECK(doors == 3);
  CHECK(walls == 4);
  CHECK(raw["walls"].size() == 4);

  const auto scene = parse_scene(text);
  CHECK(scene.entities.size() == 22);
  CHECK(scene.walls.size() == 4);
  CHECK(scene.find_entity("door_1")->host_wall_id == "wall_1");
}

TEST_CASE("canonical fixture round-trips byte-for-byte") {
  const auto text = fixture_room();
  CHECK(serialize_scene(parse_scene(text)) == text);
}

TEST_CASE("serialize of a parsed scene re-parses to an equal model") {
  const auto scene = parse_scene(fixture_room());
  CHECK(parse_scene(serialize_scene(scene)) == scene);
}

TEST_CASE("empty scene serializes to a minimal valid document") {
  SceneModel empty;
  const auto text = serialize_scene(empty);
  const auto back = parse_scene(text);
  CHECK(back.entities.empty());
  CHECK(back.walls.empty());
  CHECK(serialize_scene(back) == text);
}

TEST_CASE("field-wise equal scenes serialize identically") {
  auto a = parse_scene(fixture_room());
  auto b = parse_scene(fixture_room());
  CHECK(serialize_scene(a) == serialize_scene(b));
  b.entities[5].label = "ottoman";
  CHECK(serialize_scene(a) != serialize_scene(b));
}

TEST_CASE("unknown fields survive a round trip") {
  auto doc = Json::parse(fixture_room());
  doc["scanner"] = {{"model", "quest3"}, {"version", 2}};
  doc["entities"][4]["confidence"] = 0.75;
  doc["walls"][0]["material"] = "plaster";
  const auto scene = scene_from_json(doc);
  const auto out = Json::parse(serialize_scene(scene));
  CHECK(out["scanner"]["model"] == "quest3");
  CHECK(out["entities"][4]["confidence"].get<double>() == doctest::Approx(0.75));
  CHECK(out["walls"][0]["material"] == "plaster");
}

TEST_CASE("negative extent is an InvariantError at the offending path") {
  auto doc = Json::parse(fixture_room());
  doc["entities"][7]["box"]["size"] = {1.0, -0.5, 1.0};
  try {
    scene_from_json(doc);
    FAIL("expected InvariantError");
  } catch (const InvariantError& e) {
    CHECK(e.path() == "entities[7].box.size");
  }
}

TEST_CASE("schema errors carry the field path") {
  auto doc = Json::parse(fixture_room());
  doc["entities"][2].erase("label");
  try {
    scene_from_json(doc);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.path() == "entities[2].label");
  }
  doc = Json::parse(fixture_room());
  doc["entities"][0]["box"]["yaw"] = "north";
  CHECK_THROWS_AS(scene_from_json(doc), SchemaError);
  doc = Json::parse(fixture_room());
  doc["revision"] = 1.5;
  CHECK_THROWS_AS(scene_from_json(doc), SchemaError);
  CHECK_THROWS_AS(parse_scene("{not json"), SchemaError);
}

TEST_CASE("dangling host wall and duplicate ids are rejected") {
  auto doc = Json::parse(fixture_room());
  doc["entities"][4]["host_wall_id"] = "wall_9";
  CHECK_THROWS_AS(scene_from_json(doc), InvariantError);
  doc = Json::parse(fixture_room());
  doc["entities"][4]["host_wall_id"] = nullptr;
  CHECK_THROWS_AS(scene_from_json(doc), InvariantError);
  doc = Json::parse(fixture_room());
  doc["entities"][8]["id"] = "obj_0";
  CHECK_THROWS_AS(scene_from_json(doc), InvariantError);
}

TEST_CASE("best_frame_pose must be rigid") {
  auto doc = Json::parse(fixture_room());
  Json pose = Json::array();
  for (int i = 0; i < 16; ++i) pose.push_back(i % 5 == 0 ? 1.0 : 0.0);
  doc["entities"][8]["best_frame_pose"] = pose;
  CHECK_NOTHROW(scene_from_json(doc));
  pose[0] = 2.0;
  doc["entities"][8]["best_frame_pose"] = pose;
  CHECK_THROWS_AS(scene_from_json(doc), InvariantError);
  pose[0] = -1.0;  // reflection, det -1
  doc["entities"][8]["best_frame_pose"] = pose;
  CHECK_THROWS_AS(scene_from_json(doc), InvariantError);
}

TEST_CASE("yaw is normalized to (-pi, pi]") {
  CHECK(normalize_yaw(kPi) == doctest::Approx(kPi));
  CHECK(normalize_yaw(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_yaw(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(normalize_yaw(0.25) == 0.25);
  CHECK(normalize_yaw(-7.0) == doctest::Approx(-7.0 + 2 * kPi));
}

TEST_CASE("box_corners: axis-aligned cube") {
  OrientedBox box{Vec3::Zero(), Vec3(2, 2, 2), 0.0};
  const auto c = box_corners(box);
  CHECK(near(c[0], Vec3(-1, -1, -1)));
  CHECK(near(c[2], Vec3(1, 1, -1)));
  CHECK(near(c[6], Vec3(1, 1, 1)));
  for (const auto& p : c) CHECK(near(p.cwiseAbs(), Vec3(1, 1, 1)));
}

TEST_CASE("box_corners: quarter turn swaps the footprint") {
  OrientedBox box{Vec3::Zero(), Vec3(2, 1, 1), kPi / 2};
  for (const auto& p : box_corners(box)) {
    CHECK(std::abs(p.x()) == doctest::Approx(0.5));
    CHECK(std::abs(p.y()) == doctest::Approx(1.0));
    CHECK(std::abs(p.z()) == doctest::Approx(0.5));
  }
}

TEST_CASE("box_corners: translation and fixed order") {
  OrientedBox box{Vec3(1, 2, 0.5), Vec3(1, 1, 1), 0.0};
  const auto c = box_corners(box);
  CHECK(near(c[0], Vec3(0.5, 1.5, 0)));
  // Bottom quad counter-clockwise seen from above.
  double twice_area = 0;
  for (int i = 0; i < 4; ++i) {
    const auto& a = c[i];
    const auto& b = c[(i + 1) % 4];
    twice_area += a.x() * b.y() - b.x() * a.y();
  }
  CHECK(twice_area > 0);
  for (int i = 0; i < 4; ++i) CHECK(c[i + 4].z() > c[i].z());
}

TEST_CASE("property: corner centroid equals center and reconstruction is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-10, 10), ext(0.01, 5), ang(-kPi, kPi);
  for (int trial = 0; trial < 500; ++trial) {
    OrientedBox box{Vec3(pos(rng), pos(rng), pos(rng)), Vec3(ext(rng), ext(rng), ext(rng)),
                    normalize_yaw(ang(rng))};
    const auto corners = box_corners(box);
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : corners) centroid += p;
    centroid /= 8.0;
    REQUIRE(near(centroid, box.center, 1e-9));
    const auto back = box_from_corners(corners);
    REQUIRE(near(back.center, box.center, 1e-9));
    REQUIRE(near(back.size, box.size, 1e-9));
    REQUIRE(std::abs(normalize_yaw(back.yaw - box.yaw)) < 1e-9);
    const auto again = box_from_corners(box_corners(back));
    REQUIRE(near(again.center, back.center, 1e-9));
    REQUIRE(near(again.size, back.size, 1e-9));
  }
}

TEST_CASE("wall segment <-> box conversion is lossless") {
  WallSegment w;
  w.id = "wall_x";
  w.a = Vec3(1, -2, 0.1);
  w.b = Vec3(-3, 4, 0.1);
  w.height = 2.5;
  w.thickness = 0.12;
  const auto box = wall_to_box(w);
  CHECK(box.bottom() == doctest::Approx(0.1));
  CHECK(box.size.x() == doctest::Approx(w.length()));
  const auto back = box_to_wall("wall_x", box);
  CHECK(near(back.a, w.a, 1e-12));
  CHECK(near(back.b, w.b, 1e-12));
  CHECK(back.height == doctest::Approx(w.height));
  CHECK(back.thickness == doctest::Approx(w.thickness));
}

TEST_CASE("advance_status: legal and illegal edges") {
  SceneEntity e;
  e.id = "obj_1";
  e.status = ObjectStatus::generating;
  CHECK(advance_status(e, ObjectStatus::complete).status == ObjectStatus::complete);

  e.status = ObjectStatus::pending;
  CHECK_THROWS_AS(advance_status(e, ObjectStatus::confirmed), IllegalTransition);

  e.status = ObjectStatus::needs_attention;
  CHECK(advance_status(e, ObjectStatus::confirmed).status == ObjectStatus::confirmed);

  e.kind = EntityKind::door;
  e.status = ObjectStatus::generating;
  CHECK_THROWS_AS(advance_status(e, ObjectStatus::needs_attention), IllegalTransition);
}

TEST_CASE("property: random walks over the status machine") {
  const ObjectStatus all[] = {ObjectStatus::pending, ObjectStatus::generating, ObjectStatus::complete,
                              ObjectStatus::needs_attention, ObjectStatus::confirmed};
  const std::vector<std::pair<ObjectStatus, ObjectStatus>> legal = {
      {ObjectStatus::pending, ObjectStatus::generating},
      {ObjectStatus::generating, ObjectStatus::complete},
      {ObjectStatus::generating, ObjectStatus::needs_attention},
      {ObjectStatus::generating, ObjectStatus::pending},
      {ObjectStatus::needs_attention, ObjectStatus::confirmed},
  };
  auto expected_legal = [&](EntityKind kind, ObjectStatus from, ObjectStatus to) {
    if (is_architectural(kind) && (to == ObjectStatus::needs_attention || to == ObjectStatus::confirmed)) {
      return false;
    }
    if (to == ObjectStatus::generating) return true;
    for (const auto& [f, t] : legal) {
      if (f == from && t == to) return true;
    }
    return false;
  };
  std::mt19937 rng(11);
  for (auto kind : {EntityKind::object, EntityKind::door, EntityKind::wall}) {
    SceneEntity e;
    e.id = "walker";
    e.kind = kind;
    for (int step = 0; step < 2000; ++step) {
      const auto target = all[rng() % 5];
      const bool ok = expected_legal(kind, e.status, target);
      if (ok) {
        e = advance_status(e, target);
        REQUIRE(e.status == target);
      } else {
        REQUIRE_THROWS_AS(advance_status(e, target), IllegalTransition);
      }
      if (is_architectural(kind)) {
        REQUIRE(e.status != ObjectStatus::needs_attention);
        REQUIRE(e.status != ObjectStatus::confirmed);
      }
    }
  }
}
