#include <doctest.h>

#include <random>

#include "bestview_fixture.hpp"
#include "roomforge/core/error.hpp"
#include "test_paths.hpp"

using namespace roomforge;
using namespace roomforge::bestview;

namespace {

std::vector<fixture::OracleScore> oracle_scores(const scene::SceneModel& model, const CameraTrack& track,
                                                double dz = kDefaultDepthMargin) {
  const auto& object = *model.find_entity("target");
  std::vector<scene::SceneEntity> others;
  for (const auto& e : model.entities) {
    if (e.id != object.id) others.push_back(e);
  }
  std::vector<fixture::OracleScore> out;
  for (const auto& pose : track.poses) out.push_back(fixture::score(object, others, pose, track.intrinsics, dz));
  return out;
}

// Camera at the origin looking along +z of SLAM space.
CameraTrack forward_track() {
  CameraTrack track;
  track.intrinsics = {500, 500, 320, 240, 640, 480};
  track.poses = {CameraPose{}};
  return track;
}

}  // namespace

TEST_CASE("three-frame fixture: oracle scores agree with the library") {
  for (bool blocker : {false, true}) {
    const auto track = fixture::three_frame_track();
    const auto model = fixture::three_frame_scene(blocker);
    const auto expect = oracle_scores(model, track);
    const auto got = score_all_frames(*model.find_entity("target"), model, track);
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CAPTURE(i);
      CHECK(got[i].valid() == (expect[i].vis_cnt > 0));
      if (!got[i].valid()) continue;
      CHECK(got[i].vis_cnt() == expect[i].vis_cnt);
      CHECK(got[i].center_dist() == doctest::Approx(expect[i].center_dist).epsilon(1e-9));
      CHECK(got[i].vis_area() == doctest::Approx(expect[i].vis_area).epsilon(1e-9));
    }
  }
}

TEST_CASE("three-frame fixture: centered full view wins, blocker flips the choice") {
  const auto track = fixture::three_frame_track();
  const auto open = fixture::three_frame_scene(false);
  const auto scores = oracle_scores(open, track);
  REQUIRE(scores[0].vis_cnt > 0);
  REQUIRE(scores[0].vis_cnt < 8);
  REQUIRE(scores[1].vis_cnt == 8);
  REQUIRE(scores[2].vis_cnt == 8);
  REQUIRE(scores[1].center_dist < 1e-9);

  const auto best = select_best_view(*open.find_entity("target"), open, track);
  CHECK(best.frame_index == 1);
  CHECK(best.score.vis_cnt() == 8);
  CHECK(best.annotation.size() >= 4);

  const auto blocked = fixture::three_frame_scene(true);
  const auto blocked_scores = oracle_scores(blocked, track);
  CHECK(blocked_scores[1].vis_cnt == 0);
  const auto moved = select_best_view(*blocked.find_entity("target"), blocked, track);
  CHECK(moved.frame_index != 1);
  CHECK(moved.frame_index == track.poses[fixture::best_index(blocked_scores)].frame_index);
}

TEST_CASE("selected score lex-dominates every frame and is deterministic") {
  const auto track = fixture::three_frame_track();
  for (bool blocker : {false, true}) {
    const auto model = fixture::three_frame_scene(blocker);
    const auto& object = *model.find_entity("target");
    const auto first = select_best_view(object, model, track);
    for (const auto& s : score_all_frames(object, model, track)) CHECK(!lex_better(s, first.score));
    for (int run = 0; run < 10; ++run) {
      const auto again = select_best_view(object, model, track);
      CHECK(again.frame_index == first.frame_index);
      CHECK(again.score == first.score);
      CHECK(again.annotation.vertices == first.annotation.vertices);
    }
  }
}

TEST_CASE("visible_corners: occlusion inequality") {
  const auto track = forward_track();
  const auto pose = track.poses.front();
  // Occluder slab spanning depth [1.0, 1.2].
  const auto slab = fixture::make_object("slab", "panel", Vec3(0, 0, 1.1), Vec3(2, 2, 0.2));
  const std::vector<scene::SceneEntity> occluders{slab};

  const auto deep = fixture::make_object("deep", "box", Vec3(0, 0, 2.05), Vec3(0.1, 0.1, 0.1));
  CHECK(visible_corners(deep, pose, track, {}).size() == 8);
  CHECK(visible_corners(deep, pose, track, occluders).empty());

  const auto front = fixture::make_object("front", "box", Vec3(0, 0, 0.925), Vec3(0.1, 0.1, 0.05));
  CHECK(visible_corners(front, pose, track, occluders).size() == 8);

  // Inside the margin: depth 1.04 is not beyond 1.0 + 0.05.
  const auto close = fixture::make_object("close", "box", Vec3(0, 0, 1.03), Vec3(0.1, 0.1, 0.02));
  CHECK(visible_corners(close, pose, track, occluders).size() == 8);
  CHECK(visible_corners(close, pose, track, occluders, 0.0).empty());
}

TEST_CASE("score_frame examples") {
  const CameraIntrinsics k{500, 500, 320, 240, 640, 480};
  std::vector<VisibleCorner> centered{{0, 320, 240, 1}, {1, 320, 240, 1}};
  CHECK(score_frame(centered, k).center_dist() == 0.0);
  std::vector<VisibleCorner> square{{0, 100, 100, 1}, {1, 200, 100, 1}, {2, 200, 200, 1}, {3, 100, 200, 1}};
  CHECK(score_frame(square, k).vis_area() == doctest::Approx(10000.0));
  CHECK(!score_frame({}, k).valid());
}

TEST_CASE("lex_better examples") {
  CHECK(!lex_better(FrameScore(8, 10, 200), FrameScore(8, 5, 100)));
  CHECK(lex_better(FrameScore(8, 5, 100), FrameScore(8, 10, 200)));
  CHECK(!lex_better(FrameScore(7, 1, 500), FrameScore(8, 100, 10)));
  CHECK(lex_better(FrameScore(8, 5, 200), FrameScore(8, 5, 100)));
  CHECK(lex_better(FrameScore(1, 300, 0), FrameScore::none()));
  CHECK(!lex_better(FrameScore::none(), FrameScore(1, 300, 0)));
  CHECK(!lex_better(FrameScore::none(), FrameScore::none()));
  CHECK(!lex_better(FrameScore(8, 5, 100), FrameScore(8, 5, 100)));
}

TEST_CASE("object behind every camera raises NoVisibleFrame") {
  const auto track = forward_track();
  scene::SceneModel model;
  model.entities.push_back(fixture::make_object("target", "box", Vec3(0, 0, -3), Vec3(1, 1, 1)));
  CHECK_THROWS_AS(select_best_view(model.entities.front(), model, track), NoVisibleFrame);
}

TEST_CASE("property: adding an occluder never increases vis_cnt") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-1.5, 1.5), ext(0.1, 1.2), ang(-kPi, kPi);
  const auto track = fixture::three_frame_track();
  const auto target = fixture::make_object("target", "cube", Vec3(0, 0, 0.5), Vec3(1, 1, 1));
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<scene::SceneEntity> occluders;
    for (int j = 0; j < 3; ++j) {
      occluders.push_back(fixture::make_object("occ" + std::to_string(j), "box",
                                               Vec3(pos(rng), pos(rng) - 2, pos(rng) + 0.5),
                                               Vec3(ext(rng), ext(rng), ext(rng)), ang(rng)));
    }
    for (const auto& pose : track.poses) {
      std::size_t prev = visible_corners(target, pose, track, {}).size();
      for (std::size_t n = 1; n <= occluders.size(); ++n) {
        const auto now = visible_corners(target, pose, track, std::span(occluders).first(n));
        REQUIRE(now.size() <= prev);
        for (const auto& c : now) {
          REQUIRE(c.depth > 0);
          REQUIRE(c.u > 0);
          REQUIRE(c.u < track.intrinsics.width);
          REQUIRE(c.v > 0);
          REQUIRE(c.v < track.intrinsics.height);
        }
        prev = now.size();
      }
    }
  }
}

TEST_CASE("world_to_slam mapping is honored by the scorer") {
  // Same three-frame geometry, but the track lives in a scaled, rotated and
  // shifted SLAM frame. Selection must not change.
  auto track = fixture::three_frame_track();
  Sim3Transform sim3;
  sim3.rotation = rot_z(0.7);
  sim3.translation = Vec3(0.3, -1.0, 0.2);
  sim3.scale = 2.5;
  for (auto& pose : track.poses) {
    // X_cam = R (X_world) + t = R (s R_s X_slam + t_s) + t
    pose.translation = pose.rotation * sim3.translation + pose.translation;
    pose.rotation = pose.rotation * sim3.rotation;
    pose.translation /= sim3.scale;
  }
  track.sim3 = sim3;
  const auto model = fixture::three_frame_scene(false);
  CHECK(select_best_view(*model.find_entity("target"), model, track).frame_index == 1);
  const auto blocked = fixture::three_frame_scene(true);
  CHECK(select_best_view(*blocked.find_entity("target"), blocked, track).frame_index != 1);
}

TEST_CASE("camera_facing_yaw turns the model front toward the camera") {
  const auto track = fixture::three_frame_track();
  // Frame 1 looks along +y, so the model should face -y: yaw 0.
  const auto yaw = camera_facing_yaw(track.poses[1], Sim3Transform{});
  REQUIRE(yaw);
  CHECK(*yaw == doctest::Approx(0.0));
  const auto side = fixture::look_at(3, Vec3(-4, 0, 0.5), Vec3(0, 0, 0.5));
  CHECK(*camera_facing_yaw(side, Sim3Transform{}) == doctest::Approx(-kPi / 2));
  CameraPose down;
  down.rotation << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  CHECK(!camera_facing_yaw(down, Sim3Transform{}));
}

TEST_CASE("apply_best_view writes a rigid pose") {
  const auto track = fixture::three_frame_track();
  auto model = fixture::three_frame_scene(false);
  auto& target = model.entities.front();
  apply_best_view(target, select_best_view(target, model, track), track.sim3);
  REQUIRE(target.best_frame_pose);
  CHECK(scene::is_rigid_transform(*target.best_frame_pose, 1e-9));
  CHECK(target.best_view_yaw);
}

TEST_CASE("fixture room: every in-scene entity has a best view") {
  const auto model = scene::parse_scene(read_file(test::fixture_dir() / "room.json"));
  const auto track = load_track(test::fixture_dir() / "track.json");
  CHECK(track.poses.size() == 16);
  for (const auto& e : model.entities) {
    if (!scene::is_in_scene(e.kind)) continue;
    CAPTURE(e.id);
    const auto best = select_best_view(e, model, track);
    CHECK(best.score.vis_cnt() >= 1);
    CHECK(track.image_for(best.frame_index));
  }
}

TEST_CASE("track parsing rejects malformed documents") {
  auto doc = Json::parse(read_file(test::fixture_dir() / "track.json"));
  CHECK_NOTHROW(parse_track(doc.dump()));
  auto bad = doc;
  bad["frames"][3]["index"] = 10;
  CHECK_THROWS_AS(parse_track(bad.dump()), InvariantError);
  bad = doc;
  bad["intrinsics"]["W"] = 640.5;
  CHECK_THROWS_AS(parse_track(bad.dump()), SchemaError);
  bad = doc;
  bad["sim3"]["R"][0] = 3.0;
  CHECK_THROWS_AS(parse_track(bad.dump()), InvariantError);
  bad = doc;
  bad["frames"][0].erase("t_cw");
  CHECK_THROWS_AS(parse_track(bad.dump()), SchemaError);
  bad = doc;
  bad["frames"] = Json::array();
  CHECK_THROWS_AS(parse_track(bad.dump()), InvariantError);
}

TEST_CASE("track JSON round trip") {
  const auto track = load_track(test::fixture_dir() / "track.json");
  const auto again = parse_track(track_to_json(track, test::fixture_dir()).dump(), test::fixture_dir());
  REQUIRE(again.poses.size() == track.poses.size());
  for (std::size_t i = 0; i < track.poses.size(); ++i) {
    CHECK(again.poses[i].frame_index == track.poses[i].frame_index);
    CHECK((again.poses[i].rotation - track.poses[i].rotation).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(again.frame_images[i] == track.frame_images[i]);
  }
}

TEST_CASE("annotate_frame draws a green outline without touching the input") {
  const Raster blank(640, 480, {255, 255, 255, 255});
  const Polygon2D square{{Vec2(200, 150), Vec2(400, 150), Vec2(400, 350), Vec2(200, 350)}};
  const auto out = annotate_frame(blank, square, "sofa");
  CHECK(out.width() == 640);
  CHECK(out.height() == 480);
  CHECK(blank.at(300, 150) == Rgba{255, 255, 255, 255});
  const std::array<std::pair<int, int>, 4> midpoints{{{300, 150}, {400, 250}, {300, 350}, {200, 250}}};
  for (auto [x, y] : midpoints) {
    CHECK(out.at(x, y) == kAnnotationGreen);
  }
  CHECK(out.at(300, 250) == Rgba{255, 255, 255, 255});
  // Label pixels land above the top edge.
  bool label = false;
  for (int y = 120; y < 148; ++y) {
    for (int x = 150; x < 350; ++x) label = label || out.at(x, y) == kAnnotationGreen;
  }
  CHECK(label);
}

TEST_CASE("annotate_frame handles degenerate hulls") {
  const Raster blank(64, 48, {0, 0, 0, 255});
  const auto seg = annotate_frame(blank, Polygon2D{{Vec2(5, 20), Vec2(50, 20)}}, "x");
  CHECK(seg.at(25, 20) == kAnnotationGreen);
  CHECK(seg.width() == 64);
  const auto dot = annotate_frame(blank, Polygon2D{{Vec2(0, 0)}}, "edge");
  CHECK(dot.at(0, 0) == kAnnotationGreen);
  CHECK(annotate_frame(blank, Polygon2D{}, "none") == blank);
}

TEST_CASE("annotate_frame_png validates its input") {
  const CameraIntrinsics k{500, 500, 320, 240, 640, 480};
  const Polygon2D tri{{Vec2(10, 10), Vec2(100, 10), Vec2(50, 80)}};
  CHECK_THROWS_AS(annotate_frame_png("not a png", k, tri, "x"), ImageDecodeError);
  CHECK_THROWS_AS(annotate_frame_png(encode_png(Raster(320, 240)), k, tri, "x"), ImageDecodeError);
  const auto frame = read_file(test::fixture_dir() / "frames" / "000000.png");
  const auto out = annotate_frame_png(frame, k, tri, "chair");
  CHECK(out.at(55, 10) == kAnnotationGreen);
  CHECK(decode_png(encode_png(out)) == out);
}

TEST_CASE("annotated frame path and bounding rectangle") {
  CHECK(annotated_frame_path("/tmp/frames/000120.png", "obj_3") == "/tmp/frames/000120_obj_3_bestview.png");
  const auto r = bounding_rect(Polygon2D{{Vec2(3, 9), Vec2(-1, 4), Vec2(7, 5)}});
  CHECK(r.min == Vec2(-1, 4));
  CHECK(r.max == Vec2(7, 9));
}
