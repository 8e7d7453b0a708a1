// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <fmt/format.h>

#include <chrono>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include "bestview_fixture.hpp"
#include "oracles.hpp"
#include "roomforge/compose/compose.hpp"
#include "roomforge/core/error.hpp"
#include "roomforge/core/hash.hpp"
#include "roomforge/gen/mock_backend.hpp"
#include "roomforge/geometry/geometry.hpp"
#include "roomforge/service/rest.hpp"
#include "roomforge/style/mock_llm.hpp"
#include "roomforge/style/style_mapping.hpp"
#include "scripted_llm.hpp"
#include "test_paths.hpp"

using namespace roomforge;
using namespace std::chrono_literals;
using compose::Flip;
using scene::EntityKind;
using scene::OrientedBox;
using scene::SceneModel;

namespace {

// Pinned tolerances.
constexpr double kIouOracleTol = 0.02;       // |analytic - voxel|
constexpr int kIouVoxels = 128;              // voxel grid per axis, criterion 1
constexpr double kIouRuntimeLimitS = 30.0;
constexpr double kYawMinIou = 0.95;
constexpr int kYawOracleVoxels = 64;
constexpr double kGuardTol = 1e-6;
constexpr double kGroundTol = 1e-6;
constexpr double kWallOffsetTol = 1e-9;
constexpr double kFlipOracleTol = 0.02;
constexpr int kFlipOracleVoxels = 64;
constexpr double kPipelineLimitS = 60.0;
constexpr double kBestViewTieTol = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures without stopping at the first one.
struct Checker {
  Outcome out;
  int failures = 0;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    out.pass = false;
    if (failures++ < 3) out.detail += (out.detail.empty() ? "" : "; ") + what;
  }
  Outcome done(std::string summary) {
    if (out.pass) out.detail = std::move(summary);
    else if (failures > 3) out.detail += fmt::format("; {} more", failures - 3);
    return out;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

oracle::YawBox to_oracle(const OrientedBox& b) {
  return {b.center.x(), b.center.y(), b.center.z(), b.size.x(), b.size.y(), b.size.z(), b.yaw};
}

SceneModel fixture_scene() { return scene::parse_scene(read_file(test::fixture_dir() / "room.json")); }

gen::MockOptions mock_options() {
  gen::MockOptions options;
  options.llm = style::heuristic_responder;
  return options;
}

// ---- 1 ----
Outcome iou_oracle() {
  Checker c;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), ext(0.2, 2.5), ang(-kPi, kPi), jitter(-0.8, 0.8);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const OrientedBox a{{pos(rng), pos(rng), pos(rng)}, {ext(rng), ext(rng), ext(rng)}, ang(rng)};
    // Most pairs overlap; a few land apart and must agree on zero.
    const OrientedBox b{a.center + Vec3(jitter(rng), jitter(rng), jitter(rng)) * (i % 10 == 0 ? 4.0 : 1.0),
                        {ext(rng), ext(rng), ext(rng)},
                        ang(rng)};
    const double diff = std::abs(geometry::box_iou(a, b) - oracle::voxel_iou(to_oracle(a), to_oracle(b), kIouVoxels));
    worst = std::max(worst, diff);
    c.expect(diff <= kIouOracleTol, fmt::format("pair {} differs by {:.4f}", i, diff));
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < kIouRuntimeLimitS, fmt::format("took {:.1f} s", elapsed));
  return c.done(fmt::format("200 pairs, max |analytic - voxel| = {:.4f}, {:.1f} s", worst, elapsed));
}

// ---- 2 ----
Outcome best_view() {
  Checker c;
  const auto track = fixture::three_frame_track();
  auto oracle_best = [&](const SceneModel& model) {
    const auto& object = *model.find_entity("target");
    std::vector<scene::SceneEntity> others;
    for (const auto& e : model.entities) {
      if (e.id != object.id) others.push_back(e);
    }
    std::vector<fixture::OracleScore> scores;
    for (const auto& pose : track.poses) {
      scores.push_back(fixture::score(object, others, pose, track.intrinsics, bestview::kDefaultDepthMargin));
    }
    return track.poses[fixture::best_index(scores, kBestViewTieTol)].frame_index;
  };

  const auto open = fixture::three_frame_scene(false);
  const auto blocked = fixture::three_frame_scene(true);
  const auto first = bestview::select_best_view(*open.find_entity("target"), open, track);
  c.expect(first.frame_index == 1, fmt::format("open scene picked frame {}", first.frame_index));
  c.expect(first.score.vis_cnt() == 8, "centered frame does not see all 8 corners");
  c.expect(oracle_best(open) == first.frame_index, "open scene disagrees with the brute-force oracle");
  const auto moved = bestview::select_best_view(*blocked.find_entity("target"), blocked, track);
  c.expect(moved.frame_index != 1, "occluder did not flip the choice");
  c.expect(oracle_best(blocked) == moved.frame_index, "occluded scene disagrees with the brute-force oracle");

  for (const auto* model : {&open, &blocked}) {
    const auto& object = *model->find_entity("target");
    const auto chosen = bestview::select_best_view(object, *model, track);
    for (const auto& s : bestview::score_all_frames(object, *model, track)) {
      c.expect(!bestview::lex_better(s, chosen.score), "a frame lex-dominates the selection");
    }
    for (int run = 0; run < 10; ++run) {
      const auto again = bestview::select_best_view(object, *model, track);
      c.expect(again.frame_index == chosen.frame_index && again.score == chosen.score, "selection is not deterministic");
    }
  }
  return c.done(fmt::format("frame 1 chosen, occluder flips to frame {}, lex-dominant, stable over 10 runs",
                            moved.frame_index));
}

// ---- 3 ----
Outcome yaw_recovery() {
  Checker c;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> size(0.2, 3.0), ratio(1.2, 4.0), angle(-kPi, kPi), iso(0.2, 5.0);
  std::uniform_int_distribution<int> step(0, compose::kYawSteps - 1);
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double a = size(rng);
    Vec3 extents(a * ratio(rng), a, size(rng));
    if (rng() % 2) std::swap(extents.x(), extents.y());
    const double theta = angle(rng);
    const int k = step(rng);
    const OrientedBox scaffold{{size(rng), size(rng), extents.z() / 2}, extents, compose::yaw_grid(theta)[k]};
    const Vec3 mesh = extents / iso(rng);
    const Vec3 scaled = compose::longest_edge_scale(mesh, scaffold) * mesh;
    const auto found = compose::yaw_search(scaled, scaffold, theta);
    const double voxel = oracle::voxel_iou(to_oracle({scaffold.center, scaled, found.yaw}), to_oracle(scaffold),
                                           kYawOracleVoxels);
    worst = std::min(worst, std::min(found.iou, voxel));
    c.expect(found.yaw == scaffold.yaw, fmt::format("box {}: recovered {:.6f}, want {:.6f}", i, found.yaw, scaffold.yaw));
    c.expect(found.iou >= kYawMinIou && voxel >= kYawMinIou, fmt::format("box {}: IoU {:.4f}", i, found.iou));
  }
  return c.done(fmt::format("100/100 exact, min IoU {:.4f}", worst));
}

// ---- 4 ----
Outcome guard_grounding() {
  Checker c;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> ext(0.02, 4.0), pos(-5, 5), angle(-kPi, kPi), unit(0, 1);
  double worst_guard = -1e9, worst_ground = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec3 mesh(ext(rng), ext(rng), ext(rng));
    if (i % 3 == 0) mesh[static_cast<int>(rng() % 3)] *= 0.05;
    const Vec3 size(ext(rng), ext(rng), ext(rng));
    const OrientedBox scaffold{{pos(rng), pos(rng), size.z() / 2 + unit(rng)}, size, angle(rng)};
    const auto reg = compose::register_object(mesh, scaffold, scaffold.yaw + angle(rng) * 0.3);
    for (int a = 0; a < 3; ++a) {
      const double excess = reg.extents[a] - compose::kGuardFactor * scaffold.size[a];
      worst_guard = std::max(worst_guard, excess);
      c.expect(excess <= kGuardTol, fmt::format("case {} axis {} exceeds the guard by {:.3g}", i, a, excess));
    }
    const double ground = std::abs(reg.box().bottom() - scaffold.bottom());
    worst_ground = std::max(worst_ground, ground);
    c.expect(ground <= kGroundTol, fmt::format("case {} bottom off by {:.3g}", i, ground));
  }
  return c.done(fmt::format("1000 cases, 0 violations (max guard excess {:.3g}, max bottom error {:.3g})",
                            std::max(worst_guard, 0.0), worst_ground));
}

// ---- 5 ----
Outcome wall_offset_and_flips() {
  Checker c;
  // Walls: the fixture room plus a rotated irregular pentagon.
  std::vector<SceneModel> rooms = {fixture_scene()};
  {
    const std::vector<Vec3> pts = {{0, 0, 0}, {4, -0.5, 0}, {5, 2.5, 0}, {2, 4.5, 0}, {-0.7, 3, 0}};
    SceneModel room;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      scene::WallSegment w;
      w.id = fmt::format("p{}", i);
      w.a = rot_z(0.7) * pts[i];
      w.b = rot_z(0.7) * pts[(i + 1) % pts.size()];
      w.height = 2.6;
      room.walls.push_back(w);
    }
    rooms.push_back(room);
  }
  int panels = 0;
  for (const auto& room : rooms) {
    // Interior reference point: mean of the wall endpoints (convex rooms).
    Vec2 inside = Vec2::Zero();
    for (const auto& w : room.walls) inside += w.a.head<2>();
    inside /= static_cast<double>(room.walls.size());
    for (const auto& panel : compose::place_walls(room)) {
      const auto& w = *std::find_if(room.walls.begin(), room.walls.end(),
                                    [&](const auto& x) { return x.id == panel.wall_id; });
      const Vec2 d = (w.b - w.a).head<2>().normalized();
      Vec2 n(d.y(), -d.x());
      if ((inside - w.a.head<2>()).dot(n) > 0) n = -n;  // outward
      for (const auto& corner : panel.corners) {
        const double offset = (corner - w.a).head<2>().dot(n);
        c.expect(std::abs(offset - compose::kWallOffset) <= kWallOffsetTol,
                 fmt::format("{}: corner offset {:.9f}", panel.wall_id, offset));
      }
      ++panels;
    }
  }

  struct Case {
    const char* name;
    Vec3 mesh;
    OrientedBox scaffold;
  };
  const Case cases[] = {
      {"rug", {2.0, 0.05, 1.0}, {{0, 0, 0.025}, {2.0, 1.0, 0.05}, 0.4}},
      {"wall frame", {1.0, 0.8, 0.05}, {{2, 1, 1.5}, {1.0, 0.05, 0.8}, 1.2}},
      {"tabletop", {0.04, 0.8, 1.2}, {{-1, 0, 0.72}, {1.2, 0.8, 0.04}, -0.3}},
  };
  std::vector<std::string> picks;
  for (const auto& fx : cases) {
    const Vec3 scaled = compose::longest_edge_scale(fx.mesh, fx.scaffold) * fx.mesh;
    const auto found = compose::flat_orientation_search(scaled, fx.scaffold, fx.scaffold.yaw);
    // Independent argmax over every permutation and grid yaw.
    double best = -1.0;
    Flip best_flip = Flip::none;
    for (auto f : compose::kFlips) {
      for (double yaw : compose::yaw_grid(fx.scaffold.yaw)) {
        const double v = oracle::voxel_iou(to_oracle({fx.scaffold.center, compose::flip_extents(scaled, f), yaw}),
                                           to_oracle(fx.scaffold), kFlipOracleVoxels);
        if (v > best + 1e-12) {
          best = v;
          best_flip = f;
        }
      }
    }
    const double chosen = oracle::voxel_iou(
        to_oracle({fx.scaffold.center, compose::flip_extents(scaled, found.flip), found.yaw}), to_oracle(fx.scaffold),
        kFlipOracleVoxels);
    c.expect(found.flip == best_flip, fmt::format("{}: chose {}, oracle {}", fx.name, compose::to_string(found.flip),
                                                  compose::to_string(best_flip)));
    c.expect(chosen >= best - kFlipOracleTol, fmt::format("{}: IoU {:.3f} < oracle {:.3f}", fx.name, chosen, best));
    picks.push_back(fmt::format("{}={}", fx.name, compose::to_string(found.flip)));
  }
  return c.done(fmt::format("{} panels at 0.05 m outward; flips {}", panels, fmt::join(picks, ", ")));
}

// Runs the fixture room through the service with the mock backend, confirms
// every red flag and returns the manifest.
std::string full_pipeline(std::uint64_t seed) {
  test::TempDir tmp;
  const auto dir = tmp.path() / "session";
  service::Session::create(dir, fixture_scene(), bestview::load_track(test::fixture_dir() / "track.json"));
  service::Session session(dir);
  gen::MockBackend mock(mock_options());
  service::AuthoringService svc(session, mock, {{}, false, seed});
  svc.set_style("pirate ship cabin", std::nullopt);
  const auto run = svc.run_pipeline();
  if (run.state != "finished") throw std::runtime_error("pipeline " + run.state + ": " + run.error.value_or(""));
  for (const auto& [id, p] : run.entities) {
    if (p.stage == service::Stage::failed) throw std::runtime_error(id + " failed: " + p.error.value_or(""));
  }
  const auto report = svc.status_report();
  for (const auto& id : report["needs_attention"]) svc.confirm(id.get<std::string>());
  return svc.composed_manifest();
}

// ---- 6 ----
Outcome determinism() {
  Checker c;
  const auto scene = fixture_scene();
  const auto count = [&](EntityKind k) {
    return std::count_if(scene.entities.begin(), scene.entities.end(), [&](const auto& e) { return e.kind == k; });
  };
  c.expect(count(EntityKind::object) == 15 && scene.walls.size() == 4 && count(EntityKind::door) == 3,
           "fixture is not 15 objects, 4 walls, 3 doors");
  const auto t0 = std::chrono::steady_clock::now();
  const auto first = full_pipeline(17);
  const auto second = full_pipeline(17);
  const double elapsed = seconds_since(t0);
  c.expect(first == second, "manifests differ");
  const auto doc = parse_json(first);
  compose::validate_manifest(doc);
  c.expect(doc["unplaced"].empty(), fmt::format("{} unplaced entries", doc["unplaced"].size()));
  c.expect(elapsed < kPipelineLimitS, fmt::format("took {:.1f} s", elapsed));
  return c.done(fmt::format("2 runs byte-identical (sha256 {}...), {:.1f} s", sha256_hex(first).substr(0, 12), elapsed));
}

// ---- 7 ----
Outcome budgets() {
  Checker c;
  test::TempDir tmp;
  gen::AssetStore store(tmp.path());
  gen::MockBackend seeder;
  std::vector<std::string> images;
  for (int i = 0; i < 50; ++i) {
    images.push_back(
        seeder.execute({gen::RequestKind::stylized_image, {{"prompt", fmt::format("seed {}", i)}}, 0}, store, {})
            .asset->asset_id);
  }
  gen::MockOptions options;
  options.latency = {{gen::RequestKind::stylized_image, 25ms}, {gen::RequestKind::image_to_3d, 50ms}};
  gen::MockBackend backend(options);
  gen::Dispatcher dispatcher(backend, store);
  std::vector<gen::JobHandle> handles;
  std::mutex m;
  {
    std::vector<std::jthread> submitters;
    for (int t = 0; t < 4; ++t) {
      submitters.emplace_back([&, t] {
        for (int i = t; i < 50; i += 4) {
          auto a = dispatcher.submit({gen::RequestKind::stylized_image, {{"prompt", fmt::format("job {}", i)}}, 1});
          auto b = dispatcher.submit({gen::RequestKind::image_to_3d, {{"image", images[i]}}, 1});
          std::lock_guard lock(m);
          handles.push_back(a);
          handles.push_back(b);
        }
      });
    }
  }
  for (auto& h : handles) h.wait();
  const int img = backend.max_in_flight(gen::RequestKind::stylized_image);
  const int mesh = backend.max_in_flight(gen::RequestKind::image_to_3d);
  c.expect(img == 2, fmt::format("stylized-image peak {}", img));
  c.expect(mesh == 9, fmt::format("image-to-3D peak {}", mesh));
  c.expect(backend.calls(gen::RequestKind::stylized_image) == 50 && backend.calls(gen::RequestKind::image_to_3d) == 50,
           "not every queued job ran once");
  return c.done(fmt::format("50+50 queued jobs, peak in flight {} / {}", img, mesh));
}

// ---- 8 ----
Outcome mapping_validation() {
  Checker c;
  const auto scene = fixture_scene();
  const std::array<std::string_view, 7> columns = {"object_id",        "label",             "object_function", "replica",
                                                   "replica_function", "appearance_prompt", "collision_risk"};
  c.expect(scene::MappingRow::kColumns == columns, "column order differs");

  style::MappingTable table;
  for (const auto& e : scene.entities) {
    if (scene::is_in_scene(e.kind)) table.objects.push_back({e.id, e.label, "f", "r", "rf", "appearance", true});
  }
  table.skybox = {"sea", "no text"};
  table.wall_texture = "planks";
  table.floor_texture = "deck";
  const auto reply = style::table_to_json(table);
  const auto parsed = style::parse_mapping_reply(reply.dump(), scene);
  int forced = 0;
  for (const auto& row : parsed.table.objects) {
    const auto& e = *scene.find_entity(row.object_id);
    const bool exempt = style::never_collision_risk(e);
    forced += exempt;
    c.expect(row.collision_risk != exempt, fmt::format("{} ({}) collision_risk = {}", e.id, e.label, row.collision_risk));
  }
  c.expect(forced >= 3, fmt::format("{} exempt rows, the fixture has 3 doors", forced));

  // Swapping two columns or dropping one is rejected.
  auto swapped = reply;
  std::swap(swapped["objects"][0][5], swapped["objects"][0][6]);
  auto short_row = reply;
  short_row["objects"][0].erase(6);
  for (const auto* bad : {&swapped, &short_row}) {
    bool rejected = false;
    try {
      style::parse_mapping_reply(bad->dump(), scene);
    } catch (const ValidationError& e) {
      rejected = std::string(e.path()).starts_with("objects[0]");
    }
    c.expect(rejected, "malformed row accepted");
  }

  std::mt19937 rng(8);
  const char* words[] = {"Oak", "Neon", "Rust", "Velvet", "Stone", "Brass", "Moss", "Chrome", "Ivory", "Teal", "Jade"};
  int in_range = 0, fallback = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < n; ++i) text += (i ? ", " : "") + std::string(words[rng() % 11]);
    test::ScriptedLlm llm({text, text});
    scene::StyleSpec intent;
    intent.raw_text = "any";
    const auto out = style::extract_style(intent, llm);
    const bool ok = out.keywords.size() >= style::kMinKeywords && out.keywords.size() <= style::kMaxKeywords &&
                    !out.degraded;
    const bool fell_back = out.degraded && out.keywords == std::vector<std::string>{std::string(style::kDefaultStyle)};
    in_range += ok;
    fallback += fell_back;
    c.expect(ok != fell_back, fmt::format("trial {}: {} keywords, degraded={}", trial, out.keywords.size(), out.degraded));
  }
  return c.done(fmt::format("column order verbatim, {} exempt rows forced false, keywords {} in range / {} fallback",
                            forced, in_range, fallback));
}

// ---- 9 ----
Outcome service_gate() {
  Checker c;
  test::TempDir tmp;
  const auto dir = tmp.path() / "session";
  service::Session::create(dir, fixture_scene(), bestview::load_track(test::fixture_dir() / "track.json"));
  service::Session session(dir);
  gen::MockBackend mock(mock_options());
  service::AuthoringService svc(session, mock, {{}, false, 3});
  service::RestApi api(svc);
  auto call = [&](std::string method, std::string path, std::string body = {}) {
    return api.handle({std::move(method), std::move(path), std::move(body), "application/json", {}});
  };
  c.expect(call("PUT", "/api/style", R"({"text": "pirate ship"})").status == 200, "style rejected");
  c.expect(call("POST", "/api/generate").status == 202, "generate rejected");
  svc.wait_idle();

  auto expected = parse_json(call("GET", "/api/status").body)["needs_attention"].get<std::vector<std::string>>();
  c.expect(!expected.empty(), "no entity was red-flagged");
  const auto flagged = expected.size();
  int blocked_responses = 0;
  while (!expected.empty()) {
    const auto r = call("GET", "/api/composed");
    const auto doc = parse_json(r.body);
    c.expect(r.status == 409 && doc["code"] == "BlockedByAttention", fmt::format("status {} while flagged", r.status));
    c.expect(doc["needs_attention"] == Json(expected), "block lists the wrong ids");
    blocked_responses += r.status == 409;
    c.expect(call("POST", "/api/objects/" + expected.back() + "/confirm").status == 200, "confirm failed");
    expected.pop_back();
  }
  const auto r = call("GET", "/api/composed");
  c.expect(r.status == 200, fmt::format("status {} after confirming everything", r.status));
  try {
    compose::validate_manifest(parse_json(r.body));
  } catch (const Error& e) {
    c.expect(false, fmt::format("manifest invalid at {}: {}", e.path(), e.what()));
  }
  return c.done(fmt::format("blocked {} times listing {} ids, then a schema-valid manifest", blocked_responses, flagged));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"IoU oracle equivalence", iou_oracle},
      {"Best-view correctness", best_view},
      {"Yaw recovery", yaw_recovery},
      {"Guard + grounding fuzz", guard_grounding},
      {"Wall offset + flat flips", wall_offset_and_flips},
      {"End-to-end determinism", determinism},
      {"Concurrency budgets", budgets},
      {"Mapping validation", mapping_validation},
      {"Service gate", service_gate},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, fmt::format("threw: {}", e.what())};
    }
    failed += !out.pass;
    std::cout << fmt::format("[{}] {}. {}: {}", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail)
              << std::endl;
  }
  return failed;
}
