#include "roomforge/service/service.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "roomforge/core/error.hpp"
#include "roomforge/core/raster.hpp"
#include "roomforge/style/style_mapping.hpp"

namespace roomforge::service {

namespace fs = std::filesystem;
using scene::EntityKind;
using scene::ObjectStatus;
using scene::SceneEntity;
using scene::SceneModel;

namespace {

constexpr const char* kEnvironmentPrompts = "environment_prompts";

SceneEntity& entity_or_throw(SceneModel& scene, const std::string& id) {
  auto* e = scene.find_entity(id);
  if (!e) throw UnknownEntity(fmt::format("no entity '{}'", id), id);
  return *e;
}

const SceneEntity& entity_or_throw(const SceneModel& scene, const std::string& id) {
  const auto* e = scene.find_entity(id);
  if (!e) throw UnknownEntity(fmt::format("no entity '{}'", id), id);
  return *e;
}

std::optional<std::string> extra_string(const SceneEntity& e, const char* key) {
  if (auto it = e.extra.find(key); it != e.extra.end() && it->is_string()) return it->get<std::string>();
  return std::nullopt;
}

// Every asset id the scene points at, directly or through a texture or
// playlist document.
std::set<std::string> referenced_assets(const SceneModel& scene, const gen::AssetStore& store) {
  std::set<std::string> ids;
  for (const auto& e : scene.entities) {
    if (e.asset_id) ids.insert(*e.asset_id);
    for (const char* key : {"preview_image", "reference_frame"}) {
      if (auto v = extra_string(e, key)) ids.insert(*v);
    }
  }
  for (const auto* v : {&scene.environment.wall_texture, &scene.environment.floor_texture, &scene.environment.skybox}) {
    if (*v) ids.insert(**v);
  }
  if (scene.style && scene.style->reference_image) ids.insert(*scene.style->reference_image);
  std::vector<std::string> pending(ids.begin(), ids.end());
  while (!pending.empty()) {
    const auto record = store.find(pending.back());
    pending.pop_back();
    if (!record) continue;
    for (auto& dep : store.dependencies(*record)) {
      if (ids.insert(dep).second) pending.push_back(dep);
    }
  }
  return ids;
}

std::string adjustment_text(const SceneEntity& e) {
  auto it = e.extra.find("adjustments");
  if (it == e.extra.end() || !it->is_array() || it->empty()) return {};
  std::vector<std::string> parts;
  for (const auto& a : *it) parts.push_back(a.get<std::string>());
  return fmt::format(" Adjustments requested by the user: {}.", fmt::join(parts, "; "));
}

std::string next_id(const SceneModel& scene, EntityKind kind) {
  const std::string prefix = kind == EntityKind::object ? "obj_" : std::string(scene::to_string(kind)) + "_";
  for (int i = 0;; ++i) {
    auto id = prefix + std::to_string(i);
    if (!scene.find_entity(id) && !scene.find_wall(id)) return id;
  }
}

Json progress_json(const EntityProgress& p) {
  return {{"stage", to_string(p.stage)},
          {"degraded", p.degraded},
          {"error", p.error ? Json(*p.error) : Json(nullptr)},
          {"best_view", p.best_view}};
}

std::int64_t to_millis(std::chrono::system_clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::pending: return "pending";
    case Stage::bestview: return "bestview";
    case Stage::mapping: return "mapping";
    case Stage::image: return "image";
    case Stage::mesh: return "mesh";
    case Stage::registered: return "registered";
    case Stage::failed: return "failed";
  }
  return "pending";
}

Json PipelineRun::to_json() const {
  Json entities_json = Json::object();
  for (const auto& [id, p] : entities) entities_json[id] = progress_json(p);
  return {{"run_id", run_id},
          {"state", state},
          {"error", error ? Json(*error) : Json(nullptr)},
          {"compose", compose ? Json(*compose) : Json(nullptr)},
          {"environment_error", environment_error ? Json(*environment_error) : Json(nullptr)},
          {"entities", entities_json},
          {"started_ms", to_millis(started)},
          {"finished_ms", finished ? Json(to_millis(*finished)) : Json(nullptr)}};
}

ScaffoldPatch ScaffoldPatch::from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("patch must be a JSON object", "$");
  ScaffoldPatch patch;
  auto vec = [&](const char* key) -> std::optional<Vec3> {
    auto it = doc.find(key);
    if (it == doc.end()) return std::nullopt;
    if (!it->is_array() || it->size() != 3 || !std::all_of(it->begin(), it->end(), [](const Json& v) {
          return v.is_number();
        })) {
      throw ValidationError(fmt::format("{} must be an array of 3 numbers", key), key);
    }
    return Vec3((*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>());
  };
  for (const auto& [key, value] : doc.items()) {
    if (key != "center" && key != "size" && key != "yaw" && key != "label") {
      throw ValidationError(fmt::format("unknown field '{}'", key), key);
    }
  }
  patch.center = vec("center");
  patch.size = vec("size");
  if (auto it = doc.find("yaw"); it != doc.end()) {
    if (!it->is_number()) throw ValidationError("yaw must be a number", "yaw");
    patch.yaw = it->get<double>();
  }
  if (auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>().empty()) throw ValidationError("label must be a non-empty string", "label");
    patch.label = it->get<std::string>();
  }
  return patch;
}

AuthoringService::AuthoringService(Session& session, gen::Backend& backend, ServiceOptions options)
    : session_(session),
      backend_(backend),
      options_(std::move(options)),
      dispatcher_(backend_, session_.store(), options_.dispatcher),
      llm_(dispatcher_, options_.llm_attachments) {
  recover();
}

AuthoringService::~AuthoringService() {
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, token] : cancels_) token.cancel();
  }
  dispatcher_.shutdown();
  threads_.clear();
}

void AuthoringService::recover() {
  session_.commit("recovery", "reset_interrupted", [](SceneModel& scene) {
    for (auto& e : scene.entities) {
      if (e.status == ObjectStatus::generating) e = scene::advance_status(e, ObjectStatus::pending);
    }
  });
}

void AuthoringService::launch(std::function<void()> work) {
  std::lock_guard lock(mutex_);
  ++active_tasks_;
  threads_.emplace_back([this, work = std::move(work)] {
    try {
      work();
    } catch (...) {
      // Workers record their own failures; nothing may escape a thread.
    }
    std::lock_guard done(mutex_);
    --active_tasks_;
    idle_cv_.notify_all();
  });
}

void AuthoringService::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return active_tasks_ == 0; });
}

std::optional<PipelineRun> AuthoringService::last_run() const {
  std::lock_guard lock(mutex_);
  if (!run_) return std::nullopt;
  auto run = *run_;
  for (auto& [id, p] : run.entities) {
    if (auto it = progress_.find(id); it != progress_.end()) p = it->second;
  }
  return run;
}

void AuthoringService::update_progress(const std::string& id, const std::function<void(EntityProgress&)>& fn) {
  std::lock_guard lock(mutex_);
  fn(progress_[id]);
}

void AuthoringService::invalidate_composed() {
  std::error_code ec;
  fs::remove(session_.dir() / "composed.json", ec);
  std::lock_guard lock(mutex_);
  for (auto& [id, p] : progress_) {
    if (p.stage == Stage::registered) p.stage = Stage::mesh;
  }
}

std::pair<std::uint64_t, gen::CancelToken> AuthoringService::begin_generation(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (auto it = cancels_.find(id); it != cancels_.end()) it->second.cancel();
  const auto generation = ++generation_counter_;
  generation_[id] = generation;
  gen::CancelToken token;
  cancels_[id] = token;
  return {generation, token};
}

bool AuthoringService::is_latest(const std::string& id, std::uint64_t generation) const {
  std::lock_guard lock(mutex_);
  auto it = generation_.find(id);
  return it != generation_.end() && it->second == generation;
}

void AuthoringService::drop_orphans(const std::vector<std::string>& asset_ids) {
  const auto referenced = referenced_assets(*session_.snapshot(), session_.store());
  for (const auto& id : asset_ids) {
    if (!referenced.count(id)) session_.store().remove(id);
  }
}

// ---- editing ----

SceneEntity AuthoringService::edit_scaffold(const std::string& id, const ScaffoldPatch& patch) {
  session_.commit("user", "edit_scaffold", [&](SceneModel& scene) {
    auto& e = entity_or_throw(scene, id);
    if (patch.center) e.box.center = *patch.center;
    if (patch.size) e.box.size = *patch.size;
    if (patch.yaw) e.box.yaw = *patch.yaw;
    if (patch.label && *patch.label != e.label) {
      e.label = *patch.label;
      if (e.mapping) e.mapping_stale = true;
    }
    if (e.kind == EntityKind::wall) {
      for (auto& w : scene.walls) {
        if (w.id == id) {
          auto updated = scene::box_to_wall(w.id, e.box);
          updated.extra = w.extra;
          w = updated;
        }
      }
    }
  });
  invalidate_composed();
  return entity_or_throw(*session_.snapshot(), id);
}

SceneEntity AuthoringService::add_scaffold(const scene::OrientedBox& box, const std::string& label, EntityKind kind,
                                           std::optional<std::string> host_wall_id) {
  if (label.empty()) throw ValidationError("label must be non-empty", "label");
  if (kind == EntityKind::wall) throw ValidationError("walls cannot be added as scaffolds", "kind");
  std::string id;
  session_.commit("user", "add_scaffold", [&](SceneModel& scene) {
    SceneEntity e;
    e.id = id = next_id(scene, kind);
    e.kind = kind;
    e.label = label;
    e.box = box;
    e.host_wall_id = host_wall_id;
    scene.entities.push_back(std::move(e));
  });
  invalidate_composed();
  return entity_or_throw(*session_.snapshot(), id);
}

void AuthoringService::delete_scaffold(const std::string& id) {
  std::vector<std::string> released;
  session_.commit("user", "delete_scaffold", [&](SceneModel& scene) {
    const auto& e = entity_or_throw(scene, id);
    if (e.kind == EntityKind::wall) {
      std::vector<std::string> dependents;
      for (const auto& other : scene.entities) {
        if (other.host_wall_id == id) dependents.push_back(other.id);
      }
      if (!dependents.empty()) {
        throw Conflict(fmt::format("wall '{}' still hosts {}", id, fmt::join(dependents, ", ")), id);
      }
      std::erase_if(scene.walls, [&](const scene::WallSegment& w) { return w.id == id; });
    }
    released.clear();
    if (e.asset_id) released.push_back(*e.asset_id);
    for (const char* key : {"preview_image", "reference_frame"}) {
      if (auto v = extra_string(e, key)) released.push_back(*v);
    }
    std::erase_if(scene.entities, [&](const SceneEntity& x) { return x.id == id; });
  });
  {
    // Any in-flight work for the entity is cancelled and its result dropped.
    std::lock_guard lock(mutex_);
    if (auto it = cancels_.find(id); it != cancels_.end()) it->second.cancel();
    generation_[id] = ++generation_counter_;
    progress_.erase(id);
  }
  drop_orphans(released);
  invalidate_composed();
}

scene::StyleSpec AuthoringService::set_style(const std::string& text, const std::optional<std::string>& reference_png) {
  if (text.empty() && !reference_png) throw ValidationError("style needs text or a reference image", "text");
  std::optional<std::string> image_id;
  if (reference_png) {
    decode_png(*reference_png);  // throws ImageDecodeError
    image_id = session_.store().put(gen::AssetKind::image, *reference_png, ".png", {{"kind", "style_reference"}}).asset_id;
  }
  session_.commit("user", "set_style", [&](SceneModel& scene) {
    scene::StyleSpec style;
    style.raw_text = text;
    style.reference_image = image_id;
    scene.style = style;
    for (auto& e : scene.entities) {
      if (e.mapping) e.mapping_stale = true;
    }
  });
  return *session_.snapshot()->style;
}

SceneEntity AuthoringService::confirm(const std::string& id) {
  session_.commit("user", "confirm", [&](SceneModel& scene) {
    auto& e = entity_or_throw(scene, id);
    e = scene::advance_status(e, ObjectStatus::confirmed);
  });
  return entity_or_throw(*session_.snapshot(), id);
}

// ---- generation ----

std::string AuthoringService::start_pipeline(std::optional<std::uint64_t> seed) {
  const auto snap = session_.snapshot();
  if (!snap->style || (snap->style->raw_text.empty() && !snap->style->reference_image)) {
    throw InvariantError("set a style before generating", "style");
  }
  std::string run_id;
  {
    std::lock_guard lock(mutex_);
    if (run_active_) throw Conflict("a pipeline run is already active", run_ ? run_->run_id : "");
    run_active_ = true;
    run_id = fmt::format("run-{}", ++run_counter_);
    PipelineRun run;
    run.run_id = run_id;
    run.started = std::chrono::system_clock::now();
    for (const auto& e : snap->entities) {
      if (!scene::is_in_scene(e.kind)) continue;
      run.entities[e.id] = {};
      progress_[e.id] = {};
    }
    run_ = std::move(run);
  }
  launch([this, run_id, s = seed.value_or(options_.seed)] { run_body(run_id, s); });
  return run_id;
}

PipelineRun AuthoringService::run_pipeline(std::optional<std::uint64_t> seed) {
  start_pipeline(seed);
  wait_idle();
  return *last_run();
}

void AuthoringService::run_body(const std::string& run_id, std::uint64_t seed) {
  auto finish = [&](std::string state, std::optional<std::string> error) {
    std::lock_guard lock(mutex_);
    if (run_ && run_->run_id == run_id) {
      run_->state = std::move(state);
      run_->error = std::move(error);
      run_->finished = std::chrono::system_clock::now();
    }
    run_active_ = false;
  };

  std::vector<std::string> ids;
  try {
    // Style keywords.
    auto snap = session_.snapshot();
    style::ExtractOptions extract{seed, std::nullopt};
    if (snap->style->reference_image) {
      extract.image_summary = style::describe_reference_image(session_.store().read(*snap->style->reference_image));
    }
    const auto style_spec = style::extract_style(*snap->style, llm_, extract);
    session_.commit("pipeline", "extract_style", [&](SceneModel& scene) { scene.style = style_spec; });

    // Mapping table.
    snap = session_.snapshot();
    for (const auto& e : snap->entities) {
      if (scene::is_in_scene(e.kind)) {
        ids.push_back(e.id);
        update_progress(e.id, [](EntityProgress& p) { p = {Stage::mapping, false, std::nullopt, nullptr}; });
      }
    }
    const auto mapping = style::infer_mapping_table(*snap, style_spec, llm_, seed);
    session_.commit("pipeline", "set_mapping", [&](SceneModel& scene) {
      for (const auto& row : mapping.table.objects) {
        if (auto* e = scene.find_entity(row.object_id)) {
          e->mapping = row;
          e->mapping_stale = false;
        }
      }
      const auto table = style::table_to_json(mapping.table);
      scene.extra[kEnvironmentPrompts] = {{"skybox", table["skybox"]},
                                          {"wall_texture", table["wall_texture"]},
                                          {"floor_texture", table["floor_texture"]}};
    });
  } catch (const std::exception& e) {
    for (const auto& id : ids) update_progress(id, [](EntityProgress& p) { p.stage = Stage::failed; });
    finish("failed", e.what());
    return;
  }

  {
    // Per-entity work and the environment run side by side; the dispatcher
    // enforces the per-kind budgets.
    std::vector<std::jthread> workers;
    for (const auto& id : ids) {
      auto [generation, token] = begin_generation(id);
      workers.emplace_back([this, id, seed, generation, token] { generate_entity(id, seed, generation, token); });
    }
    workers.emplace_back([this, seed] { generate_environment(seed); });
  }

  try {
    composed_manifest();
    std::lock_guard lock(mutex_);
    if (run_) run_->compose = "composed";
    for (auto& [id, p] : progress_) {
      if (p.stage == Stage::mesh) p.stage = Stage::registered;
    }
  } catch (const BlockedByAttention&) {
    std::lock_guard lock(mutex_);
    if (run_) run_->compose = "blocked";
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    if (run_) run_->compose = e.what();
  }
  finish("finished", std::nullopt);
}

void AuthoringService::generate_entity(const std::string& id, std::uint64_t seed, std::uint64_t generation,
                                       const gen::CancelToken& cancel) {
  std::vector<std::string> produced;
  try {
    auto snap = session_.snapshot();
    const auto* found = snap->find_entity(id);
    if (!found) return;
    SceneEntity entity = *found;
    if (!entity.mapping) throw InvariantError(fmt::format("'{}' has no mapping row", id), id);

    session_.commit("pipeline", "start_generation", [&](SceneModel& scene) {
      auto& e = entity_or_throw(scene, id);
      e = scene::advance_status(e, ObjectStatus::generating);
    });

    // Reference frame: best view, annotated. Without it the image is
    // generated from the prompt alone.
    update_progress(id, [](EntityProgress& p) {
      p.stage = Stage::bestview;
      p.error.reset();
      p.degraded = false;
    });
    std::optional<std::string> reference;
    std::optional<std::string> degraded_reason;
    const auto& track = session_.track();
    if (!track) {
      degraded_reason = "no camera track; generated without a reference frame";
    } else {
      try {
        const auto best = bestview::select_best_view(entity, *snap, *track);
        bestview::apply_best_view(entity, best, track->sim3);
        update_progress(id, [&](EntityProgress& p) {
          p.best_view = {{"frame_index", best.frame_index},
                         {"vis_cnt", best.score.vis_cnt()},
                         {"center_dist", best.score.center_dist()},
                         {"vis_area", best.score.vis_area()}};
        });
        const auto image = track->image_for(best.frame_index);
        if (image && fs::exists(*image)) {
          const auto annotated =
              bestview::annotate_frame_png(read_file(*image), track->intrinsics, best.annotation, entity.label);
          reference = session_.store()
                          .put(gen::AssetKind::image, encode_png(annotated), ".png",
                               {{"kind", "reference_frame"}, {"entity", id}, {"frame_index", best.frame_index}})
                          .asset_id;
          produced.push_back(*reference);
        } else {
          degraded_reason = fmt::format("frame {} has no image; generated without a reference frame", best.frame_index);
        }
      } catch (const Error& e) {
        degraded_reason = fmt::format("{}: {}; generated without a reference frame", e.code(), e.what());
      }
    }
    session_.commit("pipeline", "best_view", [&](SceneModel& scene) {
      auto& e = entity_or_throw(scene, id);
      e.best_frame_pose = entity.best_frame_pose;
      e.best_view_yaw = entity.best_view_yaw;
    });
    if (degraded_reason) {
      update_progress(id, [&](EntityProgress& p) {
        p.degraded = true;
        p.error = degraded_reason;
      });
    }

    update_progress(id, [](EntityProgress& p) { p.stage = Stage::image; });
    const auto style_spec = snap->style.value_or(scene::StyleSpec{});
    const auto prompt = style::build_object_image_prompt(*entity.mapping, entity, style_spec) + adjustment_text(entity);
    const auto image = dispatcher_
                           .submit({gen::RequestKind::stylized_image,
                                    {{"prompt", prompt}, {"input_image", reference ? Json(*reference) : Json(nullptr)}},
                                    seed},
                                   cancel)
                           .wait();
    produced.push_back(image.asset->asset_id);

    update_progress(id, [](EntityProgress& p) { p.stage = Stage::mesh; });
    const auto mesh =
        dispatcher_.submit({gen::RequestKind::image_to_3d, {{"image", image.asset->asset_id}}, seed}, cancel).wait();
    produced.push_back(mesh.asset->asset_id);

    bool landed = false;
    std::vector<std::string> replaced;
    session_.commit("pipeline", "generated", [&](SceneModel& scene) {
      auto* e = scene.find_entity(id);
      if (!e || !is_latest(id, generation)) return;
      replaced.clear();
      if (e->asset_id) replaced.push_back(*e->asset_id);
      for (const char* key : {"preview_image", "reference_frame"}) {
        if (auto v = extra_string(*e, key)) replaced.push_back(*v);
      }
      if (e->status != ObjectStatus::generating) *e = scene::advance_status(*e, ObjectStatus::generating);
      const bool flagged = e->kind == EntityKind::object && e->mapping && e->mapping->collision_risk;
      *e = scene::advance_status(*e, flagged ? ObjectStatus::needs_attention : ObjectStatus::complete);
      e->asset_id = mesh.asset->asset_id;
      e->extra["preview_image"] = image.asset->asset_id;
      e->extra["image_prompt"] = prompt;
      e->extra["reference_frame"] = reference ? Json(*reference) : Json(nullptr);
      e->extra["degraded"] = degraded_reason.has_value();
      landed = true;
    });
    // Whatever is no longer referenced after the commit goes: the previous
    // result when this one landed, this one's outputs otherwise.
    drop_orphans(landed ? replaced : produced);
  } catch (const std::exception& e) {
    const bool latest = is_latest(id, generation);
    if (latest) {
      std::string message = e.what();
      if (const auto* err = dynamic_cast<const Error*>(&e)) message = fmt::format("{}: {}", err->code(), err->what());
      update_progress(id, [&](EntityProgress& p) {
        p.stage = Stage::failed;
        p.error = message;
      });
      try {
        session_.commit("pipeline", "generation_failed", [&](SceneModel& scene) {
          auto* ent = scene.find_entity(id);
          if (ent && ent->status == ObjectStatus::generating) *ent = scene::advance_status(*ent, ObjectStatus::pending);
        });
      } catch (const std::exception&) {
      }
    }
    drop_orphans(produced);
  }
}

void AuthoringService::generate_environment(std::uint64_t seed) {
  try {
    const auto snap = session_.snapshot();
    auto it = snap->extra.find(kEnvironmentPrompts);
    if (it == snap->extra.end()) return;
    style::MappingTable table;
    table.skybox = {(*it)["skybox"]["prompt"].get<std::string>(), (*it)["skybox"]["negative_text"].get<std::string>()};
    table.wall_texture = (*it)["wall_texture"]["prompt"].get<std::string>();
    table.floor_texture = (*it)["floor_texture"]["prompt"].get<std::string>();
    auto wall = dispatcher_.submit(
        {gen::RequestKind::texture, {{"prompt", style::build_texture_prompt(style::Surface::wall, table)}, {"surface", "wall"}}, seed});
    auto floor = dispatcher_.submit(
        {gen::RequestKind::texture, {{"prompt", style::build_texture_prompt(style::Surface::floor, table)}, {"surface", "floor"}}, seed});
    auto sky = dispatcher_.submit(
        {gen::RequestKind::skybox, style::skybox_payload(style::build_skybox_request(table)), seed});
    const auto wall_id = wall.wait().asset->asset_id;
    const auto floor_id = floor.wait().asset->asset_id;
    const auto sky_id = sky.wait().asset->asset_id;
    session_.commit("pipeline", "environment", [&](SceneModel& scene) {
      scene.environment.wall_texture = wall_id;
      scene.environment.floor_texture = floor_id;
      scene.environment.skybox = sky_id;
    });
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    if (run_) run_->environment_error = e.what();
  }
}

SceneEntity AuthoringService::regenerate(const std::string& id, const std::string& instruction) {
  const auto snap = session_.snapshot();
  const auto& current = entity_or_throw(*snap, id);
  if (!current.mapping) throw Conflict(fmt::format("'{}' has no mapping row yet; run the pipeline first", id), id);
  auto [generation, token] = begin_generation(id);
  session_.commit("user", "regenerate", [&](SceneModel& scene) {
    auto& e = entity_or_throw(scene, id);
    if (!instruction.empty()) {
      if (!e.extra.contains("adjustments") || !e.extra["adjustments"].is_array()) e.extra["adjustments"] = Json::array();
      e.extra["adjustments"].push_back(instruction);
    }
    // Bumped on every request, so an empty instruction still re-rolls.
    e.extra["regenerations"] = e.extra.value("regenerations", 0) + 1;
    e = scene::advance_status(e, ObjectStatus::generating);
  });
  invalidate_composed();
  const auto updated = entity_or_throw(*session_.snapshot(), id);
  const std::uint64_t seed = options_.seed + updated.extra.value("regenerations", 0);
  update_progress(id, [](EntityProgress& p) { p = {}; });
  launch([this, id, seed, generation = generation, token = token] { generate_entity(id, seed, generation, token); });
  return updated;
}

// ---- reading ----

Json AuthoringService::status_report() const {
  const auto snap = session_.snapshot();
  std::lock_guard lock(mutex_);
  Json entities = Json::array();
  for (const auto& e : snap->entities) {
    Json row{{"id", e.id},
             {"kind", scene::to_string(e.kind)},
             {"label", e.label},
             {"status", scene::to_string(e.status)},
             {"asset_id", e.asset_id ? Json(*e.asset_id) : Json(nullptr)},
             {"preview_image", e.extra.value("preview_image", Json(nullptr))},
             {"prompt", e.extra.value("image_prompt", Json(nullptr))},
             {"mapping_stale", e.mapping_stale},
             {"collision_risk", e.mapping ? Json(e.mapping->collision_risk) : Json(nullptr)}};
    const auto it = progress_.find(e.id);
    const auto progress = it != progress_.end() ? it->second : EntityProgress{};
    row["stage"] = to_string(progress.stage);
    row["degraded"] = progress.degraded;
    row["error"] = progress.error ? Json(*progress.error) : Json(nullptr);
    row["score"] = progress.best_view;
    entities.push_back(std::move(row));
  }
  Json style = nullptr;
  if (snap->style) style = scene::style_to_json(*snap->style);
  Json run = nullptr;
  if (run_) {
    auto copy = *run_;
    for (auto& [id, p] : copy.entities) {
      if (auto pit = progress_.find(id); pit != progress_.end()) p = pit->second;
    }
    run = copy.to_json();
  }
  return {{"revision", snap->revision},
          {"running", run_active_ || active_tasks_ > 0},
          {"style", style},
          {"run", run},
          {"needs_attention", compose::attention_ids(*snap)},
          {"entities", entities}};
}

std::string AuthoringService::composed_manifest() {
  const auto snap = session_.snapshot();
  const auto text = compose::manifest_text(compose::compose_scene(*snap, session_.store()));
  write_file_atomic(session_.dir() / "composed.json", text);
  return text;
}

}  // namespace roomforge::service
