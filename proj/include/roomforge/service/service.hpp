#pragma once

// The authoring service: scaffold editing, the generation pipeline, red-flag
// confirmation, regeneration and composed-scene delivery over one session.
//
// Every scene change goes through Session::commit. Pipeline and
// regeneration work runs on background threads that talk to the backend
// through the dispatcher and report back as commits.

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "roomforge/compose/compose.hpp"
#include "roomforge/gen/dispatcher.hpp"
#include "roomforge/gen/llm.hpp"
#include "roomforge/service/session.hpp"

namespace roomforge::service {

enum class Stage { pending, bestview, mapping, image, mesh, registered, failed };
std::string_view to_string(Stage stage);

struct EntityProgress {
  Stage stage = Stage::pending;
  bool degraded = false;  // generated without a reference frame
  std::optional<std::string> error;
  Json best_view = nullptr;  // {frame_index, vis_cnt, center_dist, vis_area}
};

// One pipeline run. Snapshots of it are handed out by value.
struct PipelineRun {
  std::string run_id;
  std::string state = "running";  // running | finished | failed
  std::optional<std::string> error;
  std::optional<std::string> compose;  // "composed" | "blocked" | error text
  std::optional<std::string> environment_error;
  std::map<std::string, EntityProgress> entities;
  std::chrono::system_clock::time_point started;
  std::optional<std::chrono::system_clock::time_point> finished;

  Json to_json() const;
};

struct ServiceOptions {
  gen::DispatcherOptions dispatcher{};
  // Whether the language model can see image attachments.
  bool llm_attachments = false;
  std::uint64_t seed = 0;
};

// Fields of a scaffold edit; absent fields stay as they are.
struct ScaffoldPatch {
  std::optional<Vec3> center;
  std::optional<Vec3> size;
  std::optional<double> yaw;
  std::optional<std::string> label;

  static ScaffoldPatch from_json(const Json& doc);
};

class AuthoringService {
 public:
  // Generating entities left behind by an interrupted process are reset to
  // pending on open.
  AuthoringService(Session& session, gen::Backend& backend, ServiceOptions options = {});
  ~AuthoringService();
  AuthoringService(const AuthoringService&) = delete;
  AuthoringService& operator=(const AuthoringService&) = delete;

  Session& session() noexcept { return session_; }
  gen::Dispatcher& dispatcher() noexcept { return dispatcher_; }

  // ---- editing ----
  scene::SceneEntity edit_scaffold(const std::string& id, const ScaffoldPatch& patch);
  scene::SceneEntity add_scaffold(const scene::OrientedBox& box, const std::string& label,
                                  scene::EntityKind kind = scene::EntityKind::object,
                                  std::optional<std::string> host_wall_id = std::nullopt);
  void delete_scaffold(const std::string& id);
  scene::StyleSpec set_style(const std::string& text, const std::optional<std::string>& reference_png);
  scene::SceneEntity confirm(const std::string& id);

  // ---- generation ----
  // Starts a run in the background; throws Conflict while one is active.
  std::string start_pipeline(std::optional<std::uint64_t> seed = std::nullopt);
  // start_pipeline followed by wait_idle.
  PipelineRun run_pipeline(std::optional<std::uint64_t> seed = std::nullopt);
  // Regenerates one entity's image and mesh in the background; a newer
  // request for the same entity supersedes an older one.
  scene::SceneEntity regenerate(const std::string& id, const std::string& instruction);
  // Blocks until the pipeline and every regeneration have finished.
  void wait_idle();
  std::optional<PipelineRun> last_run() const;

  // ---- reading ----
  Json status_report() const;
  // Throws BlockedByAttention while anything is red-flagged. Successful
  // manifests are also written to {session}/composed.json.
  std::string composed_manifest();

 private:
  void run_body(const std::string& run_id, std::uint64_t seed);
  // Returns the generation number and cancel token for a fresh attempt,
  // cancelling any older attempt for the same entity.
  std::pair<std::uint64_t, gen::CancelToken> begin_generation(const std::string& id);
  bool is_latest(const std::string& id, std::uint64_t generation) const;
  void generate_entity(const std::string& id, std::uint64_t seed, std::uint64_t generation,
                       const gen::CancelToken& cancel);
  void generate_environment(std::uint64_t seed);
  void update_progress(const std::string& id, const std::function<void(EntityProgress&)>& fn);
  void drop_orphans(const std::vector<std::string>& asset_ids);
  void launch(std::function<void()> work);
  void invalidate_composed();
  void recover();

  Session& session_;
  gen::Backend& backend_;
  ServiceOptions options_;
  gen::Dispatcher dispatcher_;
  gen::DispatchedLlm llm_;

  mutable std::mutex mutex_;
  std::optional<PipelineRun> run_;
  std::map<std::string, EntityProgress> progress_;
  bool run_active_ = false;
  int run_counter_ = 0;
  // Latest generation number per entity; older results are dropped.
  std::map<std::string, std::uint64_t> generation_;
  std::map<std::string, gen::CancelToken> cancels_;
  std::uint64_t generation_counter_ = 0;
  int active_tasks_ = 0;
  std::condition_variable idle_cv_;
  std::vector<std::jthread> threads_;
};

}  // namespace roomforge::service
