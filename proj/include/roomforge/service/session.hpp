#pragma once

// One authoring session on disk:
//   {dir}/scene.initial.json   the scene the session started from
//   {dir}/events.jsonl         one committed change per line
//   {dir}/scene.json           latest scene (convenience copy)
//   {dir}/track.json           camera track, when one was supplied
//   {dir}/frames/              copies of the track's frame images
//   {dir}/assets/              content-addressed asset store
//
// A single writer thread applies every mutation. Each commit bumps the scene
// revision, appends its change to the event log and then
// publishes an immutable snapshot. Replaying the log over the initial scene
// reproduces the current scene exactly; opening a session does precisely
// that, ignoring a torn final line.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "roomforge/bestview/best_view.hpp"
#include "roomforge/gen/asset_store.hpp"
#include "roomforge/scene/scene_model.hpp"

namespace roomforge::service {

struct Event {
  std::int64_t revision = 0;
  std::string actor;
  std::string op;
  Json change;  // see diff_scenes
};

// Replayable difference between two scene documents: replaced top-level
// fields, upserted and removed entities, and the entity order when it moved.
Json diff_scenes(const Json& before, const Json& after);
// Applies a diff produced by diff_scenes to a scene document.
void apply_diff(Json& scene, const Json& diff);

// Scene as it reads back from disk: numbers at their persisted precision.
scene::SceneModel canonicalize(const scene::SceneModel& scene);

class Session {
 public:
  using Mutation = std::function<void(scene::SceneModel&)>;

  // Creates a new session directory; throws Conflict when one already exists.
  static void create(const std::filesystem::path& dir, const scene::SceneModel& scene,
                     const std::optional<bestview::CameraTrack>& track = std::nullopt);
  static bool exists(const std::filesystem::path& dir);

  // Opens an existing session by replaying its event log.
  explicit Session(std::filesystem::path dir);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::filesystem::path& dir() const noexcept { return dir_; }
  gen::AssetStore& store() noexcept { return store_; }
  const std::optional<bestview::CameraTrack>& track() const noexcept { return track_; }

  std::shared_ptr<const scene::SceneModel> snapshot() const;

  // Runs `mutate` on the writer thread against a copy of the current scene.
  // The copy must still validate; otherwise nothing changes and the error is
  // rethrown here. Returns the resulting revision (unchanged when the
  // mutation was a no-op).
  std::int64_t commit(std::string actor, std::string op, Mutation mutate);

  std::vector<Event> events() const;
  // Replays the on-disk log from the initial scene.
  scene::SceneModel replay() const;

 private:
  struct Task {
    std::string actor;
    std::string op;
    Mutation mutate;
    std::promise<std::int64_t> done;
  };

  void writer_loop(std::stop_token stop);
  std::int64_t apply(Task& task);

  std::filesystem::path dir_;
  gen::AssetStore store_;
  std::optional<bestview::CameraTrack> track_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const scene::SceneModel> current_;
  std::vector<Event> events_;

  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::deque<Task> queue_;
  std::jthread writer_;
};

}  // namespace roomforge::service
