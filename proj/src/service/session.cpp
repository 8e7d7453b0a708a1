#include "roomforge/service/session.hpp"

#include <fcntl.h>
#include <fmt/format.h>
#include <unistd.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "roomforge/core/error.hpp"

namespace roomforge::service {

namespace fs = std::filesystem;
using scene::SceneModel;

namespace {

constexpr const char* kInitial = "scene.initial.json";
constexpr const char* kEvents = "events.jsonl";
constexpr const char* kScene = "scene.json";
constexpr const char* kTrack = "track.json";

std::vector<std::string> entity_ids(const Json& entities) {
  std::vector<std::string> ids;
  for (const auto& e : entities) ids.push_back(e.at("id").get<std::string>());
  return ids;
}

// One write(2) per event. This survives a killed process; power loss is
// out of scope, as for the asset store.
void append_line(const fs::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      ::close(fd);
      throw std::runtime_error(fmt::format("cannot append to {}", path.string()));
    }
    written += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

Json event_json(const Event& e) {
  return {{"revision", e.revision}, {"actor", e.actor}, {"op", e.op}, {"change", e.change}};
}

std::vector<Event> read_events(const fs::path& path) {
  std::vector<Event> events;
  if (!fs::exists(path)) return events;
  const auto text = read_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const bool torn = end == std::string::npos;
    const auto line = text.substr(start, torn ? std::string::npos : end - start);
    start = torn ? text.size() : end + 1;
    if (line.empty()) continue;
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error&) {
      // Only the final, unterminated line can be a torn write.
      if (torn) break;
      throw SchemaError(fmt::format("corrupt event log line: {}", line.substr(0, 80)), path.string());
    }
    events.push_back({doc.at("revision").get<std::int64_t>(), doc.at("actor").get<std::string>(),
                      doc.at("op").get<std::string>(), doc.at("change")});
  }
  return events;
}

}  // namespace

Json diff_scenes(const Json& before, const Json& after) {
  Json diff = Json::object();
  Json set = Json::object();
  Json unset = Json::array();
  for (const auto& [key, value] : after.items()) {
    if (key == "entities" || key == "revision") continue;
    if (!before.contains(key) || before.at(key) != value) set[key] = value;
  }
  for (const auto& [key, value] : before.items()) {
    if (key != "entities" && key != "revision" && !after.contains(key)) unset.push_back(key);
  }
  std::map<std::string, const Json*> old_by_id;
  for (const auto& e : before.at("entities")) old_by_id[e.at("id").get<std::string>()] = &e;
  std::set<std::string> new_ids;
  Json upsert = Json::array();
  for (const auto& e : after.at("entities")) {
    const auto id = e.at("id").get<std::string>();
    new_ids.insert(id);
    const auto it = old_by_id.find(id);
    if (it == old_by_id.end() || *it->second != e) upsert.push_back(e);
  }
  Json remove = Json::array();
  for (const auto& id : entity_ids(before.at("entities"))) {
    if (!new_ids.count(id)) remove.push_back(id);
  }
  if (!set.empty()) diff["set"] = set;
  if (!unset.empty()) diff["unset"] = unset;
  if (!upsert.empty()) diff["upsert"] = upsert;
  if (!remove.empty()) diff["remove"] = remove;

  Json probe = before;
  apply_diff(probe, diff);
  const auto wanted = entity_ids(after.at("entities"));
  if (entity_ids(probe.at("entities")) != wanted) diff["order"] = wanted;
  return diff;
}

void apply_diff(Json& scene, const Json& diff) {
  if (auto it = diff.find("set"); it != diff.end()) {
    for (const auto& [key, value] : it->items()) scene[key] = value;
  }
  if (auto it = diff.find("unset"); it != diff.end()) {
    for (const auto& key : *it) scene.erase(key.get<std::string>());
  }
  auto& entities = scene["entities"];
  if (auto it = diff.find("remove"); it != diff.end()) {
    for (const auto& id : *it) {
      for (auto e = entities.begin(); e != entities.end(); ++e) {
        if ((*e)["id"] == id) {
          entities.erase(e);
          break;
        }
      }
    }
  }
  if (auto it = diff.find("upsert"); it != diff.end()) {
    for (const auto& u : *it) {
      auto found = std::find_if(entities.begin(), entities.end(), [&](const Json& e) { return e["id"] == u["id"]; });
      if (found != entities.end()) {
        *found = u;
      } else {
        entities.push_back(u);
      }
    }
  }
  if (auto it = diff.find("order"); it != diff.end()) {
    Json ordered = Json::array();
    for (const auto& id : *it) {
      auto found = std::find_if(entities.begin(), entities.end(), [&](const Json& e) { return e["id"] == id; });
      if (found == entities.end()) throw SchemaError("event order names an unknown entity", id.get<std::string>());
      ordered.push_back(*found);
    }
    entities = std::move(ordered);
  }
}

SceneModel canonicalize(const SceneModel& scene) { return scene::parse_scene(scene::serialize_scene(scene)); }

bool Session::exists(const fs::path& dir) { return fs::exists(dir / kInitial); }

void Session::create(const fs::path& dir, const SceneModel& scene, const std::optional<bestview::CameraTrack>& track) {
  if (exists(dir)) throw Conflict(fmt::format("a session already exists in {}", dir.string()), dir.string());
  scene.validate();
  fs::create_directories(dir / "assets");
  const auto text = scene::serialize_scene(canonicalize(scene));
  if (track) {
    // Frames are copied in so the session does not depend on the caller's
    // working directory or on the source files staying put.
    auto local = *track;
    fs::create_directories(dir / "frames");
    for (auto& image : local.frame_images) {
      if (image.empty()) continue;
      if (!fs::exists(image)) {
        image.clear();
        continue;
      }
      const auto target = dir / "frames" / image.filename();
      fs::copy_file(image, target, fs::copy_options::overwrite_existing);
      image = target;
    }
    write_file_atomic(dir / kTrack, canonical_dump(bestview::track_to_json(local, dir)));
  }
  write_file_atomic(dir / kScene, text);
  write_file_atomic(dir / kEvents, "");
  // Written last: its presence marks a complete session.
  write_file_atomic(dir / kInitial, text);
}

Session::Session(fs::path dir) : dir_(std::move(dir)), store_(dir_ / "assets") {
  if (!exists(dir_)) throw MissingInput(fmt::format("no session in {}", dir_.string()), dir_.string());
  if (fs::exists(dir_ / kTrack)) track_ = bestview::parse_track(read_file(dir_ / kTrack), dir_);
  events_ = read_events(dir_ / kEvents);
  current_ = std::make_shared<const SceneModel>(replay());
  writer_ = std::jthread([this](std::stop_token stop) { writer_loop(stop); });
}

Session::~Session() {
  writer_.request_stop();
  queue_cv_.notify_all();
}

std::shared_ptr<const SceneModel> Session::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

std::vector<Event> Session::events() const {
  std::lock_guard lock(snapshot_mutex_);
  return events_;
}

SceneModel Session::replay() const {
  Json doc = parse_json(read_file(dir_ / kInitial), "initial scene");
  for (const auto& e : read_events(dir_ / kEvents)) {
    apply_diff(doc, e.change);
    doc["revision"] = e.revision;
  }
  return scene::scene_from_json(doc);
}

std::int64_t Session::commit(std::string actor, std::string op, Mutation mutate) {
  std::future<std::int64_t> result;
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back({std::move(actor), std::move(op), std::move(mutate), {}});
    result = queue_.back().done.get_future();
  }
  queue_cv_.notify_one();
  return result.get();
}

void Session::writer_loop(std::stop_token stop) {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); });
      // Drain what is queued even when stopping, so no caller is left waiting.
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    try {
      task.done.set_value(apply(task));
    } catch (...) {
      task.done.set_exception(std::current_exception());
    }
  }
}

std::int64_t Session::apply(Task& task) {
  const auto before = snapshot();
  SceneModel next = *before;
  task.mutate(next);
  next.revision = before->revision;
  next = canonicalize(next);
  next.validate();
  const Json before_doc = scene::scene_to_json(*before);
  const Json after_doc = scene::scene_to_json(next);
  Json change = diff_scenes(before_doc, after_doc);
  if (change.empty()) return before->revision;

  next.revision = before->revision + 1;
  Event event{next.revision, task.actor, task.op, std::move(change)};
  append_line(dir_ / kEvents, event_json(event).dump() + "\n");
  auto published = std::make_shared<const SceneModel>(std::move(next));
  write_file_atomic(dir_ / kScene, scene::serialize_scene(*published));
  {
    std::lock_guard lock(snapshot_mutex_);
    current_ = published;
    events_.push_back(std::move(event));
  }
  return published->revision;
}

}  // namespace roomforge::service
