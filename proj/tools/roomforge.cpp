#include <CLI11.hpp>
#include <pthread.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <thread>

#include "roomforge/bestview/best_view.hpp"
#include "roomforge/compose/compose.hpp"
#include "roomforge/core/error.hpp"
#include "roomforge/core/raster.hpp"
#include "roomforge/gen/live_backend.hpp"
#include "roomforge/gen/mock_backend.hpp"
#include "roomforge/service/rest.hpp"
#include "roomforge/style/mock_llm.hpp"

using namespace roomforge;
namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 1;
constexpr int kExitBlocked = 3;

struct BackendChoice {
  std::string name = "mock";
  bool llm_vision = false;
};

std::unique_ptr<gen::Backend> make_backend(const BackendChoice& choice) {
  if (choice.name == "live") return std::make_unique<gen::LiveBackend>(gen::LiveConfig::from_env());
  gen::MockOptions options;
  options.llm = style::heuristic_responder;
  return std::make_unique<gen::MockBackend>(options);
}

void add_backend_options(CLI::App& cmd, BackendChoice& choice) {
  cmd.add_option("--backend", choice.name, "Generation backend")->check(CLI::IsMember({"mock", "live"}));
  cmd.add_flag("--llm-vision", choice.llm_vision, "Send the style reference image to the language model");
}

// Opens `dir`, creating it from a scene (and optional track) first when it
// holds no session yet.
void ensure_session(const fs::path& dir, const std::string& scene_path, const std::string& track_path) {
  if (service::Session::exists(dir)) {
    if (!scene_path.empty()) spdlog::info("resuming existing session in {}", dir.string());
    return;
  }
  if (scene_path.empty()) throw MissingInput(fmt::format("no session in {} and no --scene given", dir.string()), "scene");
  const auto scene = scene::parse_scene(read_file(scene_path));
  std::optional<bestview::CameraTrack> track;
  if (!track_path.empty()) track = bestview::load_track(track_path);
  service::Session::create(dir, scene, track);
  spdlog::info("created session in {}", dir.string());
}

int cmd_run(const std::string& scene_path, const std::string& track_path, const std::string& style_text,
            const std::string& style_image, const fs::path& out, const BackendChoice& backend_choice,
            std::uint64_t seed, bool confirm_all) {
  ensure_session(out, scene_path, track_path);
  service::Session session(out);
  auto backend = make_backend(backend_choice);
  service::AuthoringService svc(session, *backend, {{}, backend_choice.llm_vision, seed});

  std::optional<std::string> image;
  if (!style_image.empty()) image = read_file(style_image);
  if (!style_text.empty() || image) svc.set_style(style_text, image);

  spdlog::info("running pipeline (backend {}, seed {})", backend_choice.name, seed);
  const auto run = svc.run_pipeline(seed);
  for (const auto& [id, p] : run.entities) {
    if (p.error) spdlog::warn("{}: {}", id, *p.error);
  }
  if (run.environment_error) spdlog::warn("environment: {}", *run.environment_error);
  if (run.state == "failed") {
    spdlog::error("pipeline failed: {}", run.error.value_or("unknown error"));
    return kExitError;
  }

  const auto report = svc.status_report();
  auto flagged = report["needs_attention"].get<std::vector<std::string>>();
  if (confirm_all) {
    for (const auto& id : flagged) svc.confirm(id);
    if (!flagged.empty()) spdlog::info("confirmed {} red-flagged entities", flagged.size());
    flagged.clear();
  }
  if (!flagged.empty()) {
    spdlog::warn("confirm before composing: {}", fmt::join(flagged, ", "));
    std::cout << canonical_dump({{"needs_attention", flagged}});
    return kExitBlocked;
  }
  svc.composed_manifest();
  spdlog::info("wrote {}", (out / "composed.json").string());
  return 0;
}

int cmd_bestview(const std::string& scene_path, const std::string& track_path, const std::string& object,
                 const std::string& annotate_dir) {
  const auto scene = scene::parse_scene(read_file(scene_path));
  const auto track = bestview::load_track(track_path);
  Json results = Json::array();
  bool any_error = false;
  for (const auto& e : scene.entities) {
    if (!scene::is_in_scene(e.kind) || (!object.empty() && e.id != object)) continue;
    Json row{{"object_id", e.id}, {"label", e.label}};
    try {
      const auto best = bestview::select_best_view(e, scene, track);
      row["frame_index"] = best.frame_index;
      row["score"] = {{"vis_cnt", best.score.vis_cnt()},
                      {"center_dist", best.score.center_dist()},
                      {"vis_area", best.score.vis_area()}};
      if (!annotate_dir.empty()) {
        if (const auto image = track.image_for(best.frame_index); image && fs::exists(*image)) {
          const auto png =
              encode_png(bestview::annotate_frame_png(read_file(*image), track.intrinsics, best.annotation, e.label));
          const auto path = fs::path(annotate_dir) / bestview::annotated_frame_path(*image, e.id).filename();
          write_file_atomic(path, png);
          row["annotated"] = path.string();
        }
      }
    } catch (const Error& err) {
      row["error"] = {{"code", err.code()}, {"message", err.what()}};
      any_error = true;
    }
    results.push_back(std::move(row));
  }
  if (!object.empty() && results.empty()) throw UnknownEntity(fmt::format("no entity '{}'", object), object);
  std::cout << canonical_dump(results);
  return any_error && !object.empty() ? kExitError : 0;
}

int cmd_compose(const fs::path& session_dir) {
  service::Session session(session_dir);
  try {
    const auto text = compose::manifest_text(compose::compose_scene(*session.snapshot(), session.store()));
    write_file_atomic(session_dir / "composed.json", text);
    std::cout << text;
    return 0;
  } catch (const BlockedByAttention& e) {
    spdlog::warn("{}", e.what());
    std::cout << canonical_dump({{"needs_attention", e.ids()}});
    return kExitBlocked;
  }
}

int cmd_serve(const fs::path& session_dir, const std::string& scene_path, const std::string& track_path,
              const std::string& host, int port, const std::string& ui_dir, const BackendChoice& backend_choice,
              std::uint64_t seed) {
  // Every thread inherits the blocked mask; one thread waits for the signals.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ensure_session(session_dir, scene_path, track_path);
  service::Session session(session_dir);
  auto backend = make_backend(backend_choice);
  service::AuthoringService svc(session, *backend, {{}, backend_choice.llm_vision, seed});
  service::RestOptions options;
  if (!ui_dir.empty()) options.ui_dir = ui_dir;
  service::RestApi api(svc, options);
  service::RestServer server(api);
  const int bound = server.bind(host, port);
  std::jthread waiter([&] {
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
  });
  spdlog::info("serving {} on http://{}:{}", session_dir.string(), host, bound);
  server.listen();
  // Wakes the waiter when the listener ended on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  spdlog::info("stopped");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roomforge: turn a scanned room into a styled, composed 3D scene"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string scene_path, track_path, style_text, style_image, out, object, annotate, session_dir, ui_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
  bool confirm_all = false;
  BackendChoice backend;

  auto* run = app.add_subcommand("run", "Generate and compose a scene end to end");
  run->add_option("--scene", scene_path, "Scene document")->check(CLI::ExistingFile);
  run->add_option("--track", track_path, "Camera track document")->check(CLI::ExistingFile);
  run->add_option("--style", style_text, "Style description");
  run->add_option("--style-image", style_image, "Style reference PNG")->check(CLI::ExistingFile);
  run->add_option("--out", out, "Session directory")->required();
  run->add_option("--seed", seed, "Generation seed");
  run->add_flag("--confirm-all", confirm_all, "Confirm every red-flagged entity before composing");
  add_backend_options(*run, backend);

  auto* best = app.add_subcommand("bestview", "Best reference frame per entity");
  best->add_option("--scene", scene_path, "Scene document")->required()->check(CLI::ExistingFile);
  best->add_option("--track", track_path, "Camera track document")->required()->check(CLI::ExistingFile);
  best->add_option("--object", object, "Only this entity");
  best->add_option("--annotate", annotate, "Write annotated frames into this directory");

  auto* comp = app.add_subcommand("compose", "Compose a session's scene manifest");
  comp->add_option("--session", session_dir, "Session directory")->required();

  auto* serve = app.add_subcommand("serve", "Serve the authoring REST API");
  serve->add_option("--session", session_dir, "Session directory")->required();
  serve->add_option("--scene", scene_path, "Scene document for a new session")->check(CLI::ExistingFile);
  serve->add_option("--track", track_path, "Camera track for a new session")->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port; 0 picks one")->check(CLI::Range(0, 65535));
  serve->add_option("--ui", ui_dir, "Directory served under /ui")->check(CLI::ExistingDirectory);
  serve->add_option("--seed", seed, "Generation seed");
  add_backend_options(*serve, backend);

  CLI11_PARSE(app, argc, argv);
  // Logs go to stderr so stdout carries only documents.
  spdlog::set_default_logger(spdlog::stderr_color_mt("roomforge"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*run) return cmd_run(scene_path, track_path, style_text, style_image, out, backend, seed, confirm_all);
    if (*best) return cmd_bestview(scene_path, track_path, object, annotate);
    if (*comp) return cmd_compose(session_dir);
    if (*serve) return cmd_serve(session_dir, scene_path, track_path, host, port, ui_dir, backend, seed);
  } catch (const Error& e) {
    spdlog::error("{}: {}{}", e.code(), e.what(), e.path().empty() ? "" : fmt::format(" ({})", e.path()));
    return kExitError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return 0;
}
