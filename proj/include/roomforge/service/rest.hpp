#pragma once

// REST surface of the authoring service.
//
// RestApi is transport-free: it maps one request to one response, which is
// what the tests drive. RestServer binds it to an HTTP listener.
//
//   GET    /api/scene                      scene document
//   POST   /api/objects                    {center, size, yaw?, label, kind?, host_wall_id?} -> 201 entity
//   PATCH  /api/objects/{id}               {center?, size?, yaw?, label?} -> entity
//   DELETE /api/objects/{id}               -> {deleted, revision}
//   PUT    /api/style                      {text, image_base64?} or multipart (text, image) -> style
//   POST   /api/generate                   {seed?} -> 202 {run_id}
//   GET    /api/status                     status report
//   POST   /api/objects/{id}/regenerate    {instruction} -> 202 entity
//   POST   /api/objects/{id}/confirm       -> entity
//   GET    /api/composed                   manifest, or 409 with needs_attention ids
//   GET    /api/assets/{id}                asset bytes
//   GET    /ui/...                         static client files
//
// Errors are {code, message, path}.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "roomforge/service/service.hpp"

namespace roomforge::service {

inline constexpr std::size_t kMaxUploadBytes = 10u << 20;

struct HttpRequest {
  std::string method;
  std::string path;  // no query string
  std::string body;
  std::string content_type;
  // Multipart form fields by name, when the body was multipart.
  std::map<std::string, std::string> form;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct RestOptions {
  // Directory served under /ui; nothing is served when unset.
  std::optional<std::filesystem::path> ui_dir;
};

class RestApi {
 public:
  explicit RestApi(AuthoringService& service, RestOptions options = {});
  HttpResponse handle(const HttpRequest& request);

 private:
  HttpResponse route(const HttpRequest& request);
  HttpResponse serve_ui(const std::string& rel);

  AuthoringService& service_;
  RestOptions options_;
};

// HTTP status for an error code ("UnknownEntity" -> 404, ...).
int http_status_for(std::string_view code);

class RestServer {
 public:
  explicit RestServer(RestApi& api);
  ~RestServer();

  // Binds to host:port; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace roomforge::service
