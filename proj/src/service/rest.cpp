#include "roomforge/service/rest.hpp"

#include <fmt/format.h>

#include <vector>

#include "roomforge/core/error.hpp"
#include "roomforge/gen/media.hpp"

// httplib last: <resolv.h> defines macros that collide with other headers.
#include <httplib.h>

namespace roomforge::service {

namespace fs = std::filesystem;

namespace {

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump(2) + "\n"}; }

HttpResponse error_response(int status, std::string_view code, std::string_view message, std::string_view path = {}) {
  return json_response(status, {{"code", code}, {"message", message}, {"path", path}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = std::min(path.find('/', start), path.size());
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

Json body_json(const HttpRequest& request, bool required = true) {
  if (request.body.empty()) {
    if (required) throw ValidationError("request body must be a JSON object", "$");
    return Json::object();
  }
  Json doc;
  try {
    doc = Json::parse(request.body);
  } catch (const Json::parse_error& e) {
    throw ValidationError(fmt::format("malformed JSON: {}", e.what()), "$");
  }
  if (!doc.is_object()) throw ValidationError("request body must be a JSON object", "$");
  return doc;
}

std::string string_field(const Json& doc, const char* key, bool required) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    if (required) throw ValidationError(fmt::format("missing field '{}'", key), key);
    return {};
  }
  if (!it->is_string()) throw ValidationError(fmt::format("'{}' must be a string", key), key);
  return it->get<std::string>();
}

std::string_view mime_for(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".glb") return "model/gltf-binary";
  if (ext == ".json") return "application/json";
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

HttpResponse method_not_allowed(const HttpRequest& request) {
  return error_response(405, "MethodNotAllowed", fmt::format("{} is not supported on {}", request.method, request.path),
                        request.path);
}

}  // namespace

int http_status_for(std::string_view code) {
  static const std::map<std::string_view, int> table = {
      {"ValidationError", 400}, {"SchemaError", 400},     {"ImageDecodeError", 400},
      {"UnknownEntity", 404},   {"MissingAsset", 404},    {"IllegalTransition", 409},
      {"Conflict", 409},        {"BlockedByAttention", 409}, {"InvariantError", 422},
      {"MissingHostWall", 422}, {"DegenerateRoom", 422},  {"NoVisibleFrame", 422},
      {"MissingInput", 422},    {"ContentRejected", 422}, {"BackendError", 502},
      {"Timeout", 504},         {"Cancelled", 409},
  };
  const auto it = table.find(code);
  return it == table.end() ? 500 : it->second;
}

RestApi::RestApi(AuthoringService& service, RestOptions options) : service_(service), options_(std::move(options)) {}

HttpResponse RestApi::handle(const HttpRequest& request) {
  try {
    return route(request);
  } catch (const BlockedByAttention& e) {
    return json_response(409, {{"code", e.code()}, {"message", e.what()}, {"path", e.path()}, {"needs_attention", e.ids()}});
  } catch (const Error& e) {
    return error_response(http_status_for(e.code()), e.code(), e.what(), e.path());
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

HttpResponse RestApi::route(const HttpRequest& request) {
  const auto parts = split_path(request.path);
  const auto& method = request.method;

  if (!parts.empty() && parts[0] == "ui") {
    if (method != "GET") return method_not_allowed(request);
    std::string rel;
    for (std::size_t i = 1; i < parts.size(); ++i) rel += (rel.empty() ? "" : "/") + parts[i];
    return serve_ui(rel.empty() ? "index.html" : rel);
  }
  if (parts.size() < 2 || parts[0] != "api") {
    return error_response(404, "NotFound", fmt::format("no route for {}", request.path), request.path);
  }
  const auto& resource = parts[1];

  if (parts.size() == 2 && resource == "scene") {
    if (method != "GET") return method_not_allowed(request);
    return {200, "application/json", scene::serialize_scene(*service_.session().snapshot())};
  }
  if (parts.size() == 2 && resource == "status") {
    if (method != "GET") return method_not_allowed(request);
    return json_response(200, service_.status_report());
  }
  if (parts.size() == 2 && resource == "composed") {
    if (method != "GET") return method_not_allowed(request);
    return {200, "application/json", service_.composed_manifest()};
  }
  if (parts.size() == 2 && resource == "generate") {
    if (method != "POST") return method_not_allowed(request);
    const auto body = body_json(request, false);
    std::optional<std::uint64_t> seed;
    if (auto it = body.find("seed"); it != body.end() && !it->is_null()) {
      if (!it->is_number_unsigned()) throw ValidationError("seed must be a non-negative integer", "seed");
      seed = it->get<std::uint64_t>();
    }
    return json_response(202, {{"run_id", service_.start_pipeline(seed)}});
  }
  if (parts.size() == 2 && resource == "style") {
    if (method != "PUT") return method_not_allowed(request);
    std::string text;
    std::optional<std::string> image;
    if (request.content_type.starts_with("multipart/form-data")) {
      if (auto it = request.form.find("text"); it != request.form.end()) text = it->second;
      if (auto it = request.form.find("image"); it != request.form.end() && !it->second.empty()) image = it->second;
    } else {
      const auto body = body_json(request);
      text = string_field(body, "text", false);
      if (auto encoded = string_field(body, "image_base64", false); !encoded.empty()) image = gen::base64_decode(encoded);
    }
    if (image && image->size() > kMaxUploadBytes) {
      return error_response(413, "ValidationError", "reference image exceeds 10 MB", "image");
    }
    return json_response(200, scene::style_to_json(service_.set_style(text, image)));
  }
  if (resource == "assets" && parts.size() == 3) {
    if (method != "GET") return method_not_allowed(request);
    auto& store = service_.session().store();
    const auto record = store.find(parts[2]);
    if (!record) throw MissingAsset(fmt::format("no asset '{}'", parts[2]), parts[2]);
    return {200, std::string(mime_for(record->path)), store.read(*record)};
  }
  if (resource == "objects") {
    if (parts.size() == 2) {
      if (method != "POST") return method_not_allowed(request);
      const auto body = body_json(request);
      const auto label = string_field(body, "label", true);
      Json box_doc = Json::object();
      for (const char* key : {"center", "size", "yaw"}) {
        if (body.contains(key)) box_doc[key] = body[key];
      }
      if (!box_doc.contains("center") || !box_doc.contains("size")) {
        throw ValidationError("center and size are required", box_doc.contains("center") ? "size" : "center");
      }
      const auto patch = ScaffoldPatch::from_json(box_doc);
      scene::EntityKind kind = scene::EntityKind::object;
      if (auto text = string_field(body, "kind", false); !text.empty()) {
        const auto parsed = scene::parse_entity_kind(text);
        if (!parsed) throw ValidationError(fmt::format("unknown kind '{}'", text), "kind");
        kind = *parsed;
      }
      std::optional<std::string> host;
      if (auto text = string_field(body, "host_wall_id", false); !text.empty()) host = text;
      const auto entity = service_.add_scaffold({*patch.center, *patch.size, patch.yaw.value_or(0.0)}, label, kind, host);
      return json_response(201, scene::entity_to_json(entity));
    }
    const auto& id = parts[2];
    if (parts.size() == 3) {
      if (method == "PATCH") {
        return json_response(200, scene::entity_to_json(service_.edit_scaffold(id, ScaffoldPatch::from_json(body_json(request)))));
      }
      if (method == "DELETE") {
        service_.delete_scaffold(id);
        return json_response(200, {{"deleted", id}, {"revision", service_.session().snapshot()->revision}});
      }
      return method_not_allowed(request);
    }
    if (parts.size() == 4 && parts[3] == "regenerate") {
      if (method != "POST") return method_not_allowed(request);
      const auto instruction = string_field(body_json(request, false), "instruction", false);
      return json_response(202, scene::entity_to_json(service_.regenerate(id, instruction)));
    }
    if (parts.size() == 4 && parts[3] == "confirm") {
      if (method != "POST") return method_not_allowed(request);
      return json_response(200, scene::entity_to_json(service_.confirm(id)));
    }
  }
  return error_response(404, "NotFound", fmt::format("no route for {}", request.path), request.path);
}

HttpResponse RestApi::serve_ui(const std::string& rel) {
  if (!options_.ui_dir) return error_response(404, "NotFound", "no client bundle is configured", "/ui");
  if (rel.find("..") != std::string::npos) return error_response(404, "NotFound", "not found", rel);
  const auto path = *options_.ui_dir / rel;
  if (!fs::is_regular_file(path)) return error_response(404, "NotFound", fmt::format("no file '{}'", rel), rel);
  return {200, std::string(mime_for(path)), read_file(path)};
}

struct RestServer::Impl {
  explicit Impl(RestApi& a) : api(a) {}
  RestApi& api;
  httplib::Server server;
};

RestServer::RestServer(RestApi& api) : impl_(std::make_unique<Impl>(api)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request{req.method, req.path, req.body, req.get_header_value("Content-Type"), {}};
    for (const auto& [name, file] : req.files) request.form[name] = file.content;
    if (req.body.size() > kMaxUploadBytes + (64u << 10)) {
      res.status = 413;
      res.set_content(R"({"code": "ValidationError", "message": "request body too large", "path": ""})",
                      "application/json");
      return;
    }
    const auto response = impl_->api.handle(request);
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  };
  // Before the catch-all: relative links in the client resolve under /ui/.
  impl_->server.Get("/ui", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/index.html"); });
  const std::string any = R"(/.*)";
  impl_->server.Get(any, handler);
  impl_->server.Post(any, handler);
  impl_->server.Put(any, handler);
  impl_->server.Patch(any, handler);
  impl_->server.Delete(any, handler);
}

RestServer::~RestServer() { stop(); }

int RestServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error(fmt::format("cannot bind {}", host));
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));
  return port;
}

void RestServer::listen() { impl_->server.listen_after_bind(); }

void RestServer::stop() { impl_->server.stop(); }

}  // namespace roomforge::service
