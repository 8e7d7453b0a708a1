#include "roomforge/gen/live_backend.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "bundles.hpp"
#include "roomforge/core/error.hpp"
#include "roomforge/gen/llm.hpp"
#include "roomforge/gen/media.hpp"

namespace roomforge::gen {

namespace {

std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

Endpoint endpoint_from_env(std::string_view service) {
  return {env_or(fmt::format("ROOMFORGE_{}_URL", service).c_str()),
          env_or(fmt::format("ROOMFORGE_{}_KEY", service).c_str())};
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw BackendError(fmt::format("malformed endpoint URL '{}'", url));
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

struct Response {
  int status = 0;
  std::string body;
};

Response post(const Endpoint& endpoint, const Json& body, std::chrono::seconds timeout) {
  if (!endpoint.configured()) throw BackendError("endpoint is not configured");
  const auto url = split_url(endpoint.url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!endpoint.key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.key);
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError(fmt::format("POST {} failed: {}", endpoint.url, httplib::to_string(res.error())));
  }
  if (res->status == 422 || res->status == 451) {
    throw ContentRejected(fmt::format("{} refused the request: {}", endpoint.url, res->body.substr(0, 200)));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(fmt::format("{} answered HTTP {}", endpoint.url, res->status));
  }
  return {res->status, std::move(res->body)};
}

Json provenance_of(const GenerationRequest& request) {
  return Json{{"kind", to_string(request.kind)}, {"payload", request.payload}, {"seed", request.seed},
              {"backend", "live"}};
}

std::string read_input_image(AssetStore& store, const std::string& asset_id, std::string_view field) {
  const auto record = store.find(asset_id);
  if (!record) throw MissingInput(fmt::format("input image '{}' is not in the store", asset_id), std::string(field));
  return store.read(*record);
}

}  // namespace

LiveConfig LiveConfig::from_env() {
  LiveConfig c;
  c.llm = endpoint_from_env("LLM");
  c.image = endpoint_from_env("IMG");
  c.mesh = endpoint_from_env("MESH");
  c.sky = endpoint_from_env("SKY");
  c.llm_model = env_or("ROOMFORGE_LLM_MODEL", "default");
  return c;
}

BackendMode backend_mode_from_env() {
  const auto mode = env_or("ROOMFORGE_BACKEND", "mock");
  if (mode == "mock") return BackendMode::mock;
  if (mode == "live") return BackendMode::live;
  throw ValidationError(fmt::format("ROOMFORGE_BACKEND must be 'mock' or 'live', got '{}'", mode),
                        "ROOMFORGE_BACKEND");
}

LiveBackend::LiveBackend(LiveConfig config) : config_(std::move(config)) {}

JobResult LiveBackend::execute(const GenerationRequest& request, AssetStore& store, const CancelToken& cancel) {
  cancel.throw_if_cancelled();
  JobResult result;
  if (request.kind == RequestKind::llm) {
    const auto call = llm_call_from(request);
    Json messages = Json::array();
    for (std::size_t i = 0; i < call.messages.size(); ++i) {
      const auto& m = call.messages[i];
      const std::string role = m.role == "human" ? "user" : m.role == "ai" ? "assistant" : m.role;
      const bool last = i + 1 == call.messages.size();
      if (last && call.attachment) {
        const auto png = read_input_image(store, *call.attachment, "payload.attachment");
        messages.push_back(
            {{"role", role},
             {"content", Json::array({{{"type", "text"}, {"text", m.content}},
                                      {{"type", "image_url"},
                                       {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}}})}});
      } else {
        messages.push_back({{"role", role}, {"content", m.content}});
      }
    }
    const Json body{{"model", config_.llm_model}, {"messages", messages}, {"seed", call.seed}, {"temperature", 0}};
    const auto res = post(config_.llm, body, config_.timeout);
    try {
      result.text = parse_json(res.body, "chat completion").at("choices").at(0).at("message").at("content");
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(fmt::format("unexpected chat completion shape: {}", e.what()));
    }
    cancel.throw_if_cancelled();
    return result;
  }

  Json body{{"kind", to_string(request.kind)}, {"payload", request.payload}, {"seed", request.seed}};
  const Endpoint* endpoint = &config_.image;
  if (request.kind == RequestKind::stylized_image) {
    if (auto it = request.payload.find("input_image"); it != request.payload.end() && it->is_string()) {
      body["input_image_png_base64"] = base64_encode(read_input_image(store, *it, "payload.input_image"));
    }
  } else if (request.kind == RequestKind::image_to_3d) {
    endpoint = &config_.mesh;
    body["input_image_png_base64"] =
        base64_encode(read_input_image(store, request.payload.at("image"), "payload.image"));
  } else if (request.kind == RequestKind::skybox) {
    endpoint = &config_.sky;
  }
  const auto res = post(*endpoint, body, config_.timeout);
  cancel.throw_if_cancelled();
  const auto prov = provenance_of(request);
  switch (request.kind) {
    case RequestKind::stylized_image:
      decode_png(res.body);  // validates
      result.asset = store.put(AssetKind::image, res.body, ".png", prov);
      break;
    case RequestKind::image_to_3d: {
      GlbSummary mesh;
      try {
        mesh = read_glb(res.body);
      } catch (const ValidationError& e) {
        throw BackendError(fmt::format("mesh endpoint returned an invalid GLB: {}", e.what()));
      }
      if ((mesh.extents.array() <= 0).any()) throw BackendError("mesh endpoint returned a degenerate mesh");
      result.asset = store.put(AssetKind::mesh, res.body, ".glb", prov, mesh.extents);
      break;
    }
    case RequestKind::texture:
      decode_png(res.body);
      result.asset = store_texture_set(store, res.body, request.payload.at("surface"), 0, prov);
      break;
    case RequestKind::skybox: {
      const auto pano = decode_png(res.body);
      if (pano.width() != 2 * pano.height()) throw BackendError("skybox endpoint returned a non-2:1 panorama");
      result.asset = store_skybox(store, res.body, request.payload.value("duration_s", kSkyboxDurationS), prov);
      break;
    }
    case RequestKind::llm:
      break;
  }
  return result;
}

}  // namespace roomforge::gen
