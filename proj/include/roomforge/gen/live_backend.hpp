#pragma once

// Thin HTTP adapters for live generation services.
//
// Configuration comes from the environment:
//   ROOMFORGE_BACKEND      mock | live
//   ROOMFORGE_LLM_URL      chat-completions endpoint (OpenAI-compatible)
//   ROOMFORGE_IMG_URL      stylized-image and texture endpoint
//   ROOMFORGE_MESH_URL     image-to-3D endpoint
//   ROOMFORGE_SKY_URL      skybox endpoint
//   ROOMFORGE_*_KEY        bearer credential for the matching URL
//   ROOMFORGE_LLM_MODEL    model name sent to the chat endpoint (default "default")
//
// Asset endpoints receive POST {"kind", "payload", "seed", "input_image_png_base64"?}
// and answer 200 with the raw asset bytes (PNG for images, textures and
// panoramas, GLB for meshes). 422 and 451 mean the content was refused;
// anything else non-2xx, or a transport failure, is a BackendError.

#include <chrono>
#include <optional>
#include <string>

#include "roomforge/gen/dispatcher.hpp"

namespace roomforge::gen {

struct Endpoint {
  std::string url;
  std::string key;
  bool configured() const { return !url.empty(); }
};

struct LiveConfig {
  Endpoint llm;
  Endpoint image;
  Endpoint mesh;
  Endpoint sky;
  std::string llm_model = "default";
  std::chrono::seconds timeout{300};

  static LiveConfig from_env();
};

enum class BackendMode { mock, live };
BackendMode backend_mode_from_env();  // ROOMFORGE_BACKEND, default mock

class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveConfig config);
  JobResult execute(const GenerationRequest& request, AssetStore& store, const CancelToken& cancel) override;

 private:
  LiveConfig config_;
};

}  // namespace roomforge::gen
