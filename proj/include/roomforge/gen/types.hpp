#pragma once

// Generation requests and the asset records they resolve to.
//
// Payload shapes per kind (all JSON objects):
//   llm             {"messages": [{"role", "content"}...], "attachment": asset_id|null}
//   stylized-image  {"prompt": text, "input_image": asset_id|null}
//   image-to-3d     {"image": asset_id}
//   texture         {"prompt": text, "surface": "wall"|"floor"}
//   skybox          {"prompt", "negative_text", "motion_instruction", "system_prompt": text,
//                    "duration_s": int}

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "roomforge/core/canonical_json.hpp"
#include "roomforge/core/linalg.hpp"

namespace roomforge::gen {

enum class RequestKind { llm, stylized_image, image_to_3d, texture, skybox };
inline constexpr RequestKind kAllRequestKinds[] = {RequestKind::llm, RequestKind::stylized_image,
                                                   RequestKind::image_to_3d, RequestKind::texture,
                                                   RequestKind::skybox};

std::string_view to_string(RequestKind kind);
std::optional<RequestKind> parse_request_kind(std::string_view text);

struct GenerationRequest {
  RequestKind kind = RequestKind::llm;
  Json payload = Json::object();
  std::uint64_t seed = 0;

  // sha256 of the canonical (kind, payload, seed) document.
  std::string idempotency_key() const;
  void validate() const;  // throws ValidationError on a malformed payload
};

enum class AssetKind { image, mesh, texture_set, panorama, motion_playlist };

std::string_view to_string(AssetKind kind);
std::optional<AssetKind> parse_asset_kind(std::string_view text);

struct AssetRecord {
  std::string asset_id;      // equals content_hash
  AssetKind kind = AssetKind::image;
  std::string path;          // store-relative, "objects/<hash><ext>"
  std::string content_hash;  // sha256 hex of the stored bytes
  std::optional<Vec3> extents;  // meshes only, meters, z-up
  Json provenance = Json::object();

  Json to_json() const;
  static AssetRecord from_json(const Json& doc);
  friend bool operator==(const AssetRecord&, const AssetRecord&) = default;
};

// Result of one generation job: an asset, or text for language-model calls.
struct JobResult {
  std::optional<AssetRecord> asset;
  std::optional<std::string> text;
};

// Shared cancellation flag. Copies observe the same flag.
class CancelToken {
 public:
  CancelToken() : flag_(std::make_shared<std::atomic<bool>>(false)) {}
  void cancel() const noexcept { flag_->store(true); }
  bool cancelled() const noexcept { return flag_->load(); }
  void throw_if_cancelled() const;

 private:
  std::shared_ptr<std::atomic<bool>> flag_;
};

}  // namespace roomforge::gen
