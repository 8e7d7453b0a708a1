#include "roomforge/gen/types.hpp"

#include <fmt/format.h>

#include "roomforge/core/error.hpp"
#include "roomforge/core/hash.hpp"

namespace roomforge::gen {

namespace {

constexpr std::pair<RequestKind, std::string_view> kRequestNames[] = {
    {RequestKind::llm, "llm"},
    {RequestKind::stylized_image, "stylized-image"},
    {RequestKind::image_to_3d, "image-to-3d"},
    {RequestKind::texture, "texture"},
    {RequestKind::skybox, "skybox"},
};

constexpr std::pair<AssetKind, std::string_view> kAssetNames[] = {
    {AssetKind::image, "image"},
    {AssetKind::mesh, "mesh"},
    {AssetKind::texture_set, "texture-set"},
    {AssetKind::panorama, "panorama"},
    {AssetKind::motion_playlist, "motion-playlist"},
};

void require_string(const Json& payload, std::string_view key, bool allow_null = false) {
  auto it = payload.find(key);
  const bool ok = it != payload.end() &&
                  ((it->is_string() && !it->get<std::string>().empty()) || (allow_null && it->is_null()));
  if (!ok) {
    throw ValidationError(fmt::format("payload field '{}' must be a non-empty string", key),
                          fmt::format("payload.{}", key));
  }
}

}  // namespace

std::string_view to_string(RequestKind kind) {
  for (const auto& [k, name] : kRequestNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<RequestKind> parse_request_kind(std::string_view text) {
  for (const auto& [k, name] : kRequestNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(AssetKind kind) {
  for (const auto& [k, name] : kAssetNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<AssetKind> parse_asset_kind(std::string_view text) {
  for (const auto& [k, name] : kAssetNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string GenerationRequest::idempotency_key() const {
  const Json doc{{"kind", to_string(kind)}, {"payload", payload}, {"seed", seed}};
  return sha256_hex(canonical_dump(doc));
}

void GenerationRequest::validate() const {
  if (!payload.is_object()) throw ValidationError("payload must be an object", "payload");
  switch (kind) {
    case RequestKind::llm: {
      auto it = payload.find("messages");
      if (it == payload.end() || !it->is_array() || it->empty()) {
        throw ValidationError("llm payload needs a non-empty messages array", "payload.messages");
      }
      for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& m = (*it)[i];
        if (!m.is_object() || !m.contains("role") || !m["role"].is_string() || !m.contains("content") ||
            !m["content"].is_string()) {
          throw ValidationError("message needs string role and content", fmt::format("payload.messages[{}]", i));
        }
      }
      break;
    }
    case RequestKind::stylized_image:
      require_string(payload, "prompt");
      if (payload.contains("input_image")) require_string(payload, "input_image", true);
      break;
    case RequestKind::image_to_3d:
      require_string(payload, "image");
      break;
    case RequestKind::texture: {
      require_string(payload, "prompt");
      require_string(payload, "surface");
      const auto surface = payload["surface"].get<std::string>();
      if (surface != "wall" && surface != "floor") {
        throw ValidationError("surface must be 'wall' or 'floor'", "payload.surface");
      }
      break;
    }
    case RequestKind::skybox:
      require_string(payload, "prompt");
      break;
  }
}

Json AssetRecord::to_json() const {
  Json doc{{"asset_id", asset_id},
           {"kind", to_string(kind)},
           {"path", path},
           {"content_hash", content_hash},
           {"provenance", provenance}};
  if (extents) {
    doc["extents"] = {extents->x(), extents->y(), extents->z()};
  } else {
    doc["extents"] = nullptr;
  }
  return doc;
}

AssetRecord AssetRecord::from_json(const Json& doc) {
  try {
    AssetRecord r;
    r.asset_id = doc.at("asset_id").get<std::string>();
    const auto kind = parse_asset_kind(doc.at("kind").get<std::string>());
    if (!kind) throw SchemaError("unknown asset kind", "kind");
    r.kind = *kind;
    r.path = doc.at("path").get<std::string>();
    r.content_hash = doc.at("content_hash").get<std::string>();
    if (auto it = doc.find("extents"); it != doc.end() && !it->is_null()) {
      r.extents = Vec3((*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>());
    }
    if (auto it = doc.find("provenance"); it != doc.end()) r.provenance = *it;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("malformed asset record: {}", e.what()));
  }
}

void CancelToken::throw_if_cancelled() const {
  if (cancelled()) throw Cancelled("job cancelled");
}

}  // namespace roomforge::gen
