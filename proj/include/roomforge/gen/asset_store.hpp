#pragma once

// Content-addressed asset store on disk:
//   {root}/objects/{hash}{.png|.glb|.json}   asset bytes
//   {root}/records/{hash}.json               AssetRecord
//   {root}/requests/{idempotency_key}.json   {"asset_id"} or {"text"} of a finished request
// Every file is written through write_file_atomic, so concurrent readers see
// either nothing or the complete file.

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roomforge/gen/types.hpp"

namespace roomforge::gen {

class AssetStore {
 public:
  explicit AssetStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  // Stores `bytes` (if not already present) and its record. When the content
  // already exists the existing record is returned unchanged.
  AssetRecord put(AssetKind kind, std::string_view bytes, std::string_view extension, Json provenance,
                  std::optional<Vec3> extents = std::nullopt);

  std::optional<AssetRecord> find(std::string_view asset_id) const;
  AssetRecord get(std::string_view asset_id) const;  // throws MissingAsset
  std::string read(const AssetRecord& record) const;  // throws MissingAsset
  std::string read(std::string_view asset_id) const { return read(get(asset_id)); }
  std::filesystem::path absolute_path(const AssetRecord& record) const;

  // Assets a bundle document points at: the maps of a texture set, the
  // panorama of a motion playlist. Empty for every other kind.
  std::vector<std::string> dependencies(const AssetRecord& record) const;

  // Recomputes the hash of the stored bytes.
  bool verify(const AssetRecord& record) const;

  std::optional<JobResult> lookup_request(std::string_view key) const;
  void remember_request(std::string_view key, const JobResult& result);

  // Deletes an asset and every request entry pointing at it.
  void remove(std::string_view asset_id);
  // Removes the asset only when no request entry points at it.
  bool remove_if_unreferenced(std::string_view asset_id);

  std::vector<AssetRecord> list() const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;  // serializes remove() against put()
};

}  // namespace roomforge::gen
