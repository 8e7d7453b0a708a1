#include "roomforge/gen/asset_store.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <system_error>

#include "roomforge/core/error.hpp"
#include "roomforge/core/hash.hpp"

namespace roomforge::gen {

namespace fs = std::filesystem;

namespace {

bool is_hex_id(std::string_view id) {
  return !id.empty() && id.size() <= 128 &&
         std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

}  // namespace

AssetStore::AssetStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "objects");
  fs::create_directories(root_ / "records");
  fs::create_directories(root_ / "requests");
}

AssetRecord AssetStore::put(AssetKind kind, std::string_view bytes, std::string_view extension, Json provenance,
                            std::optional<Vec3> extents) {
  const auto hash = sha256_hex(bytes);
  std::lock_guard lock(mutex_);
  if (auto existing = find(hash)) return *existing;
  AssetRecord record;
  record.asset_id = hash;
  record.kind = kind;
  record.path = fmt::format("objects/{}{}", hash, extension);
  record.content_hash = hash;
  record.extents = extents;
  record.provenance = std::move(provenance);
  write_file_atomic(root_ / record.path, bytes);
  // The record goes last: a record on disk implies its bytes are complete.
  write_file_atomic(root_ / "records" / (hash + ".json"), canonical_dump(record.to_json()));
  return record;
}

std::optional<AssetRecord> AssetStore::find(std::string_view asset_id) const {
  if (!is_hex_id(asset_id)) return std::nullopt;
  const auto path = root_ / "records" / (std::string(asset_id) + ".json");
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  try {
    return AssetRecord::from_json(parse_json(read_file(path), "asset record"));
  } catch (const MissingInput&) {
    return std::nullopt;  // removed concurrently
  }
}

AssetRecord AssetStore::get(std::string_view asset_id) const {
  if (auto r = find(asset_id)) return *r;
  throw MissingAsset(fmt::format("asset '{}' is not in the store", asset_id), std::string(asset_id));
}

std::string AssetStore::read(const AssetRecord& record) const {
  try {
    return read_file(root_ / record.path);
  } catch (const MissingInput&) {
    throw MissingAsset(fmt::format("asset bytes for '{}' are missing", record.asset_id), record.asset_id);
  }
}

fs::path AssetStore::absolute_path(const AssetRecord& record) const { return root_ / record.path; }

std::vector<std::string> AssetStore::dependencies(const AssetRecord& record) const {
  std::vector<std::string> ids;
  const char* const* keys = nullptr;
  static constexpr const char* kTextureKeys[] = {"albedo", "normal", "metallic", nullptr};
  static constexpr const char* kPlaylistKeys[] = {"panorama", nullptr};
  if (record.kind == AssetKind::texture_set) keys = kTextureKeys;
  if (record.kind == AssetKind::motion_playlist) keys = kPlaylistKeys;
  if (!keys) return ids;
  const auto doc = parse_json(read(record), record.asset_id);
  for (; *keys; ++keys) {
    if (auto it = doc.find(*keys); it != doc.end() && it->is_string()) ids.push_back(it->get<std::string>());
  }
  return ids;
}

bool AssetStore::verify(const AssetRecord& record) const {
  try {
    return sha256_hex(read(record)) == record.content_hash && record.asset_id == record.content_hash;
  } catch (const MissingAsset&) {
    return false;
  }
}

std::optional<JobResult> AssetStore::lookup_request(std::string_view key) const {
  if (!is_hex_id(key)) return std::nullopt;
  const auto path = root_ / "requests" / (std::string(key) + ".json");
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  Json doc;
  try {
    doc = parse_json(read_file(path), "request index");
  } catch (const MissingInput&) {
    return std::nullopt;
  }
  JobResult result;
  if (auto it = doc.find("text"); it != doc.end() && it->is_string()) {
    result.text = it->get<std::string>();
    return result;
  }
  if (auto it = doc.find("asset_id"); it != doc.end() && it->is_string()) {
    auto record = find(it->get<std::string>());
    if (!record || !verify(*record)) return std::nullopt;
    result.asset = std::move(*record);
    return result;
  }
  return std::nullopt;
}

void AssetStore::remember_request(std::string_view key, const JobResult& result) {
  Json doc = Json::object();
  if (result.asset) doc["asset_id"] = result.asset->asset_id;
  if (result.text) doc["text"] = *result.text;
  write_file_atomic(root_ / "requests" / (std::string(key) + ".json"), canonical_dump(doc));
}

void AssetStore::remove(std::string_view asset_id) {
  if (!is_hex_id(asset_id)) return;
  std::lock_guard lock(mutex_);
  const auto record = find(asset_id);
  std::error_code ec;
  fs::remove(root_ / "records" / (std::string(asset_id) + ".json"), ec);
  if (record) fs::remove(root_ / record->path, ec);
  for (const auto& entry : fs::directory_iterator(root_ / "requests", ec)) {
    try {
      const auto doc = parse_json(read_file(entry.path()), "request index");
      if (doc.value("asset_id", std::string()) == asset_id) fs::remove(entry.path(), ec);
    } catch (const Error&) {
    }
  }
}

bool AssetStore::remove_if_unreferenced(std::string_view asset_id) {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "requests", ec)) {
    try {
      const auto doc = parse_json(read_file(entry.path()), "request index");
      if (doc.value("asset_id", std::string()) == asset_id) return false;
    } catch (const Error&) {
    }
  }
  remove(asset_id);
  return true;
}

std::vector<AssetRecord> AssetStore::list() const {
  std::vector<AssetRecord> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "records", ec)) {
    if (entry.path().extension() != ".json") continue;
    if (auto r = find(entry.path().stem().string())) out.push_back(std::move(*r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.asset_id < b.asset_id; });
  return out;
}

}  // namespace roomforge::gen
