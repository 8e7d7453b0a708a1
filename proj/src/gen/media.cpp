#include "roomforge/gen/media.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstring>

#include "roomforge/core/canonical_json.hpp"
#include "roomforge/core/error.hpp"

namespace roomforge::gen {

std::vector<int> loop_playlist(int frame_count) {
  if (frame_count < 1) throw InvariantError("frame_count must be >= 1", "frame_count");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(1, 2 * frame_count - 2)));
  for (int i = 0; i < frame_count; ++i) out.push_back(i);
  for (int i = frame_count - 2; i >= 1; --i) out.push_back(i);
  return out;
}

namespace {

constexpr std::uint32_t kGlbMagic = 0x46546C67;  // "glTF"
constexpr std::uint32_t kChunkJson = 0x4E4F534A;
constexpr std::uint32_t kChunkBin = 0x004E4942;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw ValidationError("truncated GLB");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

template <typename T>
void put_pod(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::string write_box_glb(const Vec3& extents) {
  const float hx = static_cast<float>(extents.x() / 2);
  const float hy = static_cast<float>(extents.z() / 2);  // glTF up = model z
  const float hz = static_cast<float>(extents.y() / 2);
  // Corner order: bottom quad then top quad, y-up.
  const float pos[8][3] = {{-hx, -hy, hz},  {hx, -hy, hz},  {hx, -hy, -hz}, {-hx, -hy, -hz},
                           {-hx, hy, hz},   {hx, hy, hz},   {hx, hy, -hz},  {-hx, hy, -hz}};
  // Outward-facing, counter-clockwise triangles.
  const std::uint16_t idx[36] = {0, 2, 1, 0, 3, 2,  4, 5, 6, 4, 6, 7,  0, 1, 5, 0, 5, 4,
                                 1, 2, 6, 1, 6, 5,  2, 3, 7, 2, 7, 6,  3, 0, 4, 3, 4, 7};
  std::string bin;
  for (const auto& p : pos) {
    for (float c : p) put_pod(bin, c);
  }
  const std::size_t index_offset = bin.size();
  for (auto i : idx) put_pod(bin, i);
  while (bin.size() % 4) bin.push_back('\0');

  const Json gltf{
      {"asset", {{"version", "2.0"}, {"generator", "roomforge"}}},
      {"scene", 0},
      {"scenes", Json::array({{{"nodes", {0}}}})},
      {"nodes", Json::array({{{"mesh", 0}}})},
      {"meshes", Json::array({{{"primitives", Json::array({{{"attributes", {{"POSITION", 0}}}, {"indices", 1}}})}}})},
      {"buffers", Json::array({{{"byteLength", bin.size()}}})},
      {"bufferViews", Json::array({{{"buffer", 0}, {"byteOffset", 0}, {"byteLength", index_offset}, {"target", 34962}},
                                   {{"buffer", 0},
                                    {"byteOffset", index_offset},
                                    {"byteLength", sizeof(idx)},
                                    {"target", 34963}}})},
      {"accessors", Json::array({{{"bufferView", 0},
                                  {"componentType", 5126},
                                  {"count", 8},
                                  {"type", "VEC3"},
                                  {"min", {-hx, -hy, -hz}},
                                  {"max", {hx, hy, hz}}},
                                 {{"bufferView", 1}, {"componentType", 5123}, {"count", 36}, {"type", "SCALAR"}}})},
  };
  std::string json = gltf.dump();
  while (json.size() % 4) json.push_back(' ');

  std::string out;
  put_u32(out, kGlbMagic);
  put_u32(out, 2);
  put_u32(out, static_cast<std::uint32_t>(12 + 8 + json.size() + 8 + bin.size()));
  put_u32(out, static_cast<std::uint32_t>(json.size()));
  put_u32(out, kChunkJson);
  out += json;
  put_u32(out, static_cast<std::uint32_t>(bin.size()));
  put_u32(out, kChunkBin);
  out += bin;
  return out;
}

GlbSummary read_glb(std::string_view bytes) {
  if (get_u32(bytes, 0) != kGlbMagic) throw ValidationError("not a GLB file");
  if (get_u32(bytes, 8) != bytes.size()) throw ValidationError("GLB length mismatch");
  const auto json_len = get_u32(bytes, 12);
  if (get_u32(bytes, 16) != kChunkJson || 20 + json_len > bytes.size()) throw ValidationError("bad GLB JSON chunk");
  Json gltf;
  try {
    gltf = Json::parse(bytes.substr(20, json_len));
    const auto& prim = gltf.at("meshes").at(0).at("primitives").at(0);
    const auto& pos = gltf.at("accessors").at(prim.at("attributes").at("POSITION").get<std::size_t>());
    const auto& mn = pos.at("min");
    const auto& mx = pos.at("max");
    GlbSummary s;
    // y-up back to z-up: (x, y, z)_gltf -> extents (x, z, y)
    s.extents = Vec3(mx[0].get<double>() - mn[0].get<double>(), mx[2].get<double>() - mn[2].get<double>(),
                     mx[1].get<double>() - mn[1].get<double>());
    s.vertices = pos.at("count").get<std::size_t>();
    if (prim.contains("indices")) {
      s.triangles = gltf.at("accessors").at(prim.at("indices").get<std::size_t>()).at("count").get<std::size_t>() / 3;
    } else {
      s.triangles = s.vertices / 3;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed glTF JSON: ") + e.what());
  }
}

Raster tileable_texture(const Rgba& a, const Rgba& b, int size, int cells) {
  Raster out(size, size);
  const int period = size - 1;  // last row/column repeat the first
  const double cell = static_cast<double>(period) / cells;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int px = x % period;
      const int py = y % period;
      const bool odd = (static_cast<int>(px / cell) + static_cast<int>(py / cell)) % 2;
      // Low-amplitude periodic grain keeps the texture from looking flat.
      const double grain = 8.0 * std::sin(2 * kPi * px / period * 3) * std::cos(2 * kPi * py / period * 2);
      const Rgba& base = odd ? b : a;
      Rgba c;
      for (int k = 0; k < 3; ++k) c[k] = static_cast<std::uint8_t>(std::clamp(base[k] + grain, 0.0, 255.0));
      c[3] = 255;
      out.set(x, y, c);
    }
  }
  return out;
}

Raster flat_normal_map(int size) { return Raster(size, size, {128, 128, 255, 255}); }

Raster constant_map(std::uint8_t value, int size) { return Raster(size, size, {value, value, value, 255}); }

Raster gradient_panorama(const Rgba& zenith, const Rgba& horizon, double phase, int width) {
  const int height = width / 2;
  Raster out(width, height);
  for (int y = 0; y < height; ++y) {
    const double t = static_cast<double>(y) / (height - 1);
    for (int x = 0; x < width; ++x) {
      const double wave = 10.0 * std::sin(2 * kPi * x / width + phase) * std::sin(kPi * t);
      Rgba c;
      for (int k = 0; k < 3; ++k) {
        c[k] = static_cast<std::uint8_t>(std::clamp(zenith[k] * (1 - t) + horizon[k] * t + wave, 0.0, 255.0));
      }
      c[3] = 255;
      out.set(x, y, c);
    }
  }
  return out;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4) throw ValidationError("base64 length must be a multiple of 4");
  std::string out(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw ValidationError("invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

}  // namespace roomforge::gen
