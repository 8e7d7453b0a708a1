#include "roomforge/gen/mock_backend.hpp"

#include <fmt/format.h>

#include <cmath>
#include <thread>

#include "roomforge/core/error.hpp"
#include "roomforge/core/hash.hpp"
#include "roomforge/gen/media.hpp"

#include "bundles.hpp"

namespace roomforge::gen {

namespace {

Json provenance_of(const GenerationRequest& request) {
  return Json{{"kind", to_string(request.kind)}, {"payload", request.payload}, {"seed", request.seed},
              {"backend", "mock"}};
}

Digest request_digest(const GenerationRequest& request, std::string_view salt) {
  return sha256(request.idempotency_key() + ":" + std::string(salt));
}

Rgba color_from(const Digest& d, std::size_t offset) {
  // Keep channels away from black so silhouettes stay visible.
  return {static_cast<std::uint8_t>(40 + d[offset] % 200), static_cast<std::uint8_t>(40 + d[offset + 1] % 200),
          static_cast<std::uint8_t>(40 + d[offset + 2] % 200), 255};
}

// Ellipse body over a rectangular base, both sized from the digest.
Raster silhouette(const Digest& d) {
  const int n = kMockImageSize;
  Raster img(n, n, {0, 0, 0, 0});
  const Rgba body = color_from(d, 0);
  const Rgba base = color_from(d, 3);
  const double rx = n * (0.18 + 0.2 * digest_unit(d, 8));
  const double ry = n * (0.12 + 0.15 * digest_unit(d, 12));
  const double cy = n * 0.42;
  const double half_base = n * (0.1 + 0.25 * digest_unit(d, 16));
  const double base_top = cy + ry * 0.6;
  const double base_bottom = n * (0.78 + 0.12 * digest_unit(d, 20));
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = (x + 0.5 - n / 2.0) / rx;
      const double dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) {
        img.set(x, y, body);
      } else if (std::abs(x + 0.5 - n / 2.0) <= half_base && y + 0.5 >= base_top && y + 0.5 <= base_bottom) {
        img.set(x, y, base);
      }
    }
  }
  return img;
}

class InFlight {
 public:
  InFlight(std::atomic<int>& now, std::atomic<int>& peak) : now_(now) {
    const int v = ++now_;
    int p = peak.load();
    while (v > p && !peak.compare_exchange_weak(p, v)) {
    }
  }
  ~InFlight() { --now_; }
  InFlight(const InFlight&) = delete;
  InFlight& operator=(const InFlight&) = delete;

 private:
  std::atomic<int>& now_;
};

}  // namespace

MockBackend::MockBackend(MockOptions options) : options_(std::move(options)) {}

Vec3 MockBackend::extents_for(std::string_view image_content_hash) {
  const auto d = sha256(std::string(image_content_hash) + ":extents");
  Vec3 e;
  for (int i = 0; i < 3; ++i) e[i] = kMockMinExtent + (kMockMaxExtent - kMockMinExtent) * digest_unit(d, 4 * i);
  return e;
}

int MockBackend::calls(RequestKind kind) const { return counters_[static_cast<std::size_t>(kind)].calls.load(); }
int MockBackend::max_in_flight(RequestKind kind) const {
  return counters_[static_cast<std::size_t>(kind)].max_in_flight.load();
}
int MockBackend::in_flight(RequestKind kind) const {
  return counters_[static_cast<std::size_t>(kind)].in_flight.load();
}

void MockBackend::reset_counters() {
  for (auto& c : counters_) {
    c.calls = 0;
    c.max_in_flight = c.in_flight.load();
  }
  std::lock_guard lock(attempts_mutex_);
  attempts_.clear();
}

JobResult MockBackend::execute(const GenerationRequest& request, AssetStore& store, const CancelToken& cancel) {
  auto& counter = counters_[static_cast<std::size_t>(request.kind)];
  ++counter.calls;
  InFlight guard(counter.in_flight, counter.max_in_flight);

  int attempt = 0;
  {
    std::lock_guard lock(attempts_mutex_);
    attempt = ++attempts_[request.idempotency_key()];
  }
  if (options_.fault) options_.fault(request, attempt);

  if (auto it = options_.latency.find(request.kind); it != options_.latency.end()) {
    const auto deadline = std::chrono::steady_clock::now() + it->second;
    while (std::chrono::steady_clock::now() < deadline) {
      cancel.throw_if_cancelled();
      std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(
          std::chrono::milliseconds(5), deadline - std::chrono::steady_clock::now()));
    }
  }
  cancel.throw_if_cancelled();
  return run(request, store);
}

JobResult MockBackend::run(const GenerationRequest& request, AssetStore& store) {
  JobResult result;
  switch (request.kind) {
    case RequestKind::llm: {
      if (!options_.llm) throw BackendError("mock backend has no language-model responder");
      result.text = options_.llm(request);
      break;
    }
    case RequestKind::stylized_image: {
      const auto png = encode_png(silhouette(request_digest(request, "image")));
      result.asset = store.put(AssetKind::image, png, ".png", provenance_of(request));
      break;
    }
    case RequestKind::image_to_3d: {
      const auto image_id = request.payload.at("image").get<std::string>();
      const auto image = store.find(image_id);
      if (!image) throw MissingInput(fmt::format("input image '{}' is not in the store", image_id), "payload.image");
      const Vec3 extents = extents_for(image->content_hash);
      result.asset = store.put(AssetKind::mesh, write_box_glb(extents), ".glb", provenance_of(request), extents);
      break;
    }
    case RequestKind::texture: {
      const auto d = request_digest(request, "texture");
      const auto albedo = encode_png(tileable_texture(color_from(d, 0), color_from(d, 3)));
      result.asset = store_texture_set(store, albedo, request.payload.at("surface"),
                                       static_cast<std::uint8_t>(d[6] % 64), provenance_of(request));
      break;
    }
    case RequestKind::skybox: {
      const auto d = request_digest(request, "skybox");
      const double phase = 2 * kPi * digest_unit(d, 8);
      const auto pano = encode_png(gradient_panorama(color_from(d, 0), color_from(d, 3), phase));
      result.asset = store_skybox(store, pano, request.payload.value("duration_s", kSkyboxDurationS),
                                  provenance_of(request));
      break;
    }
  }
  return result;
}

}  // namespace roomforge::gen
