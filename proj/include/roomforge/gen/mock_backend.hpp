#pragma once

// Deterministic offline backend. Every output is a pure function of the
// request (kind, payload, seed) and, for image-to-3D, the input image bytes.
// Instrumented: per-kind call counts and the maximum number of concurrent
// executions ever observed.

#include <array>
#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <mutex>

#include "roomforge/gen/dispatcher.hpp"

namespace roomforge::gen {

struct MockOptions {
  // Simulated per-kind latency; cancellation is honored while waiting.
  std::map<RequestKind, std::chrono::milliseconds> latency{};
  // Called before each attempt with the 1-based attempt number for the
  // request's idempotency key; may throw to inject failures.
  std::function<void(const GenerationRequest&, int attempt)> fault{};
  // Produces language-model replies. Without it llm requests fail.
  std::function<std::string(const GenerationRequest&)> llm{};
};

inline constexpr double kMockMinExtent = 0.3;
inline constexpr double kMockMaxExtent = 2.5;
inline constexpr int kMockImageSize = 256;

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockOptions options = {});

  JobResult execute(const GenerationRequest& request, AssetStore& store, const CancelToken& cancel) override;

  int calls(RequestKind kind) const;
  int max_in_flight(RequestKind kind) const;
  int in_flight(RequestKind kind) const;
  void reset_counters();

  // Mesh extents the mock derives from an image's content hash.
  static Vec3 extents_for(std::string_view image_content_hash);

 private:
  struct Counter {
    std::atomic<int> calls{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
  };

  JobResult run(const GenerationRequest& request, AssetStore& store);

  MockOptions options_;
  std::array<Counter, 5> counters_;
  std::mutex attempts_mutex_;
  std::map<std::string, int> attempts_;
};

}  // namespace roomforge::gen
