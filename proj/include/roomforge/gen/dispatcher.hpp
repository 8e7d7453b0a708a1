#pragma once

// Bounded-concurrency job dispatcher over a generation backend.
//
// Each request kind owns a FIFO queue drained by exactly `slots(kind)` worker
// threads, so at most that many requests of the kind are in flight. Finished
// requests are indexed in the asset store by idempotency key; resubmitting one
// resolves immediately without touching the backend, and identical requests
// already queued or running share one job.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "roomforge/gen/asset_store.hpp"
#include "roomforge/gen/types.hpp"

namespace roomforge::gen {

class Backend {
 public:
  virtual ~Backend() = default;
  // One attempt. Throws BackendError (transport), ContentRejected,
  // MissingInput or Cancelled.
  virtual JobResult execute(const GenerationRequest& request, AssetStore& store,
                            const CancelToken& cancel) = 0;
};

struct Budgets {
  int stylized_image = 2;
  int image_to_3d = 9;
  int other = 4;

  int slots(RequestKind kind) const;
};

struct DispatcherOptions {
  Budgets budgets{};
  std::chrono::milliseconds timeout{std::chrono::seconds(300)};
  int retries_on_backend_error = 1;
};

namespace detail {
struct JobState;
}

class JobHandle {
 public:
  JobHandle() = default;
  explicit JobHandle(std::shared_ptr<detail::JobState> state) : state_(std::move(state)) {}

  bool valid() const noexcept { return state_ != nullptr; }
  bool ready() const;
  const std::string& key() const;
  const GenerationRequest& request() const;

  // Blocks until the job finishes. Rethrows the job's error; throws Timeout
  // (and cancels the job) once `timeout` elapses, defaulting to the
  // dispatcher's configured timeout.
  JobResult wait() const;
  JobResult wait_for(std::chrono::milliseconds timeout) const;
  void cancel() const;

 private:
  std::shared_ptr<detail::JobState> state_;
};

class Dispatcher {
 public:
  Dispatcher(Backend& backend, AssetStore& store, DispatcherOptions options = {});
  ~Dispatcher();
  Dispatcher(const Dispatcher&) = delete;
  Dispatcher& operator=(const Dispatcher&) = delete;

  // Thread-safe. Throws ValidationError for malformed payloads.
  JobHandle submit(GenerationRequest request, CancelToken cancel = {});

  const DispatcherOptions& options() const noexcept { return options_; }
  AssetStore& store() noexcept { return store_; }

  // Stops accepting work, cancels queued jobs and joins the workers.
  void shutdown();

 private:
  struct Lane {
    std::deque<std::shared_ptr<detail::JobState>> queue;
    std::vector<std::jthread> workers;
  };

  void worker_loop(RequestKind kind);
  void run_job(detail::JobState& job);

  Backend& backend_;
  AssetStore& store_;
  DispatcherOptions options_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::map<RequestKind, Lane> lanes_;
  std::map<std::string, std::weak_ptr<detail::JobState>> active_;
};

}  // namespace roomforge::gen
