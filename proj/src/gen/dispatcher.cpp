#include "roomforge/gen/dispatcher.hpp"

#include <fmt/format.h>

#include "roomforge/core/error.hpp"

namespace roomforge::gen {

namespace detail {

struct JobState {
  GenerationRequest request;
  std::string key;
  CancelToken cancel;
  std::chrono::milliseconds default_timeout{0};

  mutable std::mutex mutex;
  mutable std::condition_variable cv;
  bool done = false;
  std::optional<JobResult> result;
  std::exception_ptr error;

  void finish(std::optional<JobResult> r, std::exception_ptr e) {
    {
      std::lock_guard lock(mutex);
      if (done) return;
      done = true;
      result = std::move(r);
      error = e;
    }
    cv.notify_all();
  }
};

}  // namespace detail

using detail::JobState;

int Budgets::slots(RequestKind kind) const {
  switch (kind) {
    case RequestKind::stylized_image:
      return stylized_image;
    case RequestKind::image_to_3d:
      return image_to_3d;
    default:
      return other;
  }
}

bool JobHandle::ready() const {
  std::lock_guard lock(state_->mutex);
  return state_->done;
}

const std::string& JobHandle::key() const { return state_->key; }
const GenerationRequest& JobHandle::request() const { return state_->request; }

JobResult JobHandle::wait() const { return wait_for(state_->default_timeout); }

JobResult JobHandle::wait_for(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(state_->mutex);
  if (!state_->cv.wait_for(lock, timeout, [&] { return state_->done; })) {
    lock.unlock();
    state_->cancel.cancel();
    throw Timeout(fmt::format("{} request timed out after {} ms", to_string(state_->request.kind),
                              timeout.count()),
                  state_->key);
  }
  if (state_->error) std::rethrow_exception(state_->error);
  return *state_->result;
}

void JobHandle::cancel() const { state_->cancel.cancel(); }

Dispatcher::Dispatcher(Backend& backend, AssetStore& store, DispatcherOptions options)
    : backend_(backend), store_(store), options_(options) {
  for (auto kind : kAllRequestKinds) {
    auto& lane = lanes_[kind];
    const int slots = std::max(1, options_.budgets.slots(kind));
    for (int i = 0; i < slots; ++i) {
      lane.workers.emplace_back([this, kind] { worker_loop(kind); });
    }
  }
}

Dispatcher::~Dispatcher() { shutdown(); }

void Dispatcher::shutdown() {
  std::vector<std::shared_ptr<JobState>> dropped;
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
    for (auto& [kind, lane] : lanes_) {
      for (auto& job : lane.queue) dropped.push_back(job);
      lane.queue.clear();
    }
  }
  cv_.notify_all();
  for (auto& job : dropped) {
    job->cancel.cancel();
    job->finish(std::nullopt, std::make_exception_ptr(Cancelled("dispatcher shut down", job->key)));
  }
  for (auto& [kind, lane] : lanes_) {
    for (auto& w : lane.workers) {
      if (w.joinable()) w.join();
    }
  }
}

JobHandle Dispatcher::submit(GenerationRequest request, CancelToken cancel) {
  request.validate();
  auto job = std::make_shared<JobState>();
  job->key = request.idempotency_key();
  job->request = std::move(request);
  job->cancel = std::move(cancel);
  job->default_timeout = options_.timeout;

  if (auto cached = store_.lookup_request(job->key)) {
    job->finish(std::move(cached), nullptr);
    return JobHandle(job);
  }
  {
    std::lock_guard lock(mutex_);
    if (stopping_) throw Cancelled("dispatcher is shut down");
    if (auto it = active_.find(job->key); it != active_.end()) {
      if (auto existing = it->second.lock()) {
        std::lock_guard job_lock(existing->mutex);
        if (!existing->done && !existing->cancel.cancelled()) return JobHandle(existing);
      }
    }
    active_[job->key] = job;
    lanes_[job->request.kind].queue.push_back(job);
  }
  cv_.notify_all();
  return JobHandle(job);
}

void Dispatcher::worker_loop(RequestKind kind) {
  for (;;) {
    std::shared_ptr<JobState> job;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return stopping_ || !lanes_[kind].queue.empty(); });
      if (stopping_ && lanes_[kind].queue.empty()) return;
      job = std::move(lanes_[kind].queue.front());
      lanes_[kind].queue.pop_front();
    }
    run_job(*job);
    std::lock_guard lock(mutex_);
    if (auto it = active_.find(job->key); it != active_.end() && it->second.lock() == job) active_.erase(it);
  }
}

void Dispatcher::run_job(JobState& job) {
  if (job.cancel.cancelled()) {
    job.finish(std::nullopt, std::make_exception_ptr(Cancelled("job cancelled before dispatch", job.key)));
    return;
  }
  // A concurrent identical job may have finished while this one was queued.
  if (auto cached = store_.lookup_request(job.key)) {
    job.finish(std::move(cached), nullptr);
    return;
  }
  int attempt = 0;
  for (;;) {
    ++attempt;
    try {
      auto result = backend_.execute(job.request, store_, job.cancel);
      if (job.cancel.cancelled()) {
        if (result.asset) store_.remove_if_unreferenced(result.asset->asset_id);
        throw Cancelled("job cancelled while running", job.key);
      }
      store_.remember_request(job.key, result);
      job.finish(std::move(result), nullptr);
      return;
    } catch (const BackendError&) {
      if (attempt <= options_.retries_on_backend_error && !job.cancel.cancelled()) continue;
      job.finish(std::nullopt, std::current_exception());
      return;
    } catch (...) {
      job.finish(std::nullopt, std::current_exception());
      return;
    }
  }
}

}  // namespace roomforge::gen
