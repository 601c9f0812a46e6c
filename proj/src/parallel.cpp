#include "sastl/parallel.hpp"

#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>

namespace sastl {

namespace {
thread_local bool tl_in_worker = false;
}

void check(const ParallelConfig& cfg) {
  if (cfg.worker_count == 0) throw std::invalid_argument("worker count must be >= 1");
  if (cfg.parallel_threshold == 0) throw std::invalid_argument("parallel threshold must be >= 1");
}

std::optional<std::size_t> workers_from_env() {
  const char* v = std::getenv("SASTL_WORKERS");
  if (!v || !*v) return std::nullopt;
  try {
    const long n = std::stol(v);
    if (n > 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers == 0) throw std::invalid_argument("worker pool needs at least one thread");
  threads_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this, i] { loop(i); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

bool WorkerPool::in_worker() { return tl_in_worker; }

void WorkerPool::run(std::size_t tasks, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (tasks == 0) return;
  std::lock_guard serial(submit_);
  std::unique_lock lk(mu_);
  job_ = &fn;
  tasks_ = tasks;
  next_.store(0, std::memory_order_relaxed);
  finished_ = 0;
  ++generation_;
  wake_.notify_all();
  done_.wait(lk, [&] { return finished_ == threads_.size(); });
  job_ = nullptr;
}

void WorkerPool::loop(std::size_t id) {
  tl_in_worker = true;
  std::size_t seen = 0;
  while (true) {
    const std::function<void(std::size_t, std::size_t)>* job = nullptr;
    std::size_t tasks = 0;
    {
      std::unique_lock lk(mu_);
      wake_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
      tasks = tasks_;
    }
    for (std::size_t i = next_.fetch_add(1); i < tasks; i = next_.fetch_add(1)) (*job)(i, id);
    {
      std::lock_guard lk(mu_);
      if (++finished_ == threads_.size()) done_.notify_one();
    }
  }
}

}  // namespace sastl
