#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace sastl {

struct ParallelConfig {
  std::size_t worker_count = 1;
  /// Minimum |L^l_D| before a spatial operator fans out.
  std::size_t parallel_threshold = 32;
};

/// Validates `cfg`, throwing std::invalid_argument on a zero worker count or threshold.
void check(const ParallelConfig& cfg);

/// Reads SASTL_WORKERS from the environment, if set to a positive integer.
std::optional<std::size_t> workers_from_env();

/// Fixed set of worker threads draining a shared task queue.
///
/// run() publishes tasks [0, n); each worker pops the next index until the queue
/// is empty, then the caller is released once every worker has drained. One job
/// runs at a time; concurrent callers are serialized.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  [[nodiscard]] std::size_t size() const { return threads_.size(); }

  /// Calls fn(task, worker) for every task; blocks until all are done.
  /// fn must not throw.
  void run(std::size_t tasks, const std::function<void(std::size_t, std::size_t)>& fn);

  /// True on a pool thread; nested spatial operators use it to stay sequential.
  static bool in_worker();

 private:
  void loop(std::size_t id);

  std::vector<std::thread> threads_;
  std::mutex submit_;
  std::mutex mu_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t tasks_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t generation_ = 0;
  std::size_t finished_ = 0;
  bool stop_ = false;
};

}  // namespace sastl
