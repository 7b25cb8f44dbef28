#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

// Deterministic fork/join helper.
//
// Work is split into exactly `workers()` contiguous chunks regardless of how
// many OS threads end up running them, and any reduction the caller performs
// must walk chunk results in chunk order. That makes training output a pure
// function of (config, seed, thread count), never of scheduling.

namespace tinerf {

class ThreadPool {
 public:
  explicit ThreadPool(int workers) : workers_(workers < 1 ? 1 : workers) {
    for (int i = 1; i < workers_; ++i) {
      threads_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return workers_; }

  // Runs fn(chunk, begin, end) for `workers()` contiguous chunks of [0, n).
  // Blocks until every chunk finished. fn must not throw.
  void for_chunks(size_t n, const std::function<void(int, size_t, size_t)>& fn) {
    if (workers_ == 1 || n == 0) {
      for (int c = 0; c < workers_; ++c) {
        auto [b, e] = chunk_range(n, c);
        fn(c, b, e);
      }
      return;
    }
    {
      std::unique_lock<std::mutex> lk(mu_);
      job_ = &fn;
      job_n_ = n;
      pending_ = workers_ - 1;
      ++epoch_;
    }
    cv_.notify_all();
    {
      auto [b, e] = chunk_range(n, 0);
      fn(0, b, e);
    }
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

  std::pair<size_t, size_t> chunk_range(size_t n, int chunk) const {
    size_t k = static_cast<size_t>(workers_);
    size_t b = n * static_cast<size_t>(chunk) / k;
    size_t e = n * static_cast<size_t>(chunk + 1) / k;
    return {b, e};
  }

 private:
  void worker_loop(int chunk) {
    uint64_t seen = 0;
    for (;;) {
      const std::function<void(int, size_t, size_t)>* job = nullptr;
      size_t n = 0;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
        if (stop_) return;
        seen = epoch_;
        job = job_;
        n = job_n_;
      }
      auto [b, e] = chunk_range(n, chunk);
      (*job)(chunk, b, e);
      {
        std::unique_lock<std::mutex> lk(mu_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(int, size_t, size_t)>* job_ = nullptr;
  size_t job_n_ = 0;
  uint64_t epoch_ = 0;
  int pending_ = 0;
  bool stop_ = false;
};

}  // namespace tinerf
