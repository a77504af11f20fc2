// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/threading.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#if defined(LOCO_HAVE_OPENBLAS)
extern "C" void openblas_set_num_threads(int);
#endif

namespace loco {

struct ThreadPool::Impl {
  std::vector<std::thread> workers;
  std::mutex mu;
  std::condition_variable cv_work;
  std::condition_variable cv_done;

  // Current job, guarded by mu.
  const std::function<void(std::int64_t)>* item_fn = nullptr;
  std::atomic<std::int64_t> next{0};
  std::int64_t total = 0;
  std::uint64_t job_id = 0;
  int active = 0;
  bool stop = false;
  std::exception_ptr error;

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(std::int64_t)>* fn = nullptr;
      {
        std::unique_lock<std::mutex> lk(mu);
        cv_work.wait(lk, [&] { return stop || job_id != seen; });
        if (stop) return;
        seen = job_id;
        fn = item_fn;
        ++active;
      }
      run_items(*fn);
      {
        std::lock_guard<std::mutex> lk(mu);
        if (--active == 0) cv_done.notify_all();
      }
    }
  }

  void run_items(const std::function<void(std::int64_t)>& fn) {
    for (;;) {
      std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= total) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!error) error = std::current_exception();
      }
    }
  }
};

ThreadPool::ThreadPool() : impl_(new Impl) {
#if defined(LOCO_HAVE_OPENBLAS)
  // BLAS calls happen inside work items; keep them single-threaded.
  openblas_set_num_threads(1);
#endif
  configure(resolve_thread_count(0));
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lk(impl_->mu);
    impl_->stop = true;
  }
  impl_->cv_work.notify_all();
  for (auto& t : impl_->workers) t.join();
  delete impl_;
}

ThreadPool& ThreadPool::instance() {
  static ThreadPool pool;
  return pool;
}

void ThreadPool::configure(int thread_count) {
  if (thread_count < 1) thread_count = 1;
  if (thread_count == thread_count_ && !impl_->workers.empty()) return;
  if (thread_count == thread_count_ && thread_count == 1) return;
  // Tear down existing workers.
  {
    std::lock_guard<std::mutex> lk(impl_->mu);
    impl_->stop = true;
  }
  impl_->cv_work.notify_all();
  for (auto& t : impl_->workers) t.join();
  impl_->workers.clear();
  impl_->stop = false;
  thread_count_ = thread_count;
  for (int i = 0; i < thread_count - 1; ++i) {
    impl_->workers.emplace_back([this] { impl_->worker_loop(); });
  }
}

void ThreadPool::parallel_for(std::int64_t n,
                              const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  if (thread_count_ == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  {
    std::lock_guard<std::mutex> lk(impl_->mu);
    impl_->item_fn = &fn;
    impl_->total = n;
    impl_->next.store(0, std::memory_order_relaxed);
    impl_->error = nullptr;
    ++impl_->job_id;
  }
  impl_->cv_work.notify_all();
  impl_->run_items(fn);
  {
    std::unique_lock<std::mutex> lk(impl_->mu);
    impl_->cv_done.wait(lk, [&] { return impl_->active == 0; });
    impl_->item_fn = nullptr;
    impl_->total = 0;
    if (impl_->error) {
      auto err = impl_->error;
      impl_->error = nullptr;
      std::rethrow_exception(err);
    }
  }
}

void ThreadPool::parallel_for_chunks(
    std::int64_t n, std::int64_t chunk_size,
    const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  if (chunk_size < 1) chunk_size = 1;
  const std::int64_t chunks = (n + chunk_size - 1) / chunk_size;
  parallel_for(chunks, [&](std::int64_t c) {
    const std::int64_t begin = c * chunk_size;
    const std::int64_t end = std::min(n, begin + chunk_size);
    fn(begin, end);
  });
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LOCO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace loco
