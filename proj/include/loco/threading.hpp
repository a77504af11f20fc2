// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace loco {

// Shared worker pool for item-level parallelism. Work items must write
// disjoint outputs; any cross-item reduction happens after the join, in
// index order, so results do not depend on scheduling.
class ThreadPool {
 public:
  static ThreadPool& instance();

  // Resizes the pool. Must not be called while a parallel_for is running.
  void configure(int thread_count);
  int thread_count() const { return thread_count_; }

  // Runs fn(i) for i in [0, n). The calling thread participates.
  void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

  // Runs fn(begin, end) over [0, n) split into chunks of at most chunk_size.
  // Chunk boundaries depend only on n and chunk_size, not on thread count.
  void parallel_for_chunks(std::int64_t n, std::int64_t chunk_size,
                           const std::function<void(std::int64_t, std::int64_t)>& fn);

  ~ThreadPool();

 private:
  ThreadPool();
  struct Impl;
  Impl* impl_;
  int thread_count_ = 1;
};

// Resolves the effective thread count: explicit argument > 0 wins, then the
// LOCO_THREADS environment variable, then hardware concurrency.
int resolve_thread_count(int requested);

}  // namespace loco
