// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/common.hpp"

#include <atomic>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hamdlr {

namespace {
std::atomic<int> g_workers{0};
}

void fail(ErrorCode code, const std::string &what) { throw Error(code, what); }

void set_num_workers(int n) { g_workers = n > 0 ? n : 0; }

int num_workers()
{
  int n = g_workers.load();
  if (n > 0) return n;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void parallel_for(Index n, const std::function<void(Index)> &fn)
{
  if (n <= 0) return;
  const int workers = num_workers();
  if (workers <= 1 || n == 1) {
    for (Index j = 0; j < n; ++j) fn(j);
    return;
  }
  std::mutex mu;
  Index first_bad = n;
  std::exception_ptr first_err;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (Index j = 0; j < n; ++j) {
    try {
      fn(j);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (j < first_bad) {
        first_bad = j;
        first_err = std::current_exception();
      }
    }
  }
  if (first_err) std::rethrow_exception(first_err);
}

}  // namespace hamdlr
