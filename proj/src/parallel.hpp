#pragma once

// Static-partition parallel loop. Each index is processed by exactly one
// worker and writes only its own outputs, so results do not depend on the
// worker count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "fracdiff/spectral_solver.hpp"

namespace fracdiff::detail {

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fracdiff::detail
