#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace apspic {

/// Split [0, n) into `workers` contiguous chunks and run fn(chunk, begin, end)
/// on each, one thread per chunk. Chunk boundaries depend only on (n, workers),
/// so per-chunk partial results merged in chunk order are reproducible.
template <typename Fn>
void parallel_chunks(std::size_t n, int workers, Fn&& fn) {
  const auto w = static_cast<std::size_t>(std::max(1, workers));
  auto bounds = [&](std::size_t c) { return n * c / w; };
  if (w == 1 || n < 2 * w) {
    for (std::size_t c = 0; c < w; ++c) fn(c, bounds(c), bounds(c + 1));
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  {
    std::vector<std::jthread> pool;
    pool.reserve(w - 1);
    auto run = [&](std::size_t c) {
      try {
        fn(c, bounds(c), bounds(c + 1));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    };
    for (std::size_t c = 1; c < w; ++c) pool.emplace_back(run, c);
    run(0);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace apspic
