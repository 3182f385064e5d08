#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sumprod {

/// Splits [0, n) into `workers` contiguous blocks and runs
/// `block(begin, end)` for each on its own thread. Returns the per-block
/// results in block order so merges are independent of scheduling.
/// The first exception thrown by any block is rethrown on the caller.
template <typename Block>
auto map_blocks(std::size_t n, unsigned workers, Block&& block) {
  using Result = decltype(block(std::size_t{0}, std::size_t{0}));
  workers = std::max(1U, workers);
  const std::size_t chunks = std::min<std::size_t>(workers, std::max<std::size_t>(n, 1));
  std::vector<Result> results(chunks);
  if (chunks == 1) {
    results[0] = block(std::size_t{0}, n);
    return results;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    threads.emplace_back([&, c, begin, end] {
      try {
        results[c] = block(begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Like map_blocks, but for side-effecting blocks over disjoint outputs.
template <typename Block>
void for_blocks(std::size_t n, unsigned workers, Block&& block) {
  map_blocks(n, workers, [&](std::size_t b, std::size_t e) {
    block(b, e);
    return 0;
  });
}

}  // namespace sumprod
