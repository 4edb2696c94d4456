#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace gkw {

/// Data-parallel width, capped by the GKW_THREADS environment variable.
/// Defaults to 1 so results are reproducible unless parallelism is asked for;
/// parallel maps write disjoint slots, so outputs are bit-identical at any
/// width. Reductions always run sequentially in a fixed order.
inline int thread_width() {
  static const int width = [] {
    const char* env = std::getenv("GKW_THREADS");
    if (env == nullptr) return 1;
    const long v = std::strtol(env, nullptr, 10);
    if (v < 1) return 1;
    if (v > 256) return 256;
    return static_cast<int>(v);
  }();
  return width;
}

/// Applies fn(begin, end) over [0, count) in contiguous chunks, one per
/// worker. fn must only write state owned by its chunk.
template <typename Fn>
void parallel_for(Eigen::Index count, Fn&& fn) {
  const int width = thread_width();
  if (width <= 1 || count < 1024) {
    fn(Eigen::Index{0}, count);
    return;
  }
  const Eigen::Index chunk = (count + width - 1) / width;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(width));
  for (int t = 0; t < width; ++t) {
    const Eigen::Index begin = t * chunk;
    if (begin >= count) break;
    const Eigen::Index end = std::min(begin + chunk, count);
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace gkw
