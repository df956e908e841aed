#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace landau {

struct ExecPolicy {
  int threads = 1;
  /// Fixed-order reductions with compensated summation.
  bool deterministic = false;
};

/// Splits [0, n) into contiguous chunks, one per thread. Each index is handled
/// by exactly one thread, so per-index reductions are order-independent of the
/// thread count.
template <class Fn>
void parallel_for(std::size_t n, const ExecPolicy& policy, Fn&& fn) {
  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(policy.threads, 1)), 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace landau
