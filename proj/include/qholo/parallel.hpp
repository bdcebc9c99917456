#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace qholo {

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Run fn(item) for item in [0, count) on up to `workers` threads, in waves
/// of consecutive items. Exceptions are rethrown on the caller.
template <class Fn>
void parallel_waves(std::uint64_t count, unsigned workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (workers == 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  for (std::uint64_t start = 0; start < count; start += workers) {
    const auto n = static_cast<unsigned>(std::min<std::uint64_t>(workers, count - start));
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t)
      pool.emplace_back([&, t] {
        try {
          fn(start + t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
}

/// Fixed-shape pairwise reduction: blocks are pushed in index order and
/// merged like a binary counter, so the summation tree depends only on the
/// number of blocks, never on scheduling. Acc needs merge(const Acc&).
template <class Acc>
class PairwiseReducer {
 public:
  void push(Acc acc) {
    std::uint32_t level = 0;
    while (!stack_.empty() && stack_.back().first == level) {
      Acc left = std::move(stack_.back().second);
      stack_.pop_back();
      left.merge(acc);
      acc = std::move(left);
      ++level;
    }
    stack_.emplace_back(level, std::move(acc));
  }

  std::optional<Acc> finish() {
    if (stack_.empty()) return std::nullopt;
    Acc acc = std::move(stack_.back().second);
    for (std::size_t i = stack_.size() - 1; i-- > 0;) {
      Acc left = std::move(stack_[i].second);
      left.merge(acc);
      acc = std::move(left);
    }
    stack_.clear();
    return acc;
  }

 private:
  std::vector<std::pair<std::uint32_t, Acc>> stack_;
};

/// Deterministic block-parallel reduction over [0, count): items are cut
/// into fixed blocks, each block filled by fill(acc, begin, end) on some
/// worker, and the block results reduced pairwise in index order.
template <class Acc, class Make, class Fill>
Acc block_reduce(std::uint64_t count, std::uint64_t block_size, unsigned workers, Make&& make,
                 Fill&& fill) {
  block_size = std::max<std::uint64_t>(1, block_size);
  const std::uint64_t blocks = (count + block_size - 1) / block_size;
  workers = resolve_workers(workers);
  PairwiseReducer<Acc> reducer;
  for (std::uint64_t start = 0; start < blocks; start += workers) {
    const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(workers, blocks - start));
    std::vector<std::optional<Acc>> partial(n);
    parallel_waves(n, workers, [&](std::uint64_t t) {
      const std::uint64_t b = start + t;
      Acc acc = make();
      fill(acc, b * block_size, std::min(count, (b + 1) * block_size));
      partial[t].emplace(std::move(acc));
    });
    for (auto& p : partial) reducer.push(std::move(*p));
  }
  auto result = reducer.finish();
  return result ? std::move(*result) : make();
}

}  // namespace qholo
