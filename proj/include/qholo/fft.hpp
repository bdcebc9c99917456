#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <utility>

namespace qholo::fft {

enum class Direction { forward, inverse };

namespace detail {

// FFTW planning is not thread-safe but plan execution on new arrays is, so
// plans are created once under a lock and then shared. FFTW_UNALIGNED lets
// any std::vector<std::complex<double>> buffer be used with a cached plan.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t nx, std::size_t ny, Direction dir) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(nx, ny, dir);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* scratch = fftw_alloc_complex(nx * ny);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), scratch, scratch,
                                      dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, Direction>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized in-place DFT in natural (corner-origin) order, row-major
/// data with nx columns and ny rows.
inline void transform(std::span<std::complex<double>> data, std::size_t nx, std::size_t ny,
                      Direction dir) {
  fftw_plan plan = detail::PlanCache::instance().get(nx, ny, dir);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

/// Swap quadrants so that index 0 moves to n/2. Sizes are even, so the
/// operation is its own inverse.
template <class T>
void fftshift(std::span<T> data, std::size_t nx, std::size_t ny) {
  const std::size_t hx = nx / 2;
  const std::size_t hy = ny / 2;
  for (std::size_t y = 0; y < hy; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      std::size_t x2 = (x + hx) % nx;
      std::swap(data[y * nx + x], data[(y + hy) * nx + x2]);
    }
  }
}

/// Unitary DFT with the zero frequency at (n/2, n/2) on both sides.
inline void centered(std::span<std::complex<double>> data, std::size_t nx, std::size_t ny,
                     Direction dir) {
  fftshift(data, nx, ny);
  transform(data, nx, ny, dir);
  fftshift(data, nx, ny);
  const double scale = 1.0 / std::sqrt(static_cast<double>(nx * ny));
  for (auto& v : data) v *= scale;
}

}  // namespace qholo::fft
