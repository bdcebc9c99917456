#pragma once

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cstdint>
#include <random>

namespace qholo {

enum class Arm : std::uint32_t { signal = 0, idler = 1 };

/// What a random stream is used for; part of the stream key so that, e.g.,
/// the detection draws of frame k never overlap its vacuum draws.
enum class Purpose : std::uint32_t {
  vacuum = 1,
  detection = 2,
  pair_sampling = 3,
  background = 4,
  speckle = 5,
  test = 99,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t frame,
                                          Arm arm, Purpose purpose) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ frame);
  h = mix64(h ^ (static_cast<std::uint64_t>(arm) << 32 | static_cast<std::uint64_t>(purpose)));
  return h;
}

/// Random stream keyed by (seed, frame, arm, purpose). The engine and the
/// Boost distributions are fully specified, so a given key produces the same
/// numbers on every platform and regardless of which worker draws them.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t master_seed, std::uint64_t frame, Arm arm, Purpose purpose)
      : engine_(stream_key(master_seed, frame, arm, purpose)) {}

  double uniform() { return uniform_(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return stddev * normal_(engine_) + mean;
  }
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    boost::random::poisson_distribution<std::uint64_t, double> dist(mean);
    return dist(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::uniform_01<double> uniform_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace qholo
