#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aoifl {

// Purposes are mixed into the seed so that, for a given (seed, sensor), each
// stochastic input has its own independent sequence. Sample arrivals are
// therefore identical across schemes, which gives paired comparisons.
enum class StreamPurpose : std::uint32_t {
  arrivals = 1,
  fading = 2,
  ccp_init = 3,
  training_uplink = 4,
  controller = 5,
};

/// Seeded, reproducible random stream. Owned by exactly one sensor (or the
/// controller); never shared.
class RandomStream {
 public:
  RandomStream() : RandomStream(0, 0, StreamPurpose::controller) {}

  RandomStream(std::uint64_t seed, std::uint64_t owner, StreamPurpose purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(owner), static_cast<std::uint32_t>(owner >> 32),
                      static_cast<std::uint32_t>(purpose)};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }

  double exponential(double mean) { return -mean * std::log(uniform_open_closed()); }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aoifl
