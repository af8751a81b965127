#pragma once

#include <cstdint>
#include <limits>

namespace revwel {

// Counter-based uniform stream. Every draw is a pure function of
// (seed, sample index, agent index), so chunks of a Monte Carlo run can be
// evaluated in any order and on any thread with bit-identical results, and
// two mechanisms evaluated with the same seed see the same value profiles.

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Maps 64 random bits to the open interval (0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// The draws belonging to one Monte Carlo sample.
class SampleStream {
public:
  constexpr SampleStream(std::uint64_t seed, std::uint64_t sample) noexcept
      : key_(mix64(seed ^ mix64(sample * kGolden + 0x632BE59BD9B4E019ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t stream) const noexcept {
    return mix64(key_ + (stream + 1) * kGolden);
  }

  /// Uniform on (0,1) for the given sub-stream (agent index, or an auxiliary id).
  constexpr double uniform(std::uint64_t stream) const noexcept {
    return to_unit(bits(stream));
  }

private:
  std::uint64_t key_;
};

inline double uniform_at(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t sample) noexcept {
  return SampleStream(seed, sample).uniform(stream);
}

/// Sequential view over one sub-stream; satisfies UniformRandomBitGenerator.
class CounterEngine {
public:
  using result_type = std::uint64_t;

  explicit CounterEngine(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return SampleStream(seed_, counter_++).bits(stream_); }

  double uniform() noexcept { return to_unit((*this)()); }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) % bound;
  }

  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace revwel
