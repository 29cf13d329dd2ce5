#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace zpd {

/// Stream families. Every random draw in the simulator comes from a stream
/// keyed by (seed, family, index, step), so results never depend on the
/// order in which problems are processed.
enum class StreamFamily : std::uint64_t {
  world = 1,
  rollout = 2,
  minibatch = 3,
  sampled_reverse_kl = 4,
  probe = 5,
  test = 99,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Folds the tags into a 64-bit stream key.
std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

/// Counter-based generator: output n is splitmix64(key + n * golden_gamma).
/// Bit-identical across platforms and compilers.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  CounterRng(std::uint64_t seed, StreamFamily family, std::uint64_t index, std::uint64_t step = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Standard normal (Box-Muller, one output per call).
  double normal() noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Index drawn from a probability vector by inverse CDF.
  std::size_t categorical(std::span<const double> probs) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace zpd
