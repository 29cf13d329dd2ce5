#include "zpd/rng.hpp"

#include <cmath>
#include <numbers>

namespace zpd {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGoldenGamma;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t key = splitmix64(seed);
  for (std::uint64_t tag : tags) {
    key = splitmix64(key ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
  }
  return key;
}

CounterRng::CounterRng(std::uint64_t seed, StreamFamily family, std::uint64_t index, std::uint64_t step) noexcept
    : key_(stream_key(seed, {static_cast<std::uint64_t>(family), index, step})) {}

std::uint64_t CounterRng::next_u64() noexcept {
  const std::uint64_t out = splitmix64(key_ + counter_ * kGoldenGamma);
  ++counter_;
  return out;
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  if (n <= 1) {
    return 0;
  }
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return x % n;
}

std::size_t CounterRng::categorical(std::span<const double> probs) noexcept {
  const double u = uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) {
      return i;
    }
  }
  // Rounding left u above the running total; return the last index with mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) {
      return i;
    }
  }
  return probs.empty() ? 0 : probs.size() - 1;
}

}  // namespace zpd
