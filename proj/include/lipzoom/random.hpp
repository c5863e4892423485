#pragma once

#include <cstdint>
#include <limits>

namespace lipzoom {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream purposes; environments and algorithms never share a stream.
enum class Purpose : std::uint64_t {
  environment = 1,
  algorithm = 2,
  probe = 3,
  instance = 4,
  signs = 5,
};

std::uint64_t derive_seed(std::uint64_t root, Purpose purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0);

// Uniform double in [0,1) from a 64-bit hash.
inline double unit_interval(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Counter-based generator: output k is mix64(key + k * golden). Satisfies
// UniformRandomBitGenerator so the <random> distributions work on top of it.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * (counter_++)); }

  double uniform() { return unit_interval((*this)()); }
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

using Rng = CounterRng;

}  // namespace lipzoom
