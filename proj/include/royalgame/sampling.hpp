#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace royalgame {

// std::mt19937_64 output is fixed by the standard, but the std distributions are not, so
// bounded draws are done here by rejection: discard raw values below 2^64 mod n, then take
// the value mod n. Any language with MT19937-64 reproduces the same sequence.
class DeterministicRng {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64; bounded draw rejects raw values below 2^64 mod n, then mod n; partial Fisher-Yates";

  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    while (true) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  // Uniform in [0, 1) with 53 bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// First k entries of a Fisher-Yates shuffle of 0..n-1: a uniform sample without replacement,
// in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace royalgame
