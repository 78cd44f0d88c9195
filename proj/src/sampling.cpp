#include "royalgame/sampling.hpp"

#include <unordered_map>

namespace royalgame {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) k = n;
  // Sparse Fisher-Yates: only displaced slots are stored, so memory is O(k) rather than O(n).
  std::unordered_map<std::size_t, std::size_t> displaced;
  auto slot = [&](std::size_t i) {
    const auto it = displaced.find(i);
    return it == displaced.end() ? i : it->second;
  };
  DeterministicRng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    const std::size_t picked = slot(j);
    displaced[j] = slot(i);
    out.push_back(picked);
  }
  return out;
}

}  // namespace royalgame
