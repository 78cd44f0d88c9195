#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "royalgame/digest.hpp"
#include "royalgame/sampling.hpp"

using namespace royalgame;

TEST(Rng, EngineMatchesStandardReferenceValue) {
  DeterministicRng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.next();
  EXPECT_EQ(rng.next(), 9981545732273789042ULL);
}

// Frozen from an independent MT19937-64 implementation with the same rejection rule.
TEST(Rng, BoundedDrawsAreFrozen) {
  DeterministicRng rng(41);
  std::vector<std::uint64_t> draws;
  for (int i = 0; i < 8; ++i) draws.push_back(rng.below(10));
  EXPECT_EQ(draws, (std::vector<std::uint64_t>{1, 3, 0, 7, 5, 7, 5, 0}));
}

TEST(Rng, UnitInterval) {
  DeterministicRng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Sample, FrozenDrawOrder) {
  EXPECT_EQ(sample_without_replacement(100, 10, 41),
            (std::vector<std::size_t>{51, 39, 26, 90, 61, 22, 85, 13, 70, 44}));
  EXPECT_EQ(sample_without_replacement(7, 7, 3), (std::vector<std::size_t>{6, 2, 1, 4, 0, 5, 3}));
  EXPECT_EQ(sample_without_replacement(1000000, 5, 1),
            (std::vector<std::size_t>{311528, 638431, 660708, 748566, 302248}));
}

TEST(Sample, DistinctAndInRange) {
  const auto s = sample_without_replacement(500, 500, 9);
  std::set<std::size_t> seen(s.begin(), s.end());
  EXPECT_EQ(seen.size(), 500u);
  EXPECT_EQ(*seen.rbegin(), 499u);
}

TEST(Sample, PrefixStableAcrossK) {
  const auto small = sample_without_replacement(1000, 10, 5);
  const auto large = sample_without_replacement(1000, 100, 5);
  EXPECT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
}

TEST(Sample, ClampsAndHandlesEmpty) {
  EXPECT_EQ(sample_without_replacement(3, 10, 1).size(), 3u);
  EXPECT_TRUE(sample_without_replacement(0, 0, 1).empty());
  EXPECT_TRUE(sample_without_replacement(10, 0, 1).empty());
}

TEST(Digest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a");
  h.update("bc");
  EXPECT_EQ(h.hex_digest(), sha256_hex("abc"));
}

TEST(Digest, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
