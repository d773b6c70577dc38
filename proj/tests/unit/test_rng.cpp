#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "monotest/rng.hpp"

using namespace monotest;

// Known-answer vectors of the Random123 distribution (kat_vectors, philox4x32_10).
TEST_CASE("philox4x32-10 known answers") {
  using C = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("first draw of seed 0 stream 0 is the zero block") {
  CounterRng rng(0, 0);
  CHECK(rng.next_u64() == (0x6627e8d5ULL | (0xe169c58dULL << 32)));
  CHECK(rng.next_u64() == (0xbc57ac4cULL | (0x9b00dbd8ULL << 32)));
}

TEST_CASE("streams are reproducible and distinct") {
  CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
  }
}

TEST_CASE("uniform and below stay in range") {
  CounterRng rng(5);
  double sum = 0.0;
  const int n = 200000;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    const auto k = rng.below(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  for (int c : counts) CHECK(std::abs(c - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
}

TEST_CASE("derived seeds differ across tags and indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    seen.insert(derive_seed(1, kRepetitionTag, i));
    seen.insert(derive_seed(1, kTestTag, i));
  }
  CHECK(seen.size() == 2000);
  CHECK(derive_seed(9, kTestTag, 3) == derive_seed(9, kTestTag, 3));
}

TEST_CASE("works as a standard URBG") {
  CounterRng rng(3);
  std::uniform_int_distribution<int> dist(1, 6);
  const int v = dist(rng);
  CHECK(v >= 1);
  CHECK(v <= 6);
}
