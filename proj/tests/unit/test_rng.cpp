#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mvfuse/rng.hpp"

using mvfuse::Rng;

TEST_CASE("splitmix64 matches the reference output for seed zero") {
  REQUIRE(mvfuse::splitmix64(0) == 0xe220a8397b1dcdafULL);
  REQUIRE(mvfuse::splitmix64(1) == 0x910a2dec89025cc1ULL);
}

TEST_CASE("derive_seed is stable and decorrelates indices") {
  REQUIRE(mvfuse::derive_seed(0, 0) == 0xd300120a5ea35cacULL);
  REQUIRE(mvfuse::derive_seed(0, 1) == 0xd4993d56a5f40fb6ULL);
  REQUIRE(mvfuse::derive_seed(42, 7) == 0xfbb6a1d252d7d622ULL);
  REQUIRE(mvfuse::derive_seed(5, 1) != mvfuse::derive_seed(5, 2));
  REQUIRE(mvfuse::derive_seed(5, 1) != mvfuse::derive_seed(6, 1));
}

TEST_CASE("identical seeds give identical streams, different seeds diverge") {
  Rng a(123), b(123), c(124);
  bool all_equal = true;
  bool any_equal_c = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    const std::uint64_t vb = b.next_u64();
    if (va != vb) all_equal = false;
    if (va == c.next_u64()) any_equal_c = true;
  }
  REQUIRE(all_equal);
  REQUIRE_FALSE(any_equal_c);
}

TEST_CASE("uniform stays in [0, 1) and covers the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  REQUIRE(lo < 0.01);
  REQUIRE(hi > 0.99);
}

TEST_CASE("uniform_index respects bounds and is roughly uniform") {
  Rng rng(11);
  std::vector<int> buckets(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t v = rng.uniform_index(10);
    REQUIRE(v < 10);
    ++buckets[static_cast<std::size_t>(v)];
  }
  for (const int b : buckets) {
    REQUIRE(b > 8000);
    REQUIRE(b < 12000);
  }
  Rng one(3);
  for (int i = 0; i < 100; ++i) REQUIRE(one.uniform_index(1) == 0);
}

TEST_CASE("gaussian draws have standard moments") {
  Rng rng(99);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.02);
  REQUIRE(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("gaussian spare value is part of the deterministic stream") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.gaussian() == b.gaussian());
}
