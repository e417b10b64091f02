// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#include "fuselab/rng.hpp"

#include <cmath>

#include <catch2/catch.hpp>

using namespace fuselab;

TEST_CASE("identical keys replay identical streams") {
  CounterRng a(1, 2, 3);
  CounterRng b(1, 2, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different stream labels decorrelate") {
  CounterRng a(1, 2, 3);
  CounterRng b(1, 2, 4);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("unit draws stay in range and average near a half") {
  CounterRng rng(9);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000 == Approx(0.5).margin(0.01));
}

TEST_CASE("bounded draws cover the range without bias artifacts") {
  CounterRng rng(10);
  std::array<int, 7> histogram{};
  for (int i = 0; i < 14000; ++i) ++histogram[rng.bounded(7)];
  for (int count : histogram) {
    CHECK(count > 1700);
    CHECK(count < 2300);
  }
  CHECK(rng.bounded(1) == 0);
}

TEST_CASE("normal and poisson track their moments") {
  CounterRng rng(11);
  double sum = 0.0, sum_sq = 0.0;
  constexpr int kDraws = 20000;
  for (int i = 0; i < kDraws; ++i) {
    const double z = rng.normal(3.0, 2.0);
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / kDraws;
  CHECK(mean == Approx(3.0).margin(0.05));
  CHECK(std::sqrt(sum_sq / kDraws - mean * mean) == Approx(2.0).margin(0.05));

  std::uint64_t events = 0;
  for (int i = 0; i < kDraws; ++i) events += rng.poisson(1.5);
  CHECK(static_cast<double>(events) / kDraws == Approx(1.5).margin(0.05));
  CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("beta draws respect their mean and support") {
  CounterRng rng(12);
  double sum = 0.0;
  constexpr int kDraws = 20000;
  for (int i = 0; i < kDraws; ++i) {
    const double x = rng.beta(8.0, 2.0);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
  }
  CHECK(sum / kDraws == Approx(0.8).margin(0.01));

  sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += rng.beta(3.0, 7.0);
  CHECK(sum / kDraws == Approx(0.3).margin(0.01));

  // shape < 1 branch
  sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += rng.beta(0.5, 0.5);
  CHECK(sum / kDraws == Approx(0.5).margin(0.02));
}

TEST_CASE("fnv1a is stable") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
  CHECK(fnv1a64("a") != fnv1a64("b"));
}
