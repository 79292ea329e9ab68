#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "planarm/rng.hpp"

using planarm::Rng;

TEST_CASE("same seed gives an identical stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("uniform01 stays in [0,1) with sane mean") {
  Rng r(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform_int is unbiased over small ranges") {
  Rng r(9);
  int counts[5] = {};
  const int n = 50000;
  for (int i = 0; i < n; ++i) counts[r.uniform_int(5)]++;
  for (int c : counts) CHECK(std::abs(c - n / 5) < 600);
}

TEST_CASE("normal has roughly unit variance") {
  Rng r(11);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("derive produces decorrelated child streams") {
  const uint64_t s1 = Rng::derive(42, 0);
  const uint64_t s2 = Rng::derive(42, 1);
  CHECK(s1 != s2);
  CHECK(Rng::derive(42, 0) == s1);  // stable
  Rng a(s1), b(s2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("bernoulli edge probabilities") {
  Rng r(5);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(r.bernoulli(0.0));
    CHECK(r.bernoulli(1.0));
  }
}
