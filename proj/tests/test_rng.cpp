#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fpg/rng.hpp"

using namespace fpg;

TEST_CASE("equal seeds give equal first 1e4 draws") {
  RngStream a(42), b(42);
  for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42), d(42);
  for (int i = 0; i < 10000; ++i) {
    CHECK(c.uniform() == d.uniform());
    CHECK(c.normal() == d.normal());
  }
}

TEST_CASE("different seeds give different streams") {
  RngStream a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += (a.next_u64() == b.next_u64());
  CHECK(equal == 0);
}

TEST_CASE("uniform stays in [0, 1) and fills the interval") {
  RngStream rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 1e-3);
  CHECK(hi > 1.0 - 1e-3);
}

TEST_CASE("normal moments match the standard normal") {
  RngStream rng(1234);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0, sum_cube = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
    sum_cube += z * z * z;
  }
  // 4-sigma CLT bounds at N=2e5: mean ±0.0089, variance ±0.0126, skew ±0.035.
  CHECK(std::abs(sum / n) < 0.009);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.013);
  CHECK(std::abs(sum_cube / n) < 0.035);
}

TEST_CASE("split streams are reproducible and decorrelated") {
  RngStream parent(99);
  parent.normal();  // advancing the parent must not affect children
  RngStream child_a = parent.split(3);
  RngStream child_b = RngStream(99).split(3);
  for (int i = 0; i < 1000; ++i) CHECK(child_a.next_u64() == child_b.next_u64());

  RngStream c0 = parent.split(0), c1 = parent.split(1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += (c0.next_u64() == c1.next_u64());
  CHECK(equal == 0);
}
