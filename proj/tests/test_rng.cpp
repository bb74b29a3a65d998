#include "doctest.h"

#include <cmath>
#include <vector>

#include "ateband/rng.hpp"

using ateband::RngStream;

TEST_CASE("rng: same (seed, stream) reproduces the sequence exactly") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: distinct streams decorrelate") {
  RngStream a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("rng: uniform stays inside (0,1)") {
  RngStream s(3, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("rng: normal moments") {
  RngStream s(11, 0);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("rng: unit poisson support and moments") {
  RngStream s(5, 2);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = s.poisson_unit();
    CHECK(k >= 0);
    sum += k;
    sumsq += static_cast<double>(k) * k;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 1.0) < 0.02);
  CHECK(std::abs(sumsq / n - mean * mean - 1.0) < 0.05);
}
