#include "doctest.h"

#include <Eigen/Core>

#include "ateband/errors.hpp"
#include "ateband/step_function.hpp"

using ateband::StepFunction;

namespace {

StepFunction two_steps() {
  Eigen::VectorXd t(2), v(2);
  t << 1.0, 2.0;
  v << 0.5, 0.8;
  return StepFunction(t, v, 0.0);
}

}  // namespace

TEST_CASE("step function: right-continuous evaluation") {
  const auto f = two_steps();
  CHECK(f(0.0) == 0.0);
  CHECK(f(0.999) == 0.0);
  CHECK(f(1.0) == 0.5);
  CHECK(f(1.5) == 0.5);
  CHECK(f(2.0) == 0.8);
  CHECK(f(100.0) == 0.8);
}

TEST_CASE("step function: left limits") {
  const auto f = two_steps();
  CHECK(f.left_limit(1.0) == 0.0);
  CHECK(f.left_limit(1.5) == 0.5);
  CHECK(f.left_limit(2.0) == 0.5);
  CHECK(f.left_limit(2.5) == 0.8);
}

TEST_CASE("step function: from_jumps accumulates") {
  Eigen::VectorXd t(3), j(3);
  t << 1, 2, 3;
  j << 0.1, 0.2, 0.3;
  const auto f = StepFunction::from_jumps(t, j, 0.0);
  CHECK(f(3.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(f.jump_at(0) == doctest::Approx(0.1));
  CHECK(f.jump_at(2) == doctest::Approx(0.3));
  CHECK(f.nondecreasing());
}

TEST_CASE("step function: invalid construction") {
  Eigen::VectorXd t(2), v(1);
  t << 1, 2;
  v << 1;
  CHECK_THROWS_AS(StepFunction(t, v, 0.0), ateband::ValidationError);
  Eigen::VectorXd t2(2), v2(2);
  t2 << 2, 2;
  v2 << 1, 2;
  CHECK_THROWS_AS(StepFunction(t2, v2, 0.0), ateband::ValidationError);
}
