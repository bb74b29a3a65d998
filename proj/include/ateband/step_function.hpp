#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cassert>

#include "ateband/errors.hpp"

namespace ateband {

// Right-continuous piecewise-constant curve. `values[j]` is the value at and
// after `times[j]`; `initial` is the value on [0, times[0]).
struct StepFunction {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  double initial = 0.0;

  StepFunction() = default;
  StepFunction(Eigen::VectorXd t, Eigen::VectorXd v, double init = 0.0)
      : times(std::move(t)), values(std::move(v)), initial(init) {
    if (times.size() != values.size())
      throw ValidationError("step function: times/values length mismatch");
    for (Eigen::Index j = 1; j < times.size(); ++j)
      if (!(times[j] > times[j - 1]))
        throw ValidationError("step function: times not strictly increasing");
  }

  static StepFunction from_jumps(Eigen::VectorXd t, const Eigen::VectorXd& jumps,
                                 double init = 0.0) {
    Eigen::VectorXd v(jumps.size());
    double acc = init;
    for (Eigen::Index j = 0; j < jumps.size(); ++j) {
      acc += jumps[j];
      v[j] = acc;
    }
    return StepFunction(std::move(t), std::move(v), init);
  }

  Eigen::Index n_jumps() const { return times.size(); }

  // Value at t (right-continuous).
  double operator()(double t) const {
    const double* begin = times.data();
    const double* end = begin + times.size();
    const auto idx = std::upper_bound(begin, end, t) - begin;
    return idx == 0 ? initial : values[idx - 1];
  }

  // Value strictly before t.
  double left_limit(double t) const {
    const double* begin = times.data();
    const double* end = begin + times.size();
    const auto idx = std::lower_bound(begin, end, t) - begin;
    return idx == 0 ? initial : values[idx - 1];
  }

  double jump_at(Eigen::Index j) const {
    return values[j] - (j == 0 ? initial : values[j - 1]);
  }

  bool nondecreasing(double slack = 0.0) const {
    double prev = initial;
    for (Eigen::Index j = 0; j < values.size(); ++j) {
      if (values[j] < prev - slack) return false;
      prev = values[j];
    }
    return true;
  }
};

}  // namespace ateband
