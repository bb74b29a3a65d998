#pragma once

#include <stdexcept>
#include <string>

namespace ateband {

// Input that cannot be parsed (bad CSV row, bad JSON config).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data that parses but violates a model assumption (ties, bad status, ...).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure while fitting (non-convergence, separation).
struct FitError : std::runtime_error {
  explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

// A matrix that must be inverted is numerically singular.
struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ateband
