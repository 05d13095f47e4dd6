#pragma once

#include <stdexcept>
#include <string>

namespace ecl {

// Thrown when inputs violate a documented precondition (bad moduli, malformed
// config, rule mismatch, ...). Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an evaluation is requested at (numerically) coincident points.
class SingularEvaluationError : public ValidationError {
public:
  explicit SingularEvaluationError(const std::string& what) : ValidationError(what) {}
};

// Thrown when a linear solve / eigensolve fails or is hopelessly conditioned.
// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ecl
