#pragma once

#include <stdexcept>
#include <string>

namespace jointscert {

// Base of every error raised by the library. The CLI maps each subclass to
// an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input or violated precondition (exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

// A claimed inequality or feasibility condition fails (exit code 1).
class MathError : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of budget (exit code 3).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double lower, double upper)
      : Error(what), lower_(lower), upper_(upper) {}

  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  double lower_;
  double upper_;
};

}  // namespace jointscert
