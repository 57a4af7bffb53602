#pragma once

#include <stdexcept>
#include <string>

namespace fairsvm {

/// Malformed arguments: non-finite entries, mismatched dimensions, bad options.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A protected group is missing or too small for the requested construct.
class DegenerateGroupError : public InputError {
 public:
  using InputError::InputError;
};

/// Only one class label is present where both are required.
class DegenerateLabelError : public InputError {
 public:
  using InputError::InputError;
};

/// Dataset files that cannot be read or mapped onto a dataset.
class LoadError : public InputError {
 public:
  using InputError::InputError;
};

/// A convex subproblem failed while training; carries the outer iteration.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int iteration)
      : std::runtime_error(what + " (outer iteration " +
                           std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace fairsvm
