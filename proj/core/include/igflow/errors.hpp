#pragma once

#include <stdexcept>
#include <string>

namespace igflow {

// Evaluation outside a model's validity region. `index` is the offending
// coordinate when a single axis can be blamed, else -1.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, int index)
      : std::runtime_error(what), index_(index) {}
  int coordinate_index() const { return index_; }

 private:
  int index_;
};

class SingularMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")"
                                     : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace igflow
