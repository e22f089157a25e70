#pragma once

#include <stdexcept>
#include <string>

namespace slicing {

// Precondition violated by the caller (bad dimension, out-of-range parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The linear feasibility solver could not reach a verdict.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hit-or-miss sampling would see too few hits to say anything.
class UndersampledError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage could not certify its inequality. `stage` names the step.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace slicing
