#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <utility>

namespace skewflow {

/// Base class for every error raised by the library.
///
/// Errors raised while iterating a trajectory carry the index of the step
/// that failed; `run` attaches it before rethrowing.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return message_.c_str(); }

  std::optional<std::size_t> step() const noexcept { return step_; }

  void attach_step(std::size_t step) {
    if (step_) return;
    step_ = step;
    message_ = "step " + std::to_string(step) + ": " + message_;
  }

 private:
  std::string message_;
  std::optional<std::size_t> step_;
};

#define SKEWFLOW_DEFINE_ERROR(Name)           \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

/// Argument outside the (open) primal domain of a mirror map.
SKEWFLOW_DEFINE_ERROR(DomainError);
/// Operation not defined for this mirror-map kind or domain.
SKEWFLOW_DEFINE_ERROR(UnsupportedError);
/// Vector or matrix sizes disagree.
SKEWFLOW_DEFINE_ERROR(DimensionError);
/// Invalid parameter (non-positive step size, bad tolerance, ...).
SKEWFLOW_DEFINE_ERROR(InvalidArgument);
/// Dual iterate left the representable range.
SKEWFLOW_DEFINE_ERROR(OverflowError);
/// A scheme-specific diagnostic was applied to the wrong trajectory.
SKEWFLOW_DEFINE_ERROR(SchemeMismatchError);
/// A CSV input lacks a required column.
SKEWFLOW_DEFINE_ERROR(MissingColumnError);
/// An experiment configuration failed to load or validate.
SKEWFLOW_DEFINE_ERROR(ConfigError);

#undef SKEWFLOW_DEFINE_ERROR

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(std::string message, double residual)
      : Error(std::move(message) + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace skewflow
