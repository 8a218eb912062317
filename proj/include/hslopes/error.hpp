#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace hslopes {

/// Precondition violated by a caller-supplied argument (bad step, empty sample, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A closed-form law was evaluated outside the region where it is finite.
///
/// Carries the violated inequality in readable form and, when it is known,
/// the critical value of the Laplace argument at which the law blows up.
class DomainError : public std::domain_error {
 public:
  DomainError(std::string condition, std::optional<double> boundary = std::nullopt)
      : std::domain_error("domain error: " + condition),
        condition_(std::move(condition)),
        boundary_(boundary) {}

  const std::string& condition() const noexcept { return condition_; }
  std::optional<double> boundary() const noexcept { return boundary_; }

 private:
  std::string condition_;
  std::optional<double> boundary_;
};

/// The simulated window did not contain enough h-extrema for the request.
class HorizonTooShort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters the theory does not cover (zero drift in the closed forms).
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hslopes
