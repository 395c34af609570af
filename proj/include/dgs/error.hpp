#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dgs {

enum class ErrorKind {
  InvalidSpec,
  OutOfRange,
  DuplicateId,
  DegenerateDistribution,
  ConstantDistribution,
  InvalidThreshold,
  LengthMismatch,
  InvalidArgument,
  InsufficientPool,
  MissingClass,
  SpecInfeasible,
  Parse,
  Validation,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every module reports failures through this type. `subject` names the
/// offending record id, class label, or config field path when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string subject = {},
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(message),
        kind_(kind),
        subject_(std::move(subject)),
        line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::string subject_;
  std::optional<std::size_t> line_;
};

}  // namespace dgs
