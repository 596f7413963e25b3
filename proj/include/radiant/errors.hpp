#pragma once

#include <stdexcept>
#include <string>

namespace radiant {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidArgument,
  DegenerateGeometry,
  MissingCoverage,
  OutOfDomain,
  IncompleteScene,
  InconsistentGeometry,
  InsufficientOverlap,
  EmptyFrame,
  EmptyMap,
  MissingFloor,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::MissingCoverage: return "missing-coverage";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::IncompleteScene: return "incomplete-scene";
    case ErrorKind::InconsistentGeometry: return "inconsistent-geometry";
    case ErrorKind::InsufficientOverlap: return "insufficient-overlap";
    case ErrorKind::EmptyFrame: return "empty-frame";
    case ErrorKind::EmptyMap: return "empty-map";
    case ErrorKind::MissingFloor: return "missing-floor";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace radiant
