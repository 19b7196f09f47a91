#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roughquant {

/// Failure categories surfaced by the library. The CLI maps them to the
/// `kind` field of its machine-readable error object.
enum class ErrorKind {
  InvalidParams,
  NonConvergent,
  QuadratureFailure,
  NoConvergence,
  InvalidBudget,
  CapacityExceeded,
  CurveError,
  IndefiniteMatrix,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InvalidBudget: return "InvalidBudget";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::CurveError: return "CurveError";
    case ErrorKind::IndefiniteMatrix: return "IndefiniteMatrix";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace roughquant
