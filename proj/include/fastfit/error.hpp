// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace fastfit {

// Every failure surfaced by the library carries one of these kinds so
// callers (and the CLI) can report a single typed line and exit.
enum class ErrorKind {
  empty_input,     // no samples / no frames where data is required
  numeric,         // NaN or Inf encountered in inputs or intermediates
  shape,           // dimension mismatch between arguments
  parameter,       // invalid configuration value
  cola_violation,  // analysis window/hop cannot be inverted
  over_resolved,   // more mel channels than FFT bins
  range,           // index or step outside its valid interval
  io,              // file missing, short read, malformed container
  integrity,       // checksum or directory inconsistency in stored data
  version,         // unsupported format version
  config,          // stored metadata disagrees with the runtime config
  usage,           // unsupported input layout / bad CLI invocation
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::empty_input:    return "empty-input";
    case ErrorKind::numeric:        return "numeric";
    case ErrorKind::shape:          return "shape";
    case ErrorKind::parameter:      return "parameter";
    case ErrorKind::cola_violation: return "cola-violation";
    case ErrorKind::over_resolved:  return "over-resolved";
    case ErrorKind::range:          return "range";
    case ErrorKind::io:             return "io";
    case ErrorKind::integrity:      return "integrity";
    case ErrorKind::version:        return "version";
    case ErrorKind::config:         return "config";
    case ErrorKind::usage:          return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fastfit
