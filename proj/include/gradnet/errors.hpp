#pragma once

#include <stdexcept>
#include <string>

namespace gradnet {

// Error taxonomy. Everything derives from Error so callers can catch the
// whole family or a specific kind.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or axis mismatch between tensors / layers.
struct DimensionError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Operation called in the wrong object state (e.g. backward without a
// cached forward pass).
struct StateError : Error {
  using Error::Error;
};

// Malformed input file; message names the offending offset or record.
struct FormatError : Error {
  using Error::Error;
};

// Invalid configuration value or unknown tag.
struct ConfigError : Error {
  using Error::Error;
};

// Filesystem failure.
struct IoError : Error {
  using Error::Error;
};

// Diagnostics recording misuse (out-of-range rate, non-monotone epoch, ...).
struct RecordingError : Error {
  using Error::Error;
};

}  // namespace gradnet
