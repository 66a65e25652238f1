#pragma once

#include <stdexcept>
#include <string>

namespace mevo {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad shapes, incompatible basis/boundary pairings,
// unresolvable presets, bad CLI input. Mapped to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or truncated files: wrong magic, version, short reads.
// Mapped to exit code 2.
struct FormatError : Error {
  using Error::Error;
};

// Runtime numerical failure: CFL violation, blow-up, non-finite values.
// Mapped to exit code 3.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace mevo
